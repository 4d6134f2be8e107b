// Serial reference kernels. The OpenMP variants in kernels_omp.cpp must match
// these bit-for-bit; tests compare the two backends on random inputs.

#include <algorithm>
#include <cmath>

#include "pgdf/kernels.hpp"

namespace pgdf::kernels::serial {

void linear_forward(const Matrix& X, const Matrix& W, const std::vector<double>& b, Matrix& Y) {
    const std::size_t B = X.rows, I = X.cols, O = W.cols;
    Y = Matrix(B, O);
    for (std::size_t r = 0; r < B; ++r) {
        const double* x = X.row_ptr(r);
        double* y = Y.row_ptr(r);
        for (std::size_t o = 0; o < O; ++o) {
            double acc = b[o];
            for (std::size_t i = 0; i < I; ++i) acc += x[i] * W(i, o);
            y[o] = acc;
        }
    }
}

void linear_grad_input(const Matrix& dY, const Matrix& W, Matrix& dX) {
    const std::size_t B = dY.rows, O = dY.cols, I = W.rows;
    dX = Matrix(B, I);
    for (std::size_t r = 0; r < B; ++r) {
        const double* g = dY.row_ptr(r);
        double* d = dX.row_ptr(r);
        for (std::size_t i = 0; i < I; ++i) {
            double acc = 0.0;
            for (std::size_t o = 0; o < O; ++o) acc += g[o] * W(i, o);
            d[i] = acc;
        }
    }
}

void linear_grad_params(const Matrix& X, const Matrix& dY, Matrix& dW, std::vector<double>& db) {
    const std::size_t B = X.rows, I = X.cols, O = dY.cols;
    dW = Matrix(I, O);
    db.assign(O, 0.0);
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t o = 0; o < O; ++o) {
            double acc = 0.0;
            for (std::size_t r = 0; r < B; ++r) acc += X(r, i) * dY(r, o);
            dW(i, o) = acc;
        }
    for (std::size_t o = 0; o < O; ++o) {
        double acc = 0.0;
        for (std::size_t r = 0; r < B; ++r) acc += dY(r, o);
        db[o] = acc;
    }
}

void tanh_forward(const Matrix& Z, Matrix& A) {
    A = Matrix(Z.rows, Z.cols);
    const std::size_t n = Z.data.size();
    for (std::size_t i = 0; i < n; ++i) A.data[i] = std::tanh(Z.data[i]);
}

void tanh_backward(const Matrix& A, const Matrix& dA, Matrix& dZ) {
    dZ = Matrix(A.rows, A.cols);
    const std::size_t n = A.data.size();
    for (std::size_t i = 0; i < n; ++i) dZ.data[i] = dA.data[i] * (1.0 - A.data[i] * A.data[i]);
}

void softmax_rows(const Matrix& logits, Matrix& probs) {
    probs = Matrix(logits.rows, logits.cols);
    const std::size_t C = logits.cols;
    for (std::size_t r = 0; r < logits.rows; ++r) {
        const double* z = logits.row_ptr(r);
        double* p = probs.row_ptr(r);
        double mx = z[0];
        for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, z[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            p[c] = std::exp(z[c] - mx);
            sum += p[c];
        }
        for (std::size_t c = 0; c < C; ++c) p[c] /= sum;
    }
}

void conv1d_forward(const ConvDims& d, const std::vector<double>& X,
                    const std::vector<double>& W, const std::vector<double>& b,
                    std::vector<double>& Y) {
    const std::size_t L = d.len, K = d.kernel, OL = d.out_len();
    Y.assign(d.batch * d.out_ch * OL, 0.0);
    for (std::size_t n = 0; n < d.batch; ++n)
        for (std::size_t oc = 0; oc < d.out_ch; ++oc)
            for (std::size_t t = 0; t < OL; ++t) {
                double acc = b[oc];
                for (std::size_t ic = 0; ic < d.in_ch; ++ic)
                    for (std::size_t k = 0; k < K; ++k) {
                        const std::ptrdiff_t s =
                            static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(d.pad);
                        if (s < 0 || s >= static_cast<std::ptrdiff_t>(L)) continue;
                        acc += X[(n * d.in_ch + ic) * L + s] * W[(oc * d.in_ch + ic) * K + k];
                    }
                Y[(n * d.out_ch + oc) * OL + t] = acc;
            }
}

void conv1d_grad_input(const ConvDims& d, const std::vector<double>& dY,
                       const std::vector<double>& W, std::vector<double>& dX) {
    const std::size_t L = d.len, K = d.kernel, OL = d.out_len();
    dX.assign(d.batch * d.in_ch * L, 0.0);
    for (std::size_t n = 0; n < d.batch; ++n)
        for (std::size_t ic = 0; ic < d.in_ch; ++ic)
            for (std::size_t s = 0; s < L; ++s) {
                double acc = 0.0;
                for (std::size_t oc = 0; oc < d.out_ch; ++oc)
                    for (std::size_t k = 0; k < K; ++k) {
                        const std::ptrdiff_t t =
                            static_cast<std::ptrdiff_t>(s + d.pad) - static_cast<std::ptrdiff_t>(k);
                        if (t < 0 || t >= static_cast<std::ptrdiff_t>(OL)) continue;
                        acc += dY[(n * d.out_ch + oc) * OL + t] * W[(oc * d.in_ch + ic) * K + k];
                    }
                dX[(n * d.in_ch + ic) * L + s] = acc;
            }
}

void conv1d_grad_params(const ConvDims& d, const std::vector<double>& X,
                        const std::vector<double>& dY, std::vector<double>& dW,
                        std::vector<double>& db) {
    const std::size_t L = d.len, K = d.kernel, OL = d.out_len();
    dW.assign(d.out_ch * d.in_ch * K, 0.0);
    db.assign(d.out_ch, 0.0);
    for (std::size_t oc = 0; oc < d.out_ch; ++oc) {
        for (std::size_t ic = 0; ic < d.in_ch; ++ic)
            for (std::size_t k = 0; k < K; ++k) {
                double acc = 0.0;
                for (std::size_t n = 0; n < d.batch; ++n)
                    for (std::size_t t = 0; t < OL; ++t) {
                        const std::ptrdiff_t s =
                            static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(d.pad);
                        if (s < 0 || s >= static_cast<std::ptrdiff_t>(L)) continue;
                        acc += dY[(n * d.out_ch + oc) * OL + t] * X[(n * d.in_ch + ic) * L + s];
                    }
                dW[(oc * d.in_ch + ic) * K + k] = acc;
            }
        double acc = 0.0;
        for (std::size_t n = 0; n < d.batch; ++n)
            for (std::size_t t = 0; t < OL; ++t) acc += dY[(n * d.out_ch + oc) * OL + t];
        db[oc] = acc;
    }
}

} // namespace pgdf::kernels::serial
