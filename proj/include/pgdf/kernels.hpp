#pragma once

#include <cstddef>
#include <vector>

#include "pgdf/matrix.hpp"

namespace pgdf::kernels {

enum class Backend { serial, openmp };

Backend backend();
void set_backend(Backend b);
bool openmp_compiled();
int max_threads();

// Both backends compute every output element with the same inner accumulation
// order, so results are bit-identical regardless of thread count. Parallel
// loops only ever split independent output elements.

/// Y[B,O] = X[B,I] W[I,O] + b[O]
void linear_forward(const Matrix& X, const Matrix& W, const std::vector<double>& b, Matrix& Y);

/// dX[B,I] = dY[B,O] W^T
void linear_grad_input(const Matrix& dY, const Matrix& W, Matrix& dX);

/// dW[I,O] = X^T dY, db[O] = column sums of dY
void linear_grad_params(const Matrix& X, const Matrix& dY, Matrix& dW, std::vector<double>& db);

void tanh_forward(const Matrix& Z, Matrix& A);

/// dZ = dA * (1 - A^2), A = tanh(Z)
void tanh_backward(const Matrix& A, const Matrix& dA, Matrix& dZ);

/// Row-wise max-subtracted softmax.
void softmax_rows(const Matrix& logits, Matrix& probs);

/// 1-D convolution shapes. Activations are [batch, channels, len] flattened
/// row-major; weights are [out_ch, in_ch, kernel]. Zero padding, stride 1,
/// out length = len + 2*pad - kernel + 1.
struct ConvDims {
    std::size_t batch, in_ch, out_ch, len, kernel, pad;
    std::size_t out_len() const { return len + 2 * pad - kernel + 1; }
};

void conv1d_forward(const ConvDims& d, const std::vector<double>& X,
                    const std::vector<double>& W, const std::vector<double>& b,
                    std::vector<double>& Y);
void conv1d_grad_input(const ConvDims& d, const std::vector<double>& dY,
                       const std::vector<double>& W, std::vector<double>& dX);
void conv1d_grad_params(const ConvDims& d, const std::vector<double>& X,
                        const std::vector<double>& dY, std::vector<double>& dW,
                        std::vector<double>& db);

namespace serial {
void linear_forward(const Matrix& X, const Matrix& W, const std::vector<double>& b, Matrix& Y);
void linear_grad_input(const Matrix& dY, const Matrix& W, Matrix& dX);
void linear_grad_params(const Matrix& X, const Matrix& dY, Matrix& dW, std::vector<double>& db);
void tanh_forward(const Matrix& Z, Matrix& A);
void tanh_backward(const Matrix& A, const Matrix& dA, Matrix& dZ);
void softmax_rows(const Matrix& logits, Matrix& probs);
void conv1d_forward(const ConvDims& d, const std::vector<double>& X,
                    const std::vector<double>& W, const std::vector<double>& b,
                    std::vector<double>& Y);
void conv1d_grad_input(const ConvDims& d, const std::vector<double>& dY,
                       const std::vector<double>& W, std::vector<double>& dX);
void conv1d_grad_params(const ConvDims& d, const std::vector<double>& X,
                        const std::vector<double>& dY, std::vector<double>& dW,
                        std::vector<double>& db);
} // namespace serial

namespace omp {
void linear_forward(const Matrix& X, const Matrix& W, const std::vector<double>& b, Matrix& Y);
void linear_grad_input(const Matrix& dY, const Matrix& W, Matrix& dX);
void linear_grad_params(const Matrix& X, const Matrix& dY, Matrix& dW, std::vector<double>& db);
void tanh_forward(const Matrix& Z, Matrix& A);
void tanh_backward(const Matrix& A, const Matrix& dA, Matrix& dZ);
void softmax_rows(const Matrix& logits, Matrix& probs);
void conv1d_forward(const ConvDims& d, const std::vector<double>& X,
                    const std::vector<double>& W, const std::vector<double>& b,
                    std::vector<double>& Y);
void conv1d_grad_input(const ConvDims& d, const std::vector<double>& dY,
                       const std::vector<double>& W, std::vector<double>& dX);
void conv1d_grad_params(const ConvDims& d, const std::vector<double>& X,
                        const std::vector<double>& dY, std::vector<double>& dW,
                        std::vector<double>& db);
} // namespace omp

} // namespace pgdf::kernels
