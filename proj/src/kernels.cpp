#include "pgdf/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pgdf::kernels {

namespace {
Backend g_backend = Backend::openmp;
}

Backend backend() { return g_backend; }
void set_backend(Backend b) { g_backend = b; }

bool openmp_compiled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

#define PGDF_DISPATCH(fn, ...)                    \
    if (g_backend == Backend::openmp)             \
        omp::fn(__VA_ARGS__);                     \
    else                                          \
        serial::fn(__VA_ARGS__)

void linear_forward(const Matrix& X, const Matrix& W, const std::vector<double>& b, Matrix& Y) {
    PGDF_DISPATCH(linear_forward, X, W, b, Y);
}
void linear_grad_input(const Matrix& dY, const Matrix& W, Matrix& dX) {
    PGDF_DISPATCH(linear_grad_input, dY, W, dX);
}
void linear_grad_params(const Matrix& X, const Matrix& dY, Matrix& dW, std::vector<double>& db) {
    PGDF_DISPATCH(linear_grad_params, X, dY, dW, db);
}
void tanh_forward(const Matrix& Z, Matrix& A) { PGDF_DISPATCH(tanh_forward, Z, A); }
void tanh_backward(const Matrix& A, const Matrix& dA, Matrix& dZ) {
    PGDF_DISPATCH(tanh_backward, A, dA, dZ);
}
void softmax_rows(const Matrix& logits, Matrix& probs) {
    PGDF_DISPATCH(softmax_rows, logits, probs);
}
void conv1d_forward(const ConvDims& d, const std::vector<double>& X,
                    const std::vector<double>& W, const std::vector<double>& b,
                    std::vector<double>& Y) {
    PGDF_DISPATCH(conv1d_forward, d, X, W, b, Y);
}
void conv1d_grad_input(const ConvDims& d, const std::vector<double>& dY,
                       const std::vector<double>& W, std::vector<double>& dX) {
    PGDF_DISPATCH(conv1d_grad_input, d, dY, W, dX);
}
void conv1d_grad_params(const ConvDims& d, const std::vector<double>& X,
                        const std::vector<double>& dY, std::vector<double>& dW,
                        std::vector<double>& db) {
    PGDF_DISPATCH(conv1d_grad_params, d, X, dY, dW, db);
}

#undef PGDF_DISPATCH

} // namespace pgdf::kernels
