#include "gafvit/kernels.hpp"

#include <cmath>

namespace gafvit::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_scalar(double alpha, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] *= alpha;
}

void gaf_row_scalar(double fj, double sj, const double* f, const double* s, double* gasf, double* gadf,
                    std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        gasf[k] = fj * f[k] - sj * s[k];
        gadf[k] = f[k] * sj - fj * s[k];
    }
}

void adamw_scalar(double* param, const double* grad, double* m, double* v, std::size_t n, const AdamWArgs& a) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = a.beta1 * m[i] + (1.0 - a.beta1) * grad[i];
        v[i] = a.beta2 * v[i] + (1.0 - a.beta2) * grad[i] * grad[i];
        const double m_hat = m[i] / a.bias_correction1;
        const double v_hat = v[i] / a.bias_correction2;
        param[i] = param[i] - a.lr * (m_hat / (std::sqrt(v_hat) + a.eps)) - a.lr * a.weight_decay * param[i];
    }
}

} // namespace

const KernelTable& scalar() {
    static const KernelTable table{"scalar", dot_scalar, axpy_scalar, scal_scalar, gaf_row_scalar, adamw_scalar};
    return table;
}

} // namespace gafvit::kernels
