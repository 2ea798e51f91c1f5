#include "gafvit/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace gafvit::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double acc = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(y + i + 4, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_avx2(double alpha, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] *= alpha;
}

// No FMA here: see the contract in kernels.hpp.
void gaf_row_avx2(double fj, double sj, const double* f, const double* s, double* gasf, double* gadf,
                  std::size_t n) {
    const __m256d vf = _mm256_set1_pd(fj);
    const __m256d vs = _mm256_set1_pd(sj);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d fk = _mm256_loadu_pd(f + k);
        const __m256d sk = _mm256_loadu_pd(s + k);
        _mm256_storeu_pd(gasf + k, _mm256_sub_pd(_mm256_mul_pd(vf, fk), _mm256_mul_pd(vs, sk)));
        _mm256_storeu_pd(gadf + k, _mm256_sub_pd(_mm256_mul_pd(fk, vs), _mm256_mul_pd(vf, sk)));
    }
    for (; k < n; ++k) {
        gasf[k] = fj * f[k] - sj * s[k];
        gadf[k] = f[k] * sj - fj * s[k];
    }
}

void adamw_avx2(double* param, const double* grad, double* m, double* v, std::size_t n, const AdamWArgs& a) {
    const __m256d b1 = _mm256_set1_pd(a.beta1);
    const __m256d b2 = _mm256_set1_pd(a.beta2);
    const __m256d omb1 = _mm256_set1_pd(1.0 - a.beta1);
    const __m256d omb2 = _mm256_set1_pd(1.0 - a.beta2);
    const __m256d bc1 = _mm256_set1_pd(a.bias_correction1);
    const __m256d bc2 = _mm256_set1_pd(a.bias_correction2);
    const __m256d eps = _mm256_set1_pd(a.eps);
    const __m256d lr = _mm256_set1_pd(a.lr);
    const __m256d decay = _mm256_set1_pd(a.lr * a.weight_decay);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d g = _mm256_loadu_pd(grad + i);
        const __m256d p = _mm256_loadu_pd(param + i);
        __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, g));
        __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)), _mm256_mul_pd(_mm256_mul_pd(omb2, g), g));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d m_hat = _mm256_div_pd(mi, bc1);
        const __m256d v_hat = _mm256_div_pd(vi, bc2);
        const __m256d step = _mm256_mul_pd(lr, _mm256_div_pd(m_hat, _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps)));
        _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_sub_pd(p, step), _mm256_mul_pd(decay, p)));
    }
    for (; i < n; ++i) {
        m[i] = a.beta1 * m[i] + (1.0 - a.beta1) * grad[i];
        v[i] = a.beta2 * v[i] + (1.0 - a.beta2) * grad[i] * grad[i];
        const double m_hat = m[i] / a.bias_correction1;
        const double v_hat = v[i] / a.bias_correction2;
        param[i] = param[i] - a.lr * (m_hat / (std::sqrt(v_hat) + a.eps)) - a.lr * a.weight_decay * param[i];
    }
}

} // namespace

const KernelTable* avx2_table() {
    static const KernelTable table{"avx2", dot_avx2, axpy_avx2, scal_avx2, gaf_row_avx2, adamw_avx2};
    return &table;
}

} // namespace gafvit::kernels
