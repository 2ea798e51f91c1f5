#pragma once

// Inner-loop kernels with a scalar reference implementation and SIMD variants
// selected at runtime. Every variant must agree with the scalar one to within
// floating-point reassociation; tests/test_kernels.cpp checks this.

#include <cstddef>
#include <string_view>
#include <vector>

namespace gafvit::kernels {

struct AdamWArgs {
    double lr;
    double beta1;
    double beta2;
    double eps;
    double weight_decay;
    double bias_correction1; // 1 - beta1^t
    double bias_correction2; // 1 - beta2^t
};

struct KernelTable {
    const char* name;

    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // y[i] *= alpha
    void (*scal)(double alpha, double* y, std::size_t n);
    // One row of the summation and difference fields for a series with
    // values f and complements s = sqrt(1 - f^2):
    //   gasf[k] = fj * f[k] - sj * s[k]
    //   gadf[k] = f[k] * sj - fj * s[k]
    // Products are rounded before subtraction; gadf is exactly antisymmetric.
    void (*gaf_row)(double fj, double sj, const double* f, const double* s, double* gasf, double* gadf,
                    std::size_t n);
    // Decoupled weight decay Adam update over one flat parameter array.
    void (*adamw)(double* param, const double* grad, double* m, double* v, std::size_t n, const AdamWArgs& args);
};

const KernelTable& scalar();

// nullptr when not compiled in or not supported by the running CPU.
const KernelTable* avx2();

// Every table usable on this machine, scalar first.
std::vector<const KernelTable*> available();

// The table used by the library. Defaults to the widest supported variant;
// GAFVIT_KERNELS=scalar|avx2 overrides at first use.
const KernelTable& active();

// Returns false if the named variant is unavailable.
bool select(std::string_view name);

} // namespace gafvit::kernels
