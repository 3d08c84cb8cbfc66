#pragma once

#include <cstddef>

namespace clockforge::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
bool backend_available(Backend b);
const char* backend_name(Backend b);

// Force a backend (throws InvalidArgument if unavailable). Honors the
// CLOCKFORGE_KERNELS=scalar|avx2 environment variable at startup.
void set_backend(Backend b);

// Phase factors e^{-i phi M} along the ladder M = m0, m0+1, ..., m0+(n-1).
// Always scalar (sequential recurrence, O(n) with one sincos).
void phase_ladder(double phi, double m0, std::size_t n, double* re, double* im);

// P[x] = |sum_M W[x][M] * p[M]|^2 for complex weights W (SoA, row-major
// n_out x dim) and phase factors p. The hot kernel of both the quadrature
// model builder and the per-cycle Monte Carlo sampler.
void probs_from_weights(const double* wre, const double* wim, std::size_t n_out,
                        std::size_t dim, const double* pre, const double* pim,
                        double* out);

// x[i] = decay[i]*x[i] + amp[i]*noise[i]  (damped-random-walk chain update)
void ar1_advance(double* x, const double* decay, const double* amp,
                 const double* noise, std::size_t n);

// sum_i w[i]*a[i] and sum_i w[i]*a[i]*b[i]
double weighted_sum(const double* w, const double* a, std::size_t n);
double weighted_sum2(const double* w, const double* a, const double* b, std::size_t n);

namespace detail {
struct Ops {
    void (*probs_from_weights)(const double*, const double*, std::size_t, std::size_t,
                               const double*, const double*, double*);
    void (*ar1_advance)(double*, const double*, const double*, const double*, std::size_t);
    double (*weighted_sum)(const double*, const double*, std::size_t);
    double (*weighted_sum2)(const double*, const double*, const double*, std::size_t);
};
const Ops& scalar_ops();
#if CLOCKFORGE_HAVE_AVX2
const Ops& avx2_ops();
#endif
}  // namespace detail

}  // namespace clockforge::kernels
