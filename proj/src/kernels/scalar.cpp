#include "clockforge/kernels.hpp"

#include <cmath>

namespace clockforge::kernels {

void phase_ladder(double phi, double m0, std::size_t n, double* re, double* im) {
    // e^{-i phi m0}, stepped by e^{-i phi}. Drift over n<=few hundred steps is
    // well below the structural tolerance.
    double cr = std::cos(-phi * m0), ci = std::sin(-phi * m0);
    const double sr = std::cos(-phi), si = std::sin(-phi);
    for (std::size_t j = 0; j < n; ++j) {
        re[j] = cr;
        im[j] = ci;
        const double nr = cr * sr - ci * si;
        ci = cr * si + ci * sr;
        cr = nr;
    }
}

namespace detail {

namespace {

void probs_scalar(const double* wre, const double* wim, std::size_t n_out, std::size_t dim,
                  const double* pre, const double* pim, double* out) {
    for (std::size_t x = 0; x < n_out; ++x) {
        const double* wr = wre + x * dim;
        const double* wi = wim + x * dim;
        double ar = 0, ai = 0;
        for (std::size_t j = 0; j < dim; ++j) {
            ar += wr[j] * pre[j] - wi[j] * pim[j];
            ai += wr[j] * pim[j] + wi[j] * pre[j];
        }
        out[x] = ar * ar + ai * ai;
    }
}

void ar1_scalar(double* x, const double* decay, const double* amp, const double* noise,
                std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = decay[i] * x[i] + amp[i] * noise[i];
}

double wsum_scalar(const double* w, const double* a, std::size_t n) {
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * a[i];
    return acc;
}

double wsum2_scalar(const double* w, const double* a, const double* b, std::size_t n) {
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * a[i] * b[i];
    return acc;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{probs_scalar, ar1_scalar, wsum_scalar, wsum2_scalar};
    return ops;
}

}  // namespace detail

}  // namespace clockforge::kernels
