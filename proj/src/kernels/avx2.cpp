#include "clockforge/kernels.hpp"

#if CLOCKFORGE_HAVE_AVX2

#include <immintrin.h>

namespace clockforge::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void probs_avx2(const double* wre, const double* wim, std::size_t n_out, std::size_t dim,
                const double* pre, const double* pim, double* out) {
    const std::size_t dv = dim & ~std::size_t(3);
    for (std::size_t x = 0; x < n_out; ++x) {
        const double* wr = wre + x * dim;
        const double* wi = wim + x * dim;
        __m256d vr = _mm256_setzero_pd();
        __m256d vi = _mm256_setzero_pd();
        for (std::size_t j = 0; j < dv; j += 4) {
            const __m256d a = _mm256_loadu_pd(wr + j);
            const __m256d b = _mm256_loadu_pd(wi + j);
            const __m256d c = _mm256_loadu_pd(pre + j);
            const __m256d d = _mm256_loadu_pd(pim + j);
            vr = _mm256_fmadd_pd(a, c, vr);
            vr = _mm256_fnmadd_pd(b, d, vr);
            vi = _mm256_fmadd_pd(a, d, vi);
            vi = _mm256_fmadd_pd(b, c, vi);
        }
        double ar = hsum(vr), ai = hsum(vi);
        for (std::size_t j = dv; j < dim; ++j) {
            ar += wr[j] * pre[j] - wi[j] * pim[j];
            ai += wr[j] * pim[j] + wi[j] * pre[j];
        }
        out[x] = ar * ar + ai * ai;
    }
}

void ar1_avx2(double* x, const double* decay, const double* amp, const double* noise,
              std::size_t n) {
    const std::size_t nv = n & ~std::size_t(3);
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d dv = _mm256_loadu_pd(decay + i);
        const __m256d av = _mm256_loadu_pd(amp + i);
        const __m256d gv = _mm256_loadu_pd(noise + i);
        _mm256_storeu_pd(x + i, _mm256_fmadd_pd(dv, xv, _mm256_mul_pd(av, gv)));
    }
    for (std::size_t i = nv; i < n; ++i) x[i] = decay[i] * x[i] + amp[i] * noise[i];
}

double wsum_avx2(const double* w, const double* a, std::size_t n) {
    const std::size_t nv = n & ~std::size_t(3);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i), acc);
    double s = hsum(acc);
    for (std::size_t i = nv; i < n; ++i) s += w[i] * a[i];
    return s;
}

double wsum2_avx2(const double* w, const double* a, const double* b, std::size_t n) {
    const std::size_t nv = n & ~std::size_t(3);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d wa = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
        acc = _mm256_fmadd_pd(wa, _mm256_loadu_pd(b + i), acc);
    }
    double s = hsum(acc);
    for (std::size_t i = nv; i < n; ++i) s += w[i] * a[i] * b[i];
    return s;
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops{probs_avx2, ar1_avx2, wsum_avx2, wsum2_avx2};
    return ops;
}

}  // namespace clockforge::kernels::detail

#endif  // CLOCKFORGE_HAVE_AVX2
