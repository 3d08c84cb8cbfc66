#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "clockforge/kernels.hpp"
#include "clockforge/rng.hpp"

using namespace clockforge;

namespace {

struct ProbsCase {
    std::size_t n_out, dim;
    std::vector<double> wre, wim, pre, pim;
};

ProbsCase random_case(Rng& rng, std::size_t n_out, std::size_t dim) {
    ProbsCase c{n_out, dim, {}, {}, {}, {}};
    for (std::size_t i = 0; i < n_out * dim; ++i) {
        c.wre.push_back(2 * rng.uniform01() - 1);
        c.wim.push_back(2 * rng.uniform01() - 1);
    }
    for (std::size_t j = 0; j < dim; ++j) {
        const double a = 6.28 * rng.uniform01();
        c.pre.push_back(std::cos(a));
        c.pim.push_back(std::sin(a));
    }
    return c;
}

std::vector<double> probs_reference(const ProbsCase& c) {
    std::vector<double> out(c.n_out);
    for (std::size_t x = 0; x < c.n_out; ++x) {
        std::complex<double> acc = 0;
        for (std::size_t j = 0; j < c.dim; ++j)
            acc += std::complex<double>(c.wre[x * c.dim + j], c.wim[x * c.dim + j]) *
                   std::complex<double>(c.pre[j], c.pim[j]);
        out[x] = std::norm(acc);
    }
    return out;
}

}  // namespace

TEST_CASE("phase ladder matches direct sincos") {
    const double phi = 0.7321, m0 = -8.0;
    const std::size_t n = 17;
    std::vector<double> re(n), im(n);
    kernels::phase_ladder(phi, m0, n, re.data(), im.data());
    for (std::size_t j = 0; j < n; ++j) {
        const double m = m0 + static_cast<double>(j);
        CHECK(re[j] == doctest::Approx(std::cos(-phi * m)).epsilon(1e-13));
        CHECK(im[j] == doctest::Approx(std::sin(-phi * m)).epsilon(1e-13));
    }
}

TEST_CASE("probability kernel matches the complex reference on all backends") {
    Rng rng(42);
    for (const std::size_t dim : {3u, 9u, 33u, 65u, 130u}) {
        const ProbsCase c = random_case(rng, dim, dim);
        const std::vector<double> ref = probs_reference(c);
        for (const auto backend : {kernels::Backend::Scalar, kernels::Backend::Avx2}) {
            if (!kernels::backend_available(backend)) continue;
            kernels::set_backend(backend);
            std::vector<double> out(c.n_out);
            kernels::probs_from_weights(c.wre.data(), c.wim.data(), c.n_out, c.dim,
                                        c.pre.data(), c.pim.data(), out.data());
            for (std::size_t x = 0; x < c.n_out; ++x)
                CHECK(out[x] == doctest::Approx(ref[x]).epsilon(1e-13));
        }
    }
    kernels::set_backend(kernels::backend_available(kernels::Backend::Avx2)
                             ? kernels::Backend::Avx2
                             : kernels::Backend::Scalar);
}

TEST_CASE("ar1 advance equivalence across backends") {
    Rng rng(7);
    const std::size_t n = 23;
    std::vector<double> x0(n), decay(n), amp(n), noise(n);
    for (std::size_t i = 0; i < n; ++i) {
        x0[i] = rng.gaussian();
        decay[i] = rng.uniform01();
        amp[i] = rng.uniform01();
        noise[i] = rng.gaussian();
    }
    std::vector<double> ref = x0;
    for (std::size_t i = 0; i < n; ++i) ref[i] = decay[i] * ref[i] + amp[i] * noise[i];

    for (const auto backend : {kernels::Backend::Scalar, kernels::Backend::Avx2}) {
        if (!kernels::backend_available(backend)) continue;
        kernels::set_backend(backend);
        std::vector<double> x = x0;
        kernels::ar1_advance(x.data(), decay.data(), amp.data(), noise.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-14));
    }
}

TEST_CASE("weighted reductions match serial references") {
    Rng rng(9);
    const std::size_t n = 201;
    std::vector<double> w(n), a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = rng.uniform01();
        a[i] = 2 * rng.uniform01() - 1;
        b[i] = 2 * rng.uniform01() - 1;
    }
    double ref1 = 0, ref2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ref1 += w[i] * a[i];
        ref2 += w[i] * a[i] * b[i];
    }
    for (const auto backend : {kernels::Backend::Scalar, kernels::Backend::Avx2}) {
        if (!kernels::backend_available(backend)) continue;
        kernels::set_backend(backend);
        CHECK(kernels::weighted_sum(w.data(), a.data(), n) ==
              doctest::Approx(ref1).epsilon(1e-13));
        CHECK(kernels::weighted_sum2(w.data(), a.data(), b.data(), n) ==
              doctest::Approx(ref2).epsilon(1e-13));
    }
}

TEST_CASE("active backend is reported and switchable") {
    CHECK(kernels::backend_available(kernels::Backend::Scalar));
    const auto original = kernels::active_backend();
    kernels::set_backend(kernels::Backend::Scalar);
    CHECK(kernels::active_backend() == kernels::Backend::Scalar);
    kernels::set_backend(original);
}
