#include "clockforge/prior.hpp"

#include <algorithm>
#include <cmath>

namespace clockforge {

NoiseExponent NoiseExponent::of(int alpha) {
    switch (alpha) {
        case -1: return {-1, 1.0};
        case 0: return {0, 1.7};
        case 1: return {1, 2.0};
        default: throw InvalidArgument("noise exponent alpha must be -1, 0 or +1");
    }
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    require(n >= 1, "gauss_legendre needs n >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
}

double PriorModel::variance_on_grid() const {
    double acc = 0;
    for (std::size_t q = 0; q < nodes.size(); ++q) acc += weights[q] * nodes[q] * nodes[q];
    return acc;
}

PriorModel gaussian_prior(double delta_phi, int n_nodes, double truncation) {
    require(delta_phi > 0, "prior width must be positive");
    require(n_nodes >= 11 && n_nodes % 2 == 1, "n_nodes must be odd and >= 11");
    require(truncation > 0, "truncation must be positive");

    double half = truncation * delta_phi;
    // Keep the grid wide enough to resolve fringe boundaries once the prior
    // leaks past the main fringe (CTL integrals live in the tails).
    if (delta_phi > kPi / 3.0) half = std::max(half, 3.0 * kPi);

    std::vector<double> x, w;
    gauss_legendre(n_nodes, x, w);

    PriorModel prior;
    prior.width = delta_phi;
    prior.truncation = truncation;
    prior.nodes.resize(n_nodes);
    prior.weights.resize(n_nodes);
    const double inv_two_var = 0.5 / (delta_phi * delta_phi);
    for (int q = 0; q < n_nodes; ++q) {
        const double phi = half * x[q];
        prior.nodes[q] = phi;
        prior.weights[q] = w[q] * std::exp(-phi * phi * inv_two_var);
    }
    // Symmetrize, then normalize; the first moment vanishes identically.
    for (int q = 0; q < n_nodes / 2; ++q) {
        const double avg = 0.5 * (prior.weights[q] + prior.weights[n_nodes - 1 - q]);
        prior.weights[q] = avg;
        prior.weights[n_nodes - 1 - q] = avg;
    }
    double sum = 0;
    for (double wq : prior.weights) sum += wq;
    for (double& wq : prior.weights) wq /= sum;

    double m1 = 0, m2 = 0;
    for (int q = 0; q < n_nodes; ++q) {
        m1 += prior.weights[q] * prior.nodes[q];
        m2 += prior.weights[q] * prior.nodes[q] * prior.nodes[q];
    }
    // Resolution gate: the quadrature must reproduce the variance of the
    // truncated density; the truncation bias itself is absorbed below.
    const double a = half / delta_phi;
    const double pdf_a = std::exp(-0.5 * a * a) / std::sqrt(2.0 * kPi);
    const double var_truncated = 1.0 - 2.0 * a * pdf_a / std::erf(a / std::sqrt(2.0));
    check_numeric(std::abs(m2 / (delta_phi * delta_phi) - var_truncated) <= 1e-8,
                  "prior quadrature under-resolves the Gaussian; increase n_nodes");
    // Affine node rescale pins the grid variance to delta_phi^2 exactly.
    const double rescale = delta_phi / std::sqrt(m2);
    for (double& phi : prior.nodes) phi *= rescale;

    m1 = m2 = 0;
    for (int q = 0; q < n_nodes; ++q) {
        m1 += prior.weights[q] * prior.nodes[q];
        m2 += prior.weights[q] * prior.nodes[q] * prior.nodes[q];
    }
    check_numeric(std::abs(m1) <= 1e-10 * delta_phi, "prior first moment departs from zero");
    check_numeric(std::abs(m2 - delta_phi * delta_phi) <= 1e-8 * delta_phi * delta_phi,
                  "prior second moment departs from the width");
    return prior;
}

PriorModel gaussian_prior_auto(double delta_phi, int n_atoms) {
    double half = 8.0 * delta_phi;
    if (delta_phi > kPi / 3.0) half = std::max(half, 3.0 * kPi);
    // ~6 nodes per period of the fastest phase factor e^{-i phi N}.
    int n = static_cast<int>(std::ceil(6.0 * n_atoms * half / kPi));
    n = std::clamp(n, 201, 4001);
    if (n % 2 == 0) ++n;
    return gaussian_prior(delta_phi, n, 8.0);
}

double width_from_interrogation(double T, double Z, NoiseExponent alpha) {
    require(T > 0 && Z > 0, "interrogation and coherence times must be positive");
    return std::sqrt(alpha.chi * std::pow(T / Z, 2.0 + alpha.alpha));
}

double deadtime_width(double T_D, double Z, NoiseExponent alpha) {
    require(T_D >= 0 && Z > 0, "dead time must be non-negative");
    if (T_D == 0) return 0.0;
    return std::sqrt(2.0 * std::pow(T_D / Z, 2.0 + alpha.alpha));
}

double combine_widths(double delta_phi_T, double delta_phi_D) {
    require(delta_phi_T >= 0 && delta_phi_D >= 0, "widths must be non-negative");
    require(delta_phi_T > 0 || delta_phi_D > 0, "at least one width must be positive");
    return std::hypot(delta_phi_T, delta_phi_D);
}

double coherence_time(const std::function<double(double)>& sigma_lo, double omega0,
                      double T_D) {
    require(omega0 > 0, "omega0 must be positive");
    require(T_D >= 0, "dead time must be non-negative");
    const auto f = [&](double z) { return sigma_lo(z + T_D) * omega0 * z - 1.0; };

    double lo = 1e-18, hi = 1e-18;
    double flo = f(lo);
    bool bracketed = false;
    for (int k = 0; k < 1240; ++k) {
        hi = lo * 1.07;
        const double fhi = f(hi);
        if (flo == 0.0) return lo;
        if (flo < 0 && fhi >= 0) {
            bracketed = true;
            break;
        }
        lo = hi;
        flo = fhi;
    }
    check_numeric(bracketed, "coherence time: no sign change in the bracketing scan");
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if ((hi - lo) <= 1e-12 * mid) break;
        if (f(mid) < 0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace clockforge
