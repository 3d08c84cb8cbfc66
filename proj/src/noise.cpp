#include "clockforge/noise.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "clockforge/kernels.hpp"
#include "clockforge/prior.hpp"

namespace clockforge {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

double NoiseSpec::sigma_lo(double tau) const {
    require(tau > 0, "tau must be positive");
    return std::sqrt(h_white / tau + h_flicker + h_rw * tau);
}

double NoiseSpec::psd(double f) const {
    require(f > 0, "frequency must be positive");
    // Two-sample variance table: sigma^2 = h0/(2 tau) + 2 ln2 h-1 + (2 pi^2/3) h-2 tau
    // for S_y(f) = h0 + h-1/f + h-2/f^2.
    const double h0 = 2.0 * h_white;
    const double hm1 = h_flicker / (2.0 * kLn2);
    const double hm2 = 3.0 * h_rw / (2.0 * kPi * kPi);
    return h0 + hm1 / f + hm2 / (f * f);
}

double NoiseSpec::coherence_time(double T_D) const {
    require(any_component(), "noise spec has no components");
    return clockforge::coherence_time([this](double tau) { return sigma_lo(tau); }, omega0,
                                      T_D);
}

NoiseSpec NoiseSpec::single_alpha(int alpha, double omega0_times_z, double z, double t_dead) {
    require(z > 0 && omega0_times_z > 0, "z and omega0*z must be positive");
    NoiseSpec s;
    s.omega0 = omega0_times_z / z;
    const double coeff = std::pow((z + t_dead) / z, -static_cast<double>(alpha)) /
                         (omega0_times_z * omega0_times_z) * std::pow(z, -alpha);
    switch (alpha) {
        case -1: s.h_white = coeff; break;
        case 0: s.h_flicker = coeff; break;
        case 1: s.h_rw = coeff; break;
        default: throw InvalidArgument("alpha must be -1, 0 or +1");
    }
    return s;
}

NoiseEngine::NoiseEngine(const NoiseSpec& spec, double t_cycle, uint64_t n_cycles_hint,
                         Rng rng)
    : spec_(spec), rng_(rng), t_cycle_(t_cycle) {
    require(t_cycle > 0, "cycle duration must be positive");
    require(n_cycles_hint >= 2, "n_cycles must be >= 2");
    rw_diffusion_ = 3.0 * spec.h_rw;
    if (spec.h_flicker > 0) {
        // Rates log-spaced at 2 per decade from 1/(2 n T_C) to 2/T_C.
        const double g_lo = 1.0 / (2.0 * static_cast<double>(n_cycles_hint) * t_cycle);
        const double g_hi = 2.0 / t_cycle;
        const double decades = std::log10(g_hi / g_lo);
        check_numeric(decades > 0.5 && decades < 50,
                      "flicker band cannot cover the requested trace length");
        const int k = std::max(2, static_cast<int>(std::ceil(2.0 * decades)) + 1);
        chain_rate_.resize(k);
        for (int i = 0; i < k; ++i)
            chain_rate_[i] = g_lo * std::pow(g_hi / g_lo, static_cast<double>(i) / (k - 1));
        // Input power per chain proportional to its rate gives a 1/f band;
        // the common scale is set by the closed-form AR(1) ADEV sum at the
        // band-center averaging time.
        chain_var_.assign(k, 0.5);
        const int m_center = static_cast<int>(std::clamp<double>(
            std::sqrt(static_cast<double>(n_cycles_hint)), 4.0, 8192.0));
        const double unit = flicker_theory_avar(m_center);
        const double scale = spec.h_flicker / unit;
        for (auto& v : chain_var_) v *= scale;
        chain_x_.resize(k);
        for (int i = 0; i < k; ++i) chain_x_[i] = std::sqrt(chain_var_[i]) * rng_.gaussian();
    }
}

double NoiseEngine::flicker_theory_avar(int m) const {
    // Non-overlapping Allan variance of the chain sum for point-sampled AR(1)
    // processes stepped at t_cycle, by direct autocovariance block sums.
    double total = 0;
    for (std::size_t i = 0; i < chain_rate_.size(); ++i) {
        const double r = std::exp(-chain_rate_[i] * t_cycle_);
        const double v = chain_var_[i];
        double var_block = static_cast<double>(m);
        for (int k = 1; k < m; ++k) var_block += 2.0 * (m - k) * std::pow(r, k);
        double cov = 0;
        for (int k = 1; k <= 2 * m - 1; ++k)
            cov += (m - std::abs(k - m)) * std::pow(r, k);
        total += v / (static_cast<double>(m) * m) * (var_block - cov);
    }
    return total;
}

void NoiseEngine::prepare_segment(double dt) {
    if (dt == cached_dt_) return;
    cached_dt_ = dt;
    const std::size_t k = chain_rate_.size();
    seg_decay_.resize(k);
    seg_amp_.resize(k);
    noise_buf_.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double r = std::exp(-chain_rate_[i] * dt);
        seg_decay_[i] = r;
        seg_amp_[i] = std::sqrt(chain_var_[i] * (1.0 - r * r));
    }
}

double NoiseEngine::advance(double dt) {
    require(dt > 0, "segment duration must be positive");
    double y = 0;
    if (spec_.h_white > 0) y += std::sqrt(spec_.h_white / dt) * rng_.gaussian();
    if (rw_diffusion_ > 0) {
        // Exact Brownian segment: endpoint increment u and average deviation v
        // with Var(u)=D dt, Var(v)=D dt/3, Cov = D dt/2.
        const double z1 = rng_.gaussian();
        const double z2 = rng_.gaussian();
        const double u = std::sqrt(rw_diffusion_ * dt) * z1;
        const double v = 0.5 * u + std::sqrt(rw_diffusion_ * dt / 12.0) * z2;
        y += rw_level_ + v;
        rw_level_ += u;
    }
    if (!chain_rate_.empty()) {
        prepare_segment(dt);
        for (auto& g : noise_buf_) g = rng_.gaussian();
        kernels::ar1_advance(chain_x_.data(), seg_decay_.data(), seg_amp_.data(),
                             noise_buf_.data(), chain_x_.size());
        for (double x : chain_x_) y += x;
    }
    return y;
}

std::vector<double> generate_trace(const NoiseSpec& spec, double t_cycle, uint64_t n_cycles,
                                   uint64_t seed) {
    require(spec.any_component(), "noise spec has no components");
    require(n_cycles >= 2, "n_cycles must be >= 2");
    NoiseEngine eng(spec, t_cycle, n_cycles, Rng(seed));
    std::vector<double> trace(n_cycles);
    for (auto& y : trace) y = eng.advance(t_cycle);
    return trace;
}

AdevCurve allan_deviation(std::span<const double> trace, double t_cycle,
                          std::span<const double> taus) {
    require(t_cycle > 0, "cycle duration must be positive");
    AdevCurve curve;
    for (double tau : taus) {
        const double ratio = tau / t_cycle;
        const auto m = static_cast<uint64_t>(std::llround(ratio));
        require(m >= 1 && std::abs(ratio - static_cast<double>(m)) < 1e-9,
                "tau must be an integer multiple of the cycle duration");
        const uint64_t big_m = trace.size() / m;
        require(big_m >= 3, "insufficient data: fewer than 3 segments at this tau");
        double prev = 0, acc = 0;
        for (uint64_t j = 0; j < big_m; ++j) {
            double mean = 0;
            for (uint64_t i = 0; i < m; ++i) mean += trace[j * m + i];
            mean /= static_cast<double>(m);
            if (j > 0) {
                const double d = mean - prev;
                acc += d * d;
            }
            prev = mean;
        }
        const double avar = acc / (2.0 * static_cast<double>(big_m - 1));
        const double sigma = std::sqrt(avar);
        curve.taus.push_back(tau);
        curve.sigmas.push_back(sigma);
        curve.stderrs.push_back(sigma / std::sqrt(2.0 * static_cast<double>(big_m - 1)));
    }
    return curve;
}

StreamingAdev::StreamingAdev(double t_cycle, std::vector<uint64_t> multiples)
    : t_cycle_(t_cycle) {
    for (uint64_t m : multiples) {
        Slot s;
        s.m = m;
        slots_.push_back(s);
    }
}

void StreamingAdev::push(double y) {
    for (Slot& s : slots_) {
        s.block_sum += y;
        if (++s.in_block == s.m) {
            const double mean = s.block_sum / static_cast<double>(s.m);
            if (s.has_prev) {
                const double d = mean - s.prev_mean;
                s.diff2 += d * d;
                ++s.pairs;
            }
            s.prev_mean = mean;
            s.has_prev = true;
            s.block_sum = 0;
            s.in_block = 0;
        }
    }
}

AdevCurve StreamingAdev::finish() const {
    AdevCurve curve;
    for (const Slot& s : slots_) {
        if (s.pairs < 2) continue;  // fewer than 3 segments
        const double sigma = std::sqrt(s.diff2 / (2.0 * static_cast<double>(s.pairs)));
        curve.taus.push_back(static_cast<double>(s.m) * t_cycle_);
        curve.sigmas.push_back(sigma);
        curve.stderrs.push_back(sigma / std::sqrt(2.0 * static_cast<double>(s.pairs)));
    }
    return curve;
}

std::vector<uint64_t> log_spaced_multiples(uint64_t max_m, int per_decade) {
    std::vector<uint64_t> out;
    uint64_t prev = 0;
    for (int j = 0;; ++j) {
        const auto m = static_cast<uint64_t>(
            std::llround(std::pow(10.0, static_cast<double>(j) / per_decade)));
        if (m > max_m) break;
        if (m != prev) out.push_back(m);
        prev = m;
    }
    return out;
}

double dick_effect(const NoiseSpec& spec, double T, double T_D, double tau, long k_max) {
    require(T > 0 && T_D >= 0 && tau > 0, "times must be positive (T_D >= 0)");
    require(k_max >= 1, "k_max must be >= 1");
    if (T_D == 0) return 0.0;
    const double t_c = T + T_D;
    const double h0 = 2.0 * spec.h_white;
    const double hm1 = spec.h_flicker / (2.0 * kLn2);
    const double hm2 = 3.0 * spec.h_rw / (2.0 * kPi * kPi);

    double sum = 0;
    long k = 1;
    for (; k <= k_max; ++k) {
        const double f = static_cast<double>(k) / t_c;
        const double s_y = h0 + hm1 / f + hm2 / (f * f);
        const double sk = std::sin(kPi * k * T / t_c);
        sum += s_y * sk * sk / (kPi * kPi * static_cast<double>(k) * k);
        if (k >= 64 && (k & (k - 1)) == 0) {  // check the tail at powers of two
            const double kk = static_cast<double>(k);
            const double tail = h0 / (kPi * kPi * kk) + hm1 * t_c / (2.0 * kPi * kPi * kk * kk) +
                                hm2 * t_c * t_c / (3.0 * kPi * kPi * kk * kk * kk);
            if (tail < 1e-12 * sum) break;
        }
    }
    if (k > k_max) {
        const double kk = static_cast<double>(k_max);
        const double tail = h0 / (kPi * kPi * kk) + hm1 * t_c / (2.0 * kPi * kPi * kk * kk) +
                            hm2 * t_c * t_c / (3.0 * kPi * kPi * kk * kk * kk);
        if (tail > 0.01 * sum)
            std::cerr << "clockforge: dick_effect precision warning: truncation tail "
                         "estimate exceeds 1% of the sum; increase k_max\n";
    }
    return sum / tau * (t_c * t_c) / (T * T);
}

double total_adev(double qpn_ctl_var, double dick_var) {
    require(qpn_ctl_var >= 0 && dick_var >= 0, "variances must be non-negative");
    return std::sqrt(qpn_ctl_var + dick_var);
}

double adev_from_efm(double efm, double T, double T_D, double tau, double omega0) {
    require(efm >= 0 && T > 0 && T_D >= 0 && tau > 0 && omega0 > 0,
            "adev_from_efm arguments out of range");
    return std::sqrt(efm) / (omega0 * T) * std::sqrt((T + T_D) / tau);
}

double adev_dimensionless(double efm, double t_over_z, double td_over_z) {
    require(efm >= 0 && t_over_z > 0 && td_over_z >= 0,
            "adev_dimensionless arguments out of range");
    return std::sqrt(efm) * std::sqrt(t_over_z + td_over_z) / t_over_z;
}

double extrapolate_unit_time(const AdevCurve& curve, double tau_lo, double tau_hi,
                             bool* flagged) {
    std::vector<double> t, s;
    for (std::size_t i = 0; i < curve.taus.size(); ++i)
        if (curve.taus[i] >= tau_lo && curve.taus[i] <= tau_hi) {
            t.push_back(curve.taus[i]);
            s.push_back(curve.sigmas[i]);
        }
    require(t.size() >= 4, "extrapolation fit range holds fewer than 4 points");

    double c = 0;
    for (std::size_t i = 0; i < t.size(); ++i) c += s[i] * std::sqrt(t[i]);
    c /= static_cast<double>(t.size());

    // Log-log slope; a clean 1/sqrt(tau) tail gives -1/2.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double x = std::log(t[i]);
        const double y = std::log(s[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (flagged) *flagged = std::abs(slope + 0.5) > 0.1;
    return c;
}

}  // namespace clockforge
