#include "clockforge/clock.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "clockforge/bounds.hpp"
#include "clockforge/rng.hpp"

namespace clockforge {

namespace {

uint64_t derive_seed(uint64_t master, uint64_t stream) {
    uint64_t s = master ^ (stream * 0x9e3779b97f4a7c15ULL + 0xd1b54a32d192ed03ULL);
    // splitmix64 finalizer
    s = (s ^ (s >> 30)) * 0xbf58476d1ce4e5b9ULL;
    s = (s ^ (s >> 27)) * 0x94d049bb133111ebULL;
    return s ^ (s >> 31);
}

double golden_min(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

HopDetector::HopDetector(int window) : window_(window) {
    require(window >= 1, "hop window must be >= 1");
    resid_.assign(window, 0.0);
    phase_.assign(window, 0.0);
}

bool HopDetector::push(double phi_true, double phi_est) {
    const double r = phi_true - phi_est;
    resid_sum_ += r - resid_[pos_];
    phase_sum_ += phi_true - phase_[pos_];
    resid_[pos_] = r;
    phase_[pos_] = phi_true;
    pos_ = (pos_ + 1) % window_;
    if (filled_ < window_) ++filled_;
    if (filled_ < window_ || fired_) return false;
    const double inv = 1.0 / window_;
    if (std::abs(resid_sum_ * inv) > kPi || std::abs(phase_sum_ * inv) > kPi) {
        fired_ = true;
        return true;
    }
    return false;
}

namespace {

// Ridge-regularized linear predictor over the last `taps` frequency
// estimates, fit in Yule-Walker form on exponentially weighted
// autocovariances and refit every `refit_every` cycles.
class PredictorServo {
public:
    PredictorServo(int taps, double ridge, int refit_every)
        : taps_(taps), ridge_(ridge), refit_every_(refit_every), ac_(taps + 1, 0.0),
          ring_(taps, 0.0) {}

    double correction(double f_hat, uint64_t k) {
        // Update autocovariance statistics with the newest estimate.
        const double lambda = 1.0 - 1.0 / 8192.0;
        for (int l = 0; l <= taps_; ++l) {
            const double past = (l == 0) ? f_hat : value_back(l - 1);
            if (k >= static_cast<uint64_t>(l)) ac_[l] = lambda * ac_[l] + f_hat * past;
        }
        push_ring(f_hat);
        if (k >= static_cast<uint64_t>(2 * taps_) && (k % refit_every_) == 0) refit();
        if (beta_.size() == 0) return 0.0;  // warmup handled by the caller
        double pred = 0;
        for (int j = 0; j < taps_; ++j) pred += beta_(j) * value_back(j);
        return -pred;
    }

    bool ready() const { return beta_.size() != 0; }

private:
    double value_back(int j) const {  // j = 0 is the newest sample
        return ring_[(pos_ + taps_ - 1 - j) % taps_];
    }
    void push_ring(double v) {
        ring_[pos_] = v;
        pos_ = (pos_ + 1) % taps_;
    }
    void refit() {
        Eigen::MatrixXd r(taps_, taps_);
        for (int i = 0; i < taps_; ++i)
            for (int j = 0; j < taps_; ++j) r(i, j) = ac_[std::abs(i - j)];
        r.diagonal().array() += ridge_ * ac_[0];
        Eigen::VectorXd rhs(taps_);
        for (int j = 0; j < taps_; ++j) rhs(j) = ac_[j + 1];
        beta_ = r.ldlt().solve(rhs);
    }

    int taps_;
    double ridge_;
    int refit_every_;
    std::vector<double> ac_;
    std::vector<double> ring_;
    int pos_ = 0;
    Eigen::VectorXd beta_;
};

}  // namespace

ClockRunResult run_clock(const ClockConfig& cfg) {
    require(cfg.T > 0 && cfg.T_D >= 0, "T must be positive and T_D non-negative");
    require(cfg.n_cycles >= 2, "n_cycles must be >= 2");
    require(cfg.prior_width > 0, "prior width must be set (iterate_prior or power law)");
    require(cfg.noise.omega0 > 0, "noise spec must carry omega0");
    if (cfg.servo.kind == ServoConfig::Kind::Integrator)
        require(cfg.servo.gain > 0 && cfg.servo.gain < 2, "integrator gain must be in (0,2)");
    require(cfg.servo.history_len >= 1, "predictor history must be >= 1");

    const double t_c = cfg.T + cfg.T_D;
    const PriorModel prior = gaussian_prior_auto(cfg.prior_width, cfg.protocol.n_atoms);
    const ConditionalModel model = statistical_model(cfg.protocol, prior);
    const auto [table, report] = estimate(model, cfg.protocol.estimator);
    const ModelSampler sampler(cfg.protocol);
    const int n_out = sampler.n_out();

    NoiseEngine engine(cfg.noise, t_c, cfg.n_cycles, Rng::stream(cfg.seed, 0));
    Rng meas_rng = Rng::stream(cfg.seed, 1);

    StreamingAdev adev(t_c, log_spaced_multiples(std::max<uint64_t>(cfg.n_cycles / 3, 1), 5));
    HopDetector hops;
    PredictorServo predictor(cfg.servo.history_len, cfg.servo.ridge, cfg.servo.refit_every);

    ClockRunResult res;
    res.prior_width_used = cfg.prior_width;
    res.residual_phase.counts.assign(101, 0);
    long double s1 = 0, s2 = 0, s3 = 0, s4 = 0;

    std::vector<double> probs(n_out);
    double corr = 0;  // rad/s added to the LO
    for (uint64_t k = 0; k < cfg.n_cycles; ++k) {
        const double y_dead = (cfg.T_D > 0) ? engine.advance(cfg.T_D) : 0.0;
        const double y_int = engine.advance(cfg.T);
        const double omega_free = y_int * cfg.noise.omega0 + cfg.frequency_offset;
        const double phi = (omega_free + corr) * cfg.T;

        double phi_est;
        if (cfg.ideal_measurement) {
            phi_est = phi;
        } else {
            sampler.probs_at(phi, probs.data());
            const double u = meas_rng.uniform01();
            double cum = 0;
            int x = n_out - 1;
            for (int i = 0; i < n_out; ++i) {
                cum += probs[i];
                if (u < cum) {
                    x = i;
                    break;
                }
            }
            phi_est = table.values[x];
        }

        // Records of the true residual phase.
        {
            const double span = res.residual_phase.hi - res.residual_phase.lo;
            if (phi < res.residual_phase.lo)
                ++res.residual_phase.underflow;
            else if (phi >= res.residual_phase.hi)
                ++res.residual_phase.overflow;
            else
                ++res.residual_phase.counts[static_cast<std::size_t>(
                    (phi - res.residual_phase.lo) / span * 101.0)];
            s1 += phi;
            s2 += static_cast<long double>(phi) * phi;
            s3 += static_cast<long double>(phi) * phi * phi;
            s4 += static_cast<long double>(phi) * phi * phi * phi;
        }
        if (hops.push(phi, phi_est) && !res.fringe_hop) {
            res.fringe_hop = true;
            res.first_hop_cycle = k;
            if (cfg.stop_at_hop) {
                res.cycles_run = k + 1;
                break;
            }
        }

        const double y_free_cycle = (cfg.T_D * y_dead + cfg.T * y_int) / t_c +
                                    cfg.frequency_offset / cfg.noise.omega0;
        const double y_stab = y_free_cycle + corr / cfg.noise.omega0;
        adev.push(y_stab);
        if (cfg.record_trace) res.stabilized_trace.push_back(y_stab);

        // Servo (applied from the next cycle on).
        const double omega_est = phi_est / cfg.T;  // estimates omega_free + corr
        if (cfg.servo.kind == ServoConfig::Kind::Integrator) {
            corr -= cfg.servo.gain * omega_est;
        } else {
            const double f_hat = omega_est - corr;
            const double next = predictor.correction(f_hat, k);
            if (predictor.ready())
                corr = next;
            else
                corr -= 0.5 * omega_est;  // integrator warmup until the first fit
        }
        res.cycles_run = k + 1;
    }

    res.adev = adev.finish();
    const auto n = static_cast<long double>(res.cycles_run);
    const double mean = static_cast<double>(s1 / n);
    const double var = std::max(0.0, static_cast<double>(s2 / n) - mean * mean);
    res.measured_phase_std = std::sqrt(var);
    if (var > 0) {
        const double m3 = static_cast<double>(s3 / n) -
                          3 * mean * static_cast<double>(s2 / n) + 2 * mean * mean * mean;
        const double m4 = static_cast<double>(s4 / n) -
                          4 * mean * static_cast<double>(s3 / n) +
                          6 * mean * mean * static_cast<double>(s2 / n) -
                          3 * mean * mean * mean * mean;
        res.residual_skew = m3 / std::pow(var, 1.5);
        res.residual_excess_kurtosis = m4 / (var * var) - 3.0;
    }

    if (!res.fringe_hop) {
        const double lo = cfg.fit_lo_mult * t_c, hi = cfg.fit_hi_mult * t_c;
        bool in_range = false;
        int count = 0;
        for (double tau : res.adev.taus)
            if (tau >= lo && tau <= hi) ++count;
        in_range = count >= 4;
        if (in_range)
            res.extrapolated_sigma =
                extrapolate_unit_time(res.adev, lo, hi, &res.extrapolation_flagged);
    }
    return res;
}

std::vector<ClockRunResult> run_clock_ensemble(const ClockConfig& cfg, int n_runs,
                                               int threads) {
    std::vector<ClockRunResult> out(n_runs);
    parallel_for(n_runs, threads, [&](int i) {
        ClockConfig c = cfg;
        c.seed = derive_seed(cfg.seed, static_cast<uint64_t>(i));
        out[i] = run_clock(c);
    });
    return out;
}

double protocol_efm(const ProtocolSpec& spec, double delta_phi) {
    const PriorModel prior = gaussian_prior_auto(delta_phi, spec.n_atoms);
    const ConditionalModel model = statistical_model(spec, prior);
    return estimate(model, spec.estimator).second.efm;
}

double optimal_sss_mu(int n_atoms, double delta_phi, EstimatorKind est) {
    const auto objective = [&](double mu) {
        if (est == EstimatorKind::Linear)
            return analytic_efm(AnalyticKind::Sss, n_atoms, delta_phi, mu);
        return protocol_efm(ProtocolSpec::sss(n_atoms, mu, est), delta_phi);
    };
    // Coarse log-spaced scan, then golden refinement around the best cell.
    const double lo = 1e-3, hi = kPi;
    const int coarse = 28;
    double best_mu = lo, best = objective(lo);
    for (int i = 1; i < coarse; ++i) {
        const double mu = lo * std::pow(hi / lo, static_cast<double>(i) / (coarse - 1));
        const double v = objective(mu);
        if (v < best) {
            best = v;
            best_mu = mu;
        }
    }
    const double step = std::pow(hi / lo, 1.0 / (coarse - 1));
    return golden_min(objective, best_mu / step, std::min(best_mu * step, hi), 1e-6);
}

namespace {

int single_alpha_of(const NoiseSpec& noise) {
    int count = 0, alpha = 0;
    if (noise.h_white > 0) {
        ++count;
        alpha = -1;
    }
    if (noise.h_flicker > 0) {
        ++count;
        alpha = 0;
    }
    if (noise.h_rw > 0) {
        ++count;
        alpha = 1;
    }
    require(count == 1, "this operation needs a single-alpha noise spec");
    return alpha;
}

Eigen::VectorXd weighted_polyfit(const std::vector<double>& x, const std::vector<double>& y,
                                 const std::vector<double>& w, int degree) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd a(n, degree + 1);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        const double sw = std::sqrt(w[i]);
        double p = 1.0;
        for (int d = 0; d <= degree; ++d) {
            a(i, d) = sw * p;
            p *= x[i];
        }
        b(i) = sw * y[i];
    }
    return a.colPivHouseholderQr().solve(b);
}

double polyval(const Eigen::VectorXd& coeffs, double x) {
    double acc = 0;
    for (int d = static_cast<int>(coeffs.size()) - 1; d >= 0; --d) acc = acc * x + coeffs(d);
    return acc;
}

}  // namespace

double PriorCurve::width_at_stage(double T, int s) const {
    require(s >= 0 && s < static_cast<int>(stage_coeffs.size()), "stage out of range");
    const double x_min = std::log(t_over_z_grid.front());
    const double x = std::clamp(std::log(T / z), x_min, 0.0);
    return std::sqrt(std::exp(polyval(stage_coeffs[s], x)));
}

double PriorCurve::width(double T) const {
    return width_at_stage(T, static_cast<int>(stage_coeffs.size()) - 1);
}

PriorCurve iterate_prior(int n_atoms, const NoiseSpec& noise, std::span<const double> t_grid,
                         int stages, uint64_t seed, uint64_t cycles_per_run, int threads) {
    require(stages >= 1, "stages must be >= 1");
    require(t_grid.size() >= 8, "iterate_prior needs at least 8 interrogation times");
    const int alpha = single_alpha_of(noise);
    const double chi = NoiseExponent::of(alpha).chi;
    const double z = noise.coherence_time(0.0);

    PriorCurve curve;
    curve.alpha = alpha;
    curve.z = z;
    for (double t : t_grid) curve.t_over_z_grid.push_back(t / z);
    std::sort(curve.t_over_z_grid.begin(), curve.t_over_z_grid.end());

    // Stage 0 heuristic: log-log line between (delta phi)^2 = (T/Z)^{4/3} N^{-1/4}
    // at T/Z = 0.01 and the power-law value chi(alpha) at T/Z = 1.
    {
        const double x0 = std::log(0.01);
        const double v0 = std::log(std::pow(0.01, 4.0 / 3.0) * std::pow(n_atoms, -0.25));
        const double v1 = std::log(chi);
        const double slope = (v1 - v0) / (0.0 - x0);
        Eigen::VectorXd c(2);
        c << v1, slope;  // value at x=0 is v1
        curve.stage_coeffs.push_back(c);
    }

    const int nt = static_cast<int>(curve.t_over_z_grid.size());
    for (int s = 0; s < stages; ++s) {
        std::vector<double> widths(nt, 0.0);
        std::vector<uint8_t> hop(nt, 0);
        parallel_for(nt, threads, [&](int i) {
            const double t_over_z = curve.t_over_z_grid[i];
            const double dphi = curve.width_at_stage(t_over_z * z, s);
            ClockConfig cfg;
            cfg.protocol =
                (s == 0) ? ProtocolSpec::css(n_atoms, EstimatorKind::OptimalBayes)
                         : ProtocolSpec::sss(n_atoms,
                                             optimal_sss_mu(n_atoms, dphi,
                                                            EstimatorKind::OptimalBayes),
                                             EstimatorKind::OptimalBayes);
            cfg.noise = noise;
            cfg.T = t_over_z * z;
            cfg.n_cycles = cycles_per_run;
            cfg.prior_width = dphi;
            cfg.seed = derive_seed(seed, static_cast<uint64_t>(s) * 1000 + i);
            cfg.stop_at_hop = true;
            const ClockRunResult run = run_clock(cfg);
            widths[i] = run.measured_phase_std;
            hop[i] = run.fringe_hop ? 1 : 0;
        });
        curve.stage_widths.push_back(widths);
        curve.stage_hop_limited.push_back(hop);

        std::vector<double> xs, ys, ws;
        for (int i = 0; i < nt; ++i) {
            if (hop[i] || widths[i] <= 0) continue;
            xs.push_back(std::log(curve.t_over_z_grid[i]));
            ys.push_back(std::log(widths[i] * widths[i]));
            ws.push_back(1.0);
        }
        check_numeric(!xs.empty(), "prior calibration failed: every point is hop-limited");
        // Power-law anchor at T/Z = 1, weighted to pin the curve there.
        xs.push_back(0.0);
        ys.push_back(std::log(chi));
        ws.push_back(20.0);
        const int degree = std::min<int>(5, static_cast<int>(xs.size()) - 1);
        curve.stage_coeffs.push_back(weighted_polyfit(xs, ys, ws, degree));
    }
    return curve;
}

double measure_deadtime_width(const NoiseSpec& noise, double T_D, uint64_t n_cycles,
                              uint64_t seed) {
    require(T_D >= 0, "dead time must be non-negative");
    require(n_cycles >= 10000, "measure_deadtime_width needs >= 1e4 cycles");
    if (T_D == 0) return 0.0;
    // The free-running LO is synthesized at sub-cycle resolution so that the
    // cycle duration T_D sits in the interior of the flicker chain band (the
    // damped-random-walk superposition is flat only away from its edges).
    constexpr int kSub = 8;
    NoiseEngine engine(noise, T_D / kSub, n_cycles * kSub, Rng(seed));
    long double s1 = 0, s2 = 0;
    double prev = 0;
    for (uint64_t k = 0; k < n_cycles; ++k) {
        double y = 0;
        for (int j = 0; j < kSub; ++j) y += engine.advance(T_D / kSub);
        y /= kSub;
        if (k > 0) {
            const double phase = (y - prev) * noise.omega0 * T_D;
            s1 += phase;
            s2 += static_cast<long double>(phase) * phase;
        }
        prev = y;
    }
    const auto n = static_cast<long double>(n_cycles - 1);
    const double mean = static_cast<double>(s1 / n);
    return std::sqrt(std::max(0.0, static_cast<double>(s2 / n) - mean * mean));
}

namespace {

constexpr double kScanOmega0Z = 1e6;

double family_efm(ScanFamily family, int n_atoms, double delta_phi) {
    switch (family) {
        case ScanFamily::CssLinear:
            return analytic_efm(AnalyticKind::Css, n_atoms, delta_phi);
        case ScanFamily::SssLinear:
            return analytic_efm(AnalyticKind::Sss, n_atoms, delta_phi,
                                optimal_sss_mu(n_atoms, delta_phi, EstimatorKind::Linear));
        case ScanFamily::CssBayes:
            require(n_atoms <= 512, "CssBayes scan capped at N = 512");
            return protocol_efm(ProtocolSpec::css(n_atoms, EstimatorKind::OptimalBayes),
                                delta_phi);
        case ScanFamily::SssBayes: {
            require(n_atoms <= 128, "SssBayes scan capped at N = 128");
            const double mu = optimal_sss_mu(n_atoms, delta_phi, EstimatorKind::OptimalBayes);
            return protocol_efm(ProtocolSpec::sss(n_atoms, mu, EstimatorKind::OptimalBayes),
                                delta_phi);
        }
        case ScanFamily::Oqi: {
            if (n_atoms <= 64) {
                const PriorModel prior = gaussian_prior_auto(delta_phi, n_atoms);
                const double bound = oqi(n_atoms, prior).bound;
                const double var = prior.variance_on_grid();
                return efm_transform(std::min(bound, var), var);
            }
            // Asymptotic split; valid where the bound is far below the prior.
            return oqi_asymptotic(n_atoms, delta_phi);
        }
    }
    throw InvalidArgument("unknown scan family");
}

bool family_has_separable_ctl(ScanFamily f) {
    return f == ScanFamily::CssLinear || f == ScanFamily::SssLinear || f == ScanFamily::Oqi;
}

double family_ctl_efm(ScanFamily family, double delta_phi) {
    const double v = delta_phi * delta_phi;
    if (family == ScanFamily::Oqi) return ctl_oqi(delta_phi);
    return std::sinh(v) - v;  // CSS and SSS share this CTL with a linear estimator
}

}  // namespace

StabilityScanResult stability_scan(ScanFamily family, std::span<const int> n_list,
                                   std::span<const double> t_over_z_grid, double td_over_z,
                                   NoiseExponent alpha) {
    require(!n_list.empty() && t_over_z_grid.size() >= 3, "scan grids too small");
    require(td_over_z >= 0, "dead time ratio must be non-negative");
    StabilityScanResult res;
    res.family = family;
    res.td_over_z = td_over_z;
    res.alpha = alpha.alpha;

    const NoiseSpec spec = NoiseSpec::single_alpha(alpha.alpha, kScanOmega0Z, 1.0, td_over_z);
    const int nt = static_cast<int>(t_over_z_grid.size());

    std::vector<double> widths(nt), dick_dimless(nt);
    for (int i = 0; i < nt; ++i) {
        const double t = t_over_z_grid[i];
        require(t > 0, "T/Z grid must be positive");
        widths[i] = combine_widths(width_from_interrogation(t, 1.0, alpha),
                                   deadtime_width(td_over_z, 1.0, alpha));
        const double dvar = (td_over_z > 0)
                                ? dick_effect(spec, t, td_over_z, 1.0) * kScanOmega0Z *
                                      kScanOmega0Z
                                : 0.0;
        dick_dimless[i] = std::sqrt(dvar);
    }

    for (int n : n_list) {
        ScanPerN per;
        per.n_atoms = n;
        int argmin = 0;
        for (int i = 0; i < nt; ++i) {
            ScanCurvePoint p;
            p.t_over_z = t_over_z_grid[i];
            p.sigma_qpn_ctl =
                adev_dimensionless(family_efm(family, n, widths[i]), p.t_over_z, td_over_z);
            p.sigma_dick = dick_dimless[i];
            p.sigma_tot = total_adev(p.sigma_qpn_ctl * p.sigma_qpn_ctl,
                                     p.sigma_dick * p.sigma_dick);
            per.curve.push_back(p);
            if (p.sigma_tot < per.curve[argmin].sigma_tot) argmin = i;
        }
        require(argmin != 0 && argmin != nt - 1,
                "T grid too coarse: the stability minimum sits on the grid boundary");
        per.sigma_min = per.curve[argmin].sigma_tot;
        per.t_min = per.curve[argmin].t_over_z;
        res.per_n.push_back(std::move(per));
    }

    if (td_over_z > 0 && family_has_separable_ctl(family)) {
        int argmin = -1;
        double best = 0;
        std::vector<double> ctl_tot(nt);
        for (int i = 0; i < nt; ++i) {
            const double s_ctl = adev_dimensionless(family_ctl_efm(family, widths[i]),
                                                    t_over_z_grid[i], td_over_z);
            ctl_tot[i] = total_adev(s_ctl * s_ctl, dick_dimless[i] * dick_dimless[i]);
            if (argmin < 0 || ctl_tot[i] < best) {
                argmin = i;
                best = ctl_tot[i];
            }
        }
        require(argmin != 0 && argmin != nt - 1,
                "T grid too coarse: sigma_lim sits on the grid boundary");
        res.sigma_lim_defined = true;
        res.sigma_lim = best;
        res.t_lim = t_over_z_grid[argmin];

        // Critical ensemble size: smallest N whose QPN+CTL stability at T_lim
        // reaches sigma_lim within 1%.
        const double dphi_lim = widths[argmin];
        const auto sigma_at = [&](long n) {
            return adev_dimensionless(family_efm(family, static_cast<int>(n), dphi_lim),
                                      res.t_lim, td_over_z);
        };
        const double target = 1.01 * res.sigma_lim;
        const bool sss = family == ScanFamily::SssLinear || family == ScanFamily::SssBayes;
        long lo = sss ? 2 : 1, hi = lo;
        const long cap = (family == ScanFamily::CssLinear || family == ScanFamily::SssLinear ||
                          family == ScanFamily::Oqi)
                             ? 100000000L
                             : 128L;
        while (hi < cap && sigma_at(hi) > target) hi *= 2;
        if (sigma_at(hi) <= target) {
            while (lo < hi) {
                const long mid = lo + (hi - lo) / 2;
                if (sigma_at(mid) <= target)
                    hi = mid;
                else
                    lo = mid + 1;
            }
            res.n_crit = lo;
        }
    }
    return res;
}

}  // namespace clockforge
