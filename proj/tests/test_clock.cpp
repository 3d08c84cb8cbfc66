#include <doctest.h>

#include <cmath>
#include <cstring>

#include "clockforge/bounds.hpp"
#include "clockforge/clock.hpp"

using namespace clockforge;

namespace {

ClockConfig base_config(int n_atoms, double t_over_z, uint64_t cycles, uint64_t seed) {
    ClockConfig cfg;
    cfg.protocol = ProtocolSpec::css(n_atoms, EstimatorKind::OptimalBayes);
    cfg.noise = NoiseSpec::single_alpha(0, 1e6);
    cfg.T = t_over_z;  // Z = 1 in the dimensionless setup
    cfg.n_cycles = cycles;
    cfg.seed = seed;
    cfg.prior_width = width_from_interrogation(t_over_z, 1.0, NoiseExponent::of(0));
    return cfg;
}

}  // namespace

TEST_CASE("integrator pulls out a constant frequency offset") {
    ClockConfig cfg = base_config(4, 0.1, 200, 3);
    cfg.noise.h_flicker = 0;  // zero noise; only the injected offset remains
    cfg.servo.kind = ServoConfig::Kind::Integrator;
    cfg.servo.gain = 0.5;
    cfg.frequency_offset = 0.1 / cfg.T;
    cfg.ideal_measurement = true;  // diagnostics mode: servo dynamics in isolation
    cfg.record_trace = true;
    const ClockRunResult res = run_clock(cfg);
    REQUIRE(res.stabilized_trace.size() == 200);
    const double y0 = std::abs(res.stabilized_trace.front());
    double worst_tail = 0;
    for (std::size_t k = 100; k < 200; ++k)
        worst_tail = std::max(worst_tail, std::abs(res.stabilized_trace[k]));
    CHECK(worst_tail < 1e-3 * y0);
    CHECK_FALSE(res.fringe_hop);
}

TEST_CASE("hop detector") {
    SUBCASE("constant 2 pi offset bypassing the estimator fires within one window") {
        HopDetector det(200);
        bool fired = false;
        for (int k = 0; k < 200 && !fired; ++k) fired = det.push(2 * kPi, 0.0);
        CHECK(fired);
    }
    SUBCASE("locked residuals never fire") {
        HopDetector det(200);
        for (int k = 0; k < 100000; ++k) CHECK_FALSE(det.push(0.01 * std::sin(0.1 * k), 0.0));
    }
}

TEST_CASE("noiseless locked loop never flags a hop") {
    ClockConfig cfg = base_config(4, 0.1, 100000, 5);
    cfg.noise.h_flicker = 0;
    cfg.frequency_offset = 0.05 / cfg.T;
    cfg.servo.kind = ServoConfig::Kind::Integrator;
    cfg.ideal_measurement = true;
    const ClockRunResult res = run_clock(cfg);
    CHECK_FALSE(res.fringe_hop);
}

TEST_CASE("run_clock is bit-reproducible in the config") {
    const ClockConfig cfg = base_config(6, 0.1, 20000, 11);
    const ClockRunResult a = run_clock(cfg);
    const ClockRunResult b = run_clock(cfg);
    REQUIRE(a.adev.sigmas.size() == b.adev.sigmas.size());
    CHECK(std::memcmp(a.adev.sigmas.data(), b.adev.sigmas.data(),
                      a.adev.sigmas.size() * sizeof(double)) == 0);
    CHECK(a.extrapolated_sigma == b.extrapolated_sigma);
    CHECK(a.measured_phase_std == b.measured_phase_std);
}

TEST_CASE("ensemble seeds are independent but deterministic") {
    const ClockConfig cfg = base_config(6, 0.1, 5000, 13);
    const auto runs_a = run_clock_ensemble(cfg, 3, 2);
    const auto runs_b = run_clock_ensemble(cfg, 3, 1);
    for (int i = 0; i < 3; ++i)
        CHECK(runs_a[i].measured_phase_std == runs_b[i].measured_phase_std);
    CHECK(runs_a[0].measured_phase_std != runs_a[1].measured_phase_std);
}

TEST_CASE("locked CSS loop matches theory at moderate interrogation time") {
    // Quick version of the closed-loop acceptance check: one run, reduced
    // cycles, generous tolerance.
    ClockConfig cfg = base_config(8, 0.1, 300000, 17);
    cfg.fit_lo_mult = 50;
    cfg.fit_hi_mult = 3000;
    const ClockRunResult res = run_clock(cfg);
    REQUIRE_FALSE(res.fringe_hop);
    CHECK_FALSE(res.extrapolation_flagged);

    const double efm = protocol_efm(cfg.protocol, res.measured_phase_std);
    const double theory = adev_dimensionless(efm, cfg.T, 0.0);
    const double sim = res.extrapolated_sigma * cfg.noise.omega0;  // Z = 1
    CHECK(sim == doctest::Approx(theory).epsilon(0.2));

    // Residual phases of the locked loop look Gaussian.
    CHECK(std::abs(res.residual_skew) < 0.2);
    CHECK(std::abs(res.residual_excess_kurtosis) < 0.5);

    // The prior width the loop realizes is in the neighbourhood of the
    // power-law heuristic.
    CHECK(res.measured_phase_std == doctest::Approx(cfg.prior_width).epsilon(0.4));
}

TEST_CASE("stabilized ADEV slope is -1/2 in the white-residual regime") {
    ClockConfig cfg = base_config(8, 0.1, 200000, 19);
    const ClockRunResult res = run_clock(cfg);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < res.adev.taus.size(); ++i) {
        const double m = res.adev.taus[i] / cfg.T;
        if (m < 100 || m > 10000) continue;
        const double x = std::log(res.adev.taus[i]);
        const double y = std::log(res.adev.sigmas[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    REQUIRE(n >= 4);
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("iterate_prior") {
    SUBCASE("stage-0 heuristic anchors") {
        const NoiseSpec noise = NoiseSpec::single_alpha(0, 1e6);
        std::vector<double> grid;
        for (int i = 0; i < 9; ++i) grid.push_back(0.01 * std::pow(100.0, i / 8.0));
        const PriorCurve curve = iterate_prior(8, noise, grid, 1, 21, 20000, 2);
        const double w0 = curve.width_at_stage(0.01, 0);
        CHECK(w0 * w0 == doctest::Approx(1.28107e-3).epsilon(1e-4));
        const double w1 = curve.width_at_stage(1.0, 0);
        CHECK(w1 * w1 == doctest::Approx(1.7).epsilon(1e-10));
    }
    SUBCASE("stages converge and the anchor holds") {
        const NoiseSpec noise = NoiseSpec::single_alpha(0, 1e6);
        std::vector<double> grid;
        for (int i = 0; i < 10; ++i) grid.push_back(0.02 * std::pow(25.0, i / 9.0));
        const PriorCurve curve = iterate_prior(8, noise, grid, 4, 23, 30000, 2);
        CHECK(curve.width(1.0) * curve.width(1.0) == doctest::Approx(1.7).epsilon(0.05));
        double rms = 0;
        int count = 0;
        for (double t : curve.t_over_z_grid) {
            const double a = curve.width_at_stage(t, 3);
            const double b = curve.width_at_stage(t, 4);
            rms += (a / b - 1.0) * (a / b - 1.0);
            ++count;
        }
        rms = std::sqrt(rms / count);
        CHECK(rms < 0.03);
    }
}

TEST_CASE("dead-time width measurement") {
    const NoiseSpec fl = NoiseSpec::single_alpha(0, 1e6);
    CHECK(measure_deadtime_width(fl, 0.0, 100000, 1) == 0.0);

    SUBCASE("flicker decade sweep matches 2 (T_D/Z)^2 within 15%") {
        for (const double td : {0.03, 0.1, 0.3}) {
            const double w = measure_deadtime_width(fl, td, 200000, 31);
            CHECK(w * w == doctest::Approx(2.0 * td * td).epsilon(0.15));
        }
    }
    SUBCASE("white noise exponent 2 + alpha = 1") {
        const NoiseSpec wh = NoiseSpec::single_alpha(-1, 1e6);
        std::vector<double> lt, lw;
        for (const double td : {0.02, 0.08, 0.32}) {
            const double w = measure_deadtime_width(wh, td, 200000, 37);
            lt.push_back(std::log(td));
            lw.push_back(std::log(w * w));
        }
        const double slope = (lw.back() - lw.front()) / (lt.back() - lt.front());
        CHECK(slope == doctest::Approx(1.0).epsilon(0.1));
    }
}

TEST_CASE("stability scan") {
    std::vector<int> n_list = {4, 8, 16, 32, 64, 128};
    std::vector<double> grid;
    for (int i = 0; i < 40; ++i) grid.push_back(0.02 * std::pow(60.0, i / 39.0));

    SUBCASE("no dead time leaves sigma_lim undefined") {
        const StabilityScanResult res =
            stability_scan(ScanFamily::CssLinear, n_list, grid, 0.0, NoiseExponent::of(0));
        CHECK_FALSE(res.sigma_lim_defined);
        CHECK(res.per_n.size() == n_list.size());
    }
    SUBCASE("CSS and SSS share the linear-estimator floor") {
        const StabilityScanResult css =
            stability_scan(ScanFamily::CssLinear, n_list, grid, 0.1, NoiseExponent::of(0));
        const StabilityScanResult sss =
            stability_scan(ScanFamily::SssLinear, n_list, grid, 0.1, NoiseExponent::of(0));
        REQUIRE(css.sigma_lim_defined);
        REQUIRE(sss.sigma_lim_defined);
        CHECK(css.sigma_lim == doctest::Approx(sss.sigma_lim).epsilon(1e-6));
        CHECK(css.t_lim == sss.t_lim);
        CHECK(css.n_crit > 0);
        CHECK(sss.n_crit > 0);
        CHECK(sss.n_crit < css.n_crit);  // squeezing reaches the floor earlier

        double prev = 1e300;
        for (const ScanPerN& per : css.per_n) {
            CHECK(per.sigma_min <= prev + 1e-12);
            prev = per.sigma_min;
            CHECK(per.sigma_min >= css.sigma_lim - 1e-12);
        }
    }
    SUBCASE("minimum on the grid boundary raises a range error") {
        std::vector<double> bad = {0.5, 0.7, 0.9, 1.1};
        CHECK_THROWS_AS(
            stability_scan(ScanFamily::CssLinear, n_list, bad, 0.0, NoiseExponent::of(0)),
            InvalidArgument);
    }
}

TEST_CASE("optimal SSS twisting improves on the CSS") {
    const double dphi = 0.3;
    const double mu = optimal_sss_mu(16, dphi, EstimatorKind::Linear);
    CHECK(analytic_efm(AnalyticKind::Sss, 16, dphi, mu) <
          analytic_efm(AnalyticKind::Css, 16, dphi));
    const double mu_b = optimal_sss_mu(8, dphi, EstimatorKind::OptimalBayes);
    CHECK(protocol_efm(ProtocolSpec::sss(8, mu_b, EstimatorKind::OptimalBayes), dphi) <
          protocol_efm(ProtocolSpec::css(8, EstimatorKind::OptimalBayes), dphi));
}
