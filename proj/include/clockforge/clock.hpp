#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "clockforge/estimation.hpp"
#include "clockforge/noise.hpp"
#include "clockforge/protocol.hpp"

namespace clockforge {

struct ServoConfig {
    enum class Kind { Integrator, LinearPredictor };
    Kind kind = Kind::LinearPredictor;
    double gain = 0.5;       // integrator
    int history_len = 50;    // predictor taps
    double ridge = 1e-6;     // relative ridge on the Toeplitz normal matrix
    int refit_every = 1000;  // cycles between predictor refits
};

struct ClockConfig {
    ProtocolSpec protocol;
    NoiseSpec noise;
    double T = 0.1;
    double T_D = 0.0;
    uint64_t n_cycles = 1000000;
    uint64_t seed = 1;
    ServoConfig servo;
    double prior_width = 0.1;      // from iterate_prior or the power law
    double frequency_offset = 0;   // rad/s, added to the free-running LO
    double fit_lo_mult = 100;      // extrapolation fit range, multiples of T_C
    double fit_hi_mult = 10000;
    bool stop_at_hop = false;
    bool ideal_measurement = false;  // diagnostics: phi_est = phi (servo tests)
    bool record_trace = false;       // keep the stabilized y_k trace in the result
};

struct PhaseHistogram {
    double lo = -kPi, hi = kPi;
    std::vector<uint64_t> counts;
    uint64_t underflow = 0, overflow = 0;
};

struct ClockRunResult {
    AdevCurve adev;
    bool fringe_hop = false;
    uint64_t first_hop_cycle = 0;
    PhaseHistogram residual_phase;
    double extrapolated_sigma = 0;  // sigma at tau = 1 s equivalent (invalid after a hop)
    bool extrapolation_flagged = false;
    double prior_width_used = 0;
    double measured_phase_std = 0;  // spread of the true residual phase
    double residual_skew = 0;
    double residual_excess_kurtosis = 0;
    uint64_t cycles_run = 0;
    std::vector<double> stabilized_trace;  // filled only when record_trace is set
};

ClockRunResult run_clock(const ClockConfig& cfg);

// Independent runs with per-run seeds derived from cfg.seed; deterministic
// regardless of thread count.
std::vector<ClockRunResult> run_clock_ensemble(const ClockConfig& cfg, int n_runs,
                                               int threads);

// Rolling 200-cycle windows over the residual record; fires when the running
// mean of (phi_true - phi_est) or of phi_true exceeds pi in magnitude.
class HopDetector {
public:
    explicit HopDetector(int window = 200);
    bool push(double phi_true, double phi_est);  // true the first time it fires
    bool fired() const { return fired_; }

private:
    int window_;
    std::vector<double> resid_, phase_;
    int pos_ = 0;
    int filled_ = 0;
    double resid_sum_ = 0, phase_sum_ = 0;
    bool fired_ = false;
};

// Iteratively calibrated prior width delta_phi(T); stage 0 is the log-log
// heuristic, refinement stages fit fifth-order log-log polynomials to the
// recorded end-of-dark-time phase spreads and re-simulate with SSS.
struct PriorCurve {
    int alpha = 0;
    double z = 1.0;
    std::vector<double> t_over_z_grid;
    std::vector<Eigen::VectorXd> stage_coeffs;            // log(dphi^2) vs log(T/Z)
    std::vector<std::vector<double>> stage_widths;        // measured widths per stage
    std::vector<std::vector<uint8_t>> stage_hop_limited;  // points excluded from fits

    int stages() const { return static_cast<int>(stage_coeffs.size()) - 1; }
    double width(double T) const;                 // final stage
    double width_at_stage(double T, int s) const;
};

PriorCurve iterate_prior(int n_atoms, const NoiseSpec& noise, std::span<const double> t_grid,
                         int stages, uint64_t seed, uint64_t cycles_per_run = 100000,
                         int threads = 1);

// Free-running LO at cycle duration T_D; width of the phase increments
// (omega_k - omega_{k-1}) T_D. Validates the dead-time prior power law.
double measure_deadtime_width(const NoiseSpec& noise, double T_D, uint64_t n_cycles,
                              uint64_t seed);

enum class ScanFamily { CssLinear, SssLinear, CssBayes, SssBayes, Oqi };

struct ScanCurvePoint {
    double t_over_z = 0;
    double sigma_qpn_ctl = 0;  // dimensionless sigma * omega0 * sqrt(tau Z)
    double sigma_dick = 0;
    double sigma_tot = 0;
};

struct ScanPerN {
    int n_atoms = 0;
    double sigma_min = 0;
    double t_min = 0;
    std::vector<ScanCurvePoint> curve;
};

struct StabilityScanResult {
    ScanFamily family;
    double td_over_z = 0;
    int alpha = 0;
    std::vector<ScanPerN> per_n;
    bool sigma_lim_defined = false;  // requires T_D > 0 and a separable CTL
    double sigma_lim = 0;
    double t_lim = 0;
    long n_crit = -1;
};

// Theory-mode scan (analytic/quadrature efm plus the Dick term; no Monte
// Carlo). All outputs dimensionless.
StabilityScanResult stability_scan(ScanFamily family, std::span<const int> n_list,
                                   std::span<const double> t_over_z_grid, double td_over_z,
                                   NoiseExponent alpha);

// Optimal SSS twisting strength at a given prior width (minimizes the efm of
// the matched estimator; golden-section on mu).
double optimal_sss_mu(int n_atoms, double delta_phi, EstimatorKind est);

// Quadrature efm of the named standard protocol at a prior width.
double protocol_efm(const ProtocolSpec& spec, double delta_phi);

}  // namespace clockforge
