#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "clockforge/common.hpp"
#include "clockforge/rng.hpp"

namespace clockforge {

// Local-oscillator noise: Allan-variance power-law coefficients
// sigma^2_{y,LO}(tau) = h_white/tau + h_flicker + h_rw * tau, plus the
// transition frequency. PSD coefficients follow from the standard two-sample
// variance table (see psd()).
struct NoiseSpec {
    double h_white = 0;    // alpha = -1
    double h_flicker = 0;  // alpha =  0
    double h_rw = 0;       // alpha = +1
    double omega0 = 0;     // rad/s

    double sigma_lo(double tau) const;
    double psd(double f) const;  // S_y(f)
    double coherence_time(double T_D = 0.0) const;
    bool any_component() const { return h_white > 0 || h_flicker > 0 || h_rw > 0; }

    // Single-alpha spec normalized so that sigma_lo(Z + T_D) * omega0 * Z = 1
    // with the given coherence time Z and dimensionless product omega0 * Z.
    static NoiseSpec single_alpha(int alpha, double omega0_times_z, double z = 1.0,
                                  double t_dead = 0.0);
};

struct AdevCurve {
    std::vector<double> taus;
    std::vector<double> sigmas;
    std::vector<double> stderrs;
};

// Segment-resolved trace generator. White and random-walk components produce
// exact segment averages (Brownian-bridge average for the random walk), the
// flicker component is a sum of damped random walks (AR(1) chains) with
// OU-exact decay per segment, rates log-spaced at 2 per decade across the
// simulated band and amplitudes calibrated against the closed-form AR(1)
// Allan-variance sum.
class NoiseEngine {
public:
    NoiseEngine(const NoiseSpec& spec, double t_cycle, uint64_t n_cycles_hint, Rng rng);

    // Average fractional frequency deviation over the next segment.
    double advance(double dt);

    int flicker_chain_count() const { return static_cast<int>(chain_rate_.size()); }

    // Closed-form Allan variance of the calibrated flicker chain sum at
    // tau = m * t_cycle (theory used for calibration; exposed for tests).
    double flicker_theory_avar(int m) const;

private:
    void prepare_segment(double dt);

    NoiseSpec spec_;
    Rng rng_;
    double t_cycle_ = 0;
    double rw_diffusion_ = 0;  // D with Var[y_rw(t)] = D t
    double rw_level_ = 0;
    std::vector<double> chain_rate_;  // OU rates gamma_i
    std::vector<double> chain_var_;   // stationary variances
    std::vector<double> chain_x_;
    std::vector<double> seg_decay_, seg_amp_, noise_buf_;
    double cached_dt_ = -1;
};

// Per-cycle fractional frequency deviations y_k (cycle averages), bit
// reproducible in (spec, T_C, n_cycles, seed).
std::vector<double> generate_trace(const NoiseSpec& spec, double t_cycle, uint64_t n_cycles,
                                   uint64_t seed);

// Non-overlapping two-sample deviation; taus must be integer multiples of
// t_cycle with at least 3 segments each.
AdevCurve allan_deviation(std::span<const double> trace, double t_cycle,
                          std::span<const double> taus);

// Streaming non-overlapping ADEV at fixed multiples (no trace storage).
class StreamingAdev {
public:
    StreamingAdev(double t_cycle, std::vector<uint64_t> multiples);
    void push(double y);
    AdevCurve finish() const;

private:
    struct Slot {
        uint64_t m = 1;
        double block_sum = 0;
        uint64_t in_block = 0;
        double prev_mean = 0;
        bool has_prev = false;
        double diff2 = 0;
        uint64_t pairs = 0;
    };
    double t_cycle_;
    std::vector<Slot> slots_;
};

std::vector<uint64_t> log_spaced_multiples(uint64_t max_m, int per_decade = 5);

// Dick-effect Allan variance sigma^2(tau) from the LO spectral density.
double dick_effect(const NoiseSpec& spec, double T, double T_D, double tau,
                   long k_max = 1000000);

// sqrt(sigma^2_{QPN+CTL} + sigma^2_Dick)
double total_adev(double qpn_ctl_var, double dick_var);

// sigma_y(tau) = (1/omega0) (DeltaPhi_M / T) sqrt(T_C / tau)
double adev_from_efm(double efm, double T, double T_D, double tau, double omega0);

// Dimensionless form sigma * omega0 * sqrt(tau Z): algebraically identical,
// used for figure-style outputs.
double adev_dimensionless(double efm, double t_over_z, double td_over_z);

// Least-squares fit of sigma*sqrt(tau) = const over [tau_lo, tau_hi]; flags
// the result when the log-log slope deviates from -1/2 by more than 0.1.
double extrapolate_unit_time(const AdevCurve& curve, double tau_lo, double tau_hi,
                             bool* flagged = nullptr);

}  // namespace clockforge
