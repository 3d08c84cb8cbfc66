#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "clockforge/prior.hpp"
#include "clockforge/spin.hpp"

namespace clockforge {

// Prior-averaged state rho_bar = sum_q w_q R_z(phi_q) rho R_z^dag(phi_q) and
// its first-moment companion rho_bar' = sum_q w_q phi_q R_z(phi_q) rho R_z^dag.
struct AveragedState {
    DensityOp rho_bar;
    Eigen::MatrixXcd rho_bar_prime;
};

AveragedState averaged_state(const StateVector& state, const PriorModel& prior);

// Measurement-and-estimator-optimized bound for a fixed probe state, via the
// Lyapunov-type solve rho_bar' = (L rho_bar + rho_bar L)/2 in the eigenbasis
// of rho_bar: returns prior_var - Tr(rho_bar L^2).
double bqcrb(const StateVector& state, const PriorModel& prior);

// Independent route: prior_var * (1 - prior_var * F_Q[rho_bar]) with the QFI
// from the SLD of rho_bar w.r.t. the generator S_z.
double bqcrb_via_qfi(const StateVector& state, const PriorModel& prior);

struct OqiResult {
    double bound = 0;
    StateVector optimal_state;
    Eigen::MatrixXcd l_operator;
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;  // bound after each iteration
};

// Ultimate bound: alternating optimization of probe state and measurement.
OqiResult oqi(int n_atoms, const PriorModel& prior, double tol = 1e-9, int max_iter = 500,
              int n_cap = 64);

// Coherence-time-limit term of the OQI, main-fringe form and the general
// error-function sum truncated at k_max.
double ctl_oqi(double delta_phi);
double ctl_oqi_sum(double delta_phi, int k_max);

// pi^2/N^2 + CTL (asymptotic OQI).
double oqi_asymptotic(int n_atoms, double delta_phi);

// Fixed phase-operator measurement; alternates the optimal-Bayes estimator
// and the probe-state update. Starts from |s=0> unless given.
OqiResult poi_optimal(int n_atoms, const PriorModel& prior, double tol = 1e-9,
                      int max_iter = 500,
                      const std::optional<StateVector>& initial = std::nullopt);

}  // namespace clockforge
