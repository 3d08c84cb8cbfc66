#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clockforge/estimation.hpp"
#include "clockforge/protocol.hpp"

namespace clockforge {

struct OptimizationTask {
    int n_atoms = 2;
    int n_layers = 1;
    int m_layers = 1;
    PriorModel prior;
    EstimatorKind objective = EstimatorKind::OptimalBayes;
    uint64_t budget = 0;  // total objective evaluations; 0 = population * 200
    uint64_t seed = 1;
    double mu_lo = -2 * kPi;  // twist-strength box (covers the 4 pi period)
    double mu_hi = 2 * kPi;
    // Warm-start members injected into the initial population (e.g. the best
    // lower-class protocol embedded with an extra zero twist).
    std::vector<std::vector<double>> warm_starts;
};

struct Candidate {
    ProtocolSpec spec;
    double objective = 0;  // BMSE under the task estimator
    std::string region;    // twist-plane region label ("" outside [1,1]-like classes)
};

struct CandidateSet {
    std::vector<Candidate> items;  // ascending objective
    uint64_t evaluations = 0;
    bool budget_exhausted = false;  // stopped before the population settled
    int population = 0;
    double de_weight = 0.7;
    double de_crossover = 0.9;
    uint64_t seed = 0;
    std::vector<double> best_per_generation;  // monotone non-increasing
};

// Differential evolution (rand/1/bin, population 15 D, F = 0.7, CR = 0.9)
// over the variational parameters, with compass-search polish of the best
// candidates. Deterministic in the seed.
CandidateSet optimize_protocol(const OptimizationTask& task);

// Objective landscape over the (mu_1, mu_2) plane of the [1,1] class;
// remaining rotation parameters locally optimized per grid cell with
// neighbour warm starts. Returns per-region minima.
CandidateSet landscape_scan(int n_atoms, const PriorModel& prior, int grid_resolution,
                            EstimatorKind objective, uint64_t seed, int threads = 2);

// Twist-plane region convention: sign quadrants I-IV inside |mu| <= pi,
// V: |mu1| > pi, VI: mu2 > pi, VII: mu2 < -pi (VI/VII equivalent by the
// conjugation symmetry).
std::string region_label(double mu1, double mu2);

// Mirrored parameter vector of the conjugation symmetry: all twist strengths
// and azimuthal angles flip sign; the objective is invariant.
std::vector<double> mirrored_params(const ProtocolSpec& spec);

double evaluate_objective(int n_atoms, int n_layers, int m_layers,
                          const std::vector<double>& params, const PriorModel& prior,
                          EstimatorKind objective);

// Compass-search polish of a parameter vector with (mu_1, mu_2) optionally
// frozen; returns the polished objective.
double polish_candidate(int n_atoms, int n_layers, int m_layers, std::vector<double>& params,
                        const PriorModel& prior, EstimatorKind objective,
                        bool freeze_twists = false, double tol = 1e-10);

}  // namespace clockforge
