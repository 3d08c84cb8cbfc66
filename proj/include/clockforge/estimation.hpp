#pragma once

#include <utility>
#include <vector>

#include "clockforge/protocol.hpp"

namespace clockforge {

struct EstimatorTable {
    EstimatorKind kind = EstimatorKind::Linear;
    double scale = 0;             // linear scaling factor a (Linear kind only)
    std::vector<double> values;   // phi_est per outcome index
};

struct ErrorReport {
    double bmse = 0;       // (Delta phi)^2
    double prior_var = 0;  // (delta phi)^2 on the grid
    double efm = 0;        // (Delta phi_M)^2, +inf when bmse == prior_var
    int n_nodes = 0;       // quadrature metadata, kept so comparisons share grids
    double truncation = 0;
};

std::pair<EstimatorTable, ErrorReport> linear_estimate(const ConditionalModel& model);
std::pair<EstimatorTable, ErrorReport> optimal_bayes_estimate(const ConditionalModel& model);
std::pair<EstimatorTable, ErrorReport> estimate(const ConditionalModel& model,
                                                EstimatorKind kind);

// Bayesian Cramer-Rao bound 1/(Fbar + I): averaged Fisher information plus the
// prior information. Uses the model's analytic derivative columns when
// present, otherwise 5-point finite differences on the (non-uniform) grid.
double bcrb(const ConditionalModel& model);

// (1/bmse - 1/prior_var)^{-1}; +inf at bmse == prior_var.
double efm_transform(double bmse, double prior_var);

// Lean objective path for optimizers and scans: evaluates the BMSE of the
// protocol under the given estimator without building derivative columns.
// Identical (to rounding) to estimate(statistical_model(...), kind).bmse.
double bmse_objective(const ProtocolSpec& spec, const PriorModel& prior, EstimatorKind kind);

}  // namespace clockforge
