#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "clockforge/prior.hpp"
#include "clockforge/spin.hpp"

namespace clockforge {

enum class EstimatorKind { Linear, OptimalBayes };

// A complete Ramsey interrogation: probe preparation, encoding axis,
// measurement side, and the estimator used on the outcomes.
struct ProtocolSpec {
    enum class Kind { Css, Sss, Ghz, Variational, Poi };

    Kind kind = Kind::Css;
    int n_atoms = 2;
    EstimatorKind estimator = EstimatorKind::OptimalBayes;

    // SSS: twisting strength and alignment rotation about x (NaN = auto-align
    // to the minimal S_y variance).
    double sss_mu = 0.0;
    double sss_theta = std::numeric_limits<double>::quiet_NaN();

    // GHZ: parity outcomes (+/-1) instead of projective M outcomes.
    bool ghz_parity = false;

    // Variational [n, m] circuit. Parameter order:
    //   [mu_1 .. mu_{n+m},
    //    (theta, phi) twist axes for j = 2 .. n+m   (first axis fixed to z),
    //    n-rotation (theta, phi), m-rotation (theta, phi)]
    int var_n = 0, var_m = 0;
    std::vector<double> var_params;

    // POI: optional explicit probe amplitudes (defaults to the sine state).
    std::vector<complexd> poi_state;

    static int variational_param_count(int n, int m);

    static ProtocolSpec css(int n_atoms, EstimatorKind est = EstimatorKind::Linear);
    static ProtocolSpec sss(int n_atoms, double mu,
                            EstimatorKind est = EstimatorKind::Linear);
    static ProtocolSpec ghz(int n_atoms, bool parity = false);
    static ProtocolSpec variational(int n_atoms, int n, int m, std::vector<double> params,
                                    EstimatorKind est = EstimatorKind::OptimalBayes);
    static ProtocolSpec poi(int n_atoms);

    void validate() const;
};

// Discretized statistical model P(x | phi_q) over the prior grid. Columns are
// normalized; dprobs holds the analytic d/dphi columns for models built here.
struct ConditionalModel {
    std::vector<double> outcomes;
    PriorModel prior;
    Eigen::MatrixXd probs;
    Eigen::MatrixXd dprobs;

    bool has_derivatives() const { return dprobs.size() != 0; }
};

struct SpinMoments {
    double ex_sx = 0;
    double ex_sx2 = 0;
    double ex_sy2 = 0;
    double wineland_xi = 1;
    double theta = 0;  // alignment rotation about x
};

StateVector prepare_state(const ProtocolSpec& spec);

// Measurement unitary U_meas for projective kinds; outcome x = M is read in
// the Dicke basis after applying it.
Eigen::MatrixXcd measurement_unitary(const ProtocolSpec& spec, const GateEngine& eng);

ConditionalModel statistical_model(const ProtocolSpec& spec, const PriorModel& prior);

SpinMoments sss_moments(int n_atoms, double mu);

enum class AnalyticKind { Css, Sss, Ghz };
double analytic_efm(AnalyticKind kind, int n_atoms, double delta_phi, double sss_mu = 0.0);

struct PhaseOperatorData {
    std::vector<double> eigenvalues;     // phi_s = 2 pi s / (N+1)
    Eigen::MatrixXcd eigenvectors;       // columns |s>
    StateVector sine_state;
};
PhaseOperatorData phase_operator(int n_atoms);

// Flat key-value serialization; doubles round-trip bit-exactly.
std::string protocol_to_json(const ProtocolSpec& spec);
ProtocolSpec protocol_from_json(const std::string& text);

// Precompiled exact sampler: evaluates the model column P(x|phi) at arbitrary
// phi through the phase-profile kernels (used per cycle in the clock loop).
class ModelSampler {
public:
    explicit ModelSampler(const ProtocolSpec& spec);

    int n_out() const { return n_out_; }
    const std::vector<double>& outcomes() const { return outcomes_; }
    void probs_at(double phi, double* out) const;

private:
    int n_out_ = 0;
    int dim_ = 0;
    double m0_ = 0;
    bool parity_ = false;
    int parity_sign_ = 1;  // (-1)^N
    int n_atoms_ = 0;
    std::vector<double> outcomes_;
    std::vector<double> wre_, wim_;  // row-major n_out x dim
};

}  // namespace clockforge
