#include "clockforge/protocol.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "clockforge/kernels.hpp"

namespace clockforge {

using json = nlohmann::json;

int ProtocolSpec::variational_param_count(int n, int m) {
    require(n >= 0 && m >= 0, "layer counts must be non-negative");
    if (n + m == 0) return 4;
    return 4 + 3 * (n + m) - 2;
}

ProtocolSpec ProtocolSpec::css(int n_atoms, EstimatorKind est) {
    ProtocolSpec s;
    s.kind = Kind::Css;
    s.n_atoms = n_atoms;
    s.estimator = est;
    s.validate();
    return s;
}

ProtocolSpec ProtocolSpec::sss(int n_atoms, double mu, EstimatorKind est) {
    ProtocolSpec s;
    s.kind = Kind::Sss;
    s.n_atoms = n_atoms;
    s.estimator = est;
    s.sss_mu = mu;
    s.validate();
    return s;
}

ProtocolSpec ProtocolSpec::ghz(int n_atoms, bool parity) {
    ProtocolSpec s;
    s.kind = Kind::Ghz;
    s.n_atoms = n_atoms;
    s.estimator = EstimatorKind::OptimalBayes;
    s.ghz_parity = parity;
    s.validate();
    return s;
}

ProtocolSpec ProtocolSpec::variational(int n_atoms, int n, int m, std::vector<double> params,
                                       EstimatorKind est) {
    ProtocolSpec s;
    s.kind = Kind::Variational;
    s.n_atoms = n_atoms;
    s.estimator = est;
    s.var_n = n;
    s.var_m = m;
    s.var_params = std::move(params);
    s.validate();
    return s;
}

ProtocolSpec ProtocolSpec::poi(int n_atoms) {
    ProtocolSpec s;
    s.kind = Kind::Poi;
    s.n_atoms = n_atoms;
    s.estimator = EstimatorKind::OptimalBayes;
    s.validate();
    return s;
}

void ProtocolSpec::validate() const {
    require(n_atoms >= 1, "n_atoms must be >= 1");
    if (kind == Kind::Variational) {
        const int want = variational_param_count(var_n, var_m);
        require(static_cast<int>(var_params.size()) == want,
                "variational parameter count mismatch: expected " + std::to_string(want) +
                    ", got " + std::to_string(var_params.size()));
    }
    if (kind == Kind::Poi && !poi_state.empty())
        require(static_cast<int>(poi_state.size()) == n_atoms + 1,
                "POI probe state has wrong dimension");
}

namespace {

// Variational parameter unpacking.
struct VariationalLayout {
    std::vector<double> mu;                      // n+m twisting strengths
    std::vector<std::pair<double, double>> axis; // twist axes (first fixed to z)
    std::pair<double, double> n_rot{0, 0};
    std::pair<double, double> m_rot{0, 0};
};

VariationalLayout unpack(const ProtocolSpec& spec) {
    const int L = spec.var_n + spec.var_m;
    VariationalLayout lay;
    const auto& p = spec.var_params;
    std::size_t k = 0;
    for (int j = 0; j < L; ++j) lay.mu.push_back(p[k++]);
    lay.axis.resize(L);
    if (L > 0) lay.axis[0] = {0.0, 0.0};
    for (int j = 1; j < L; ++j) {
        lay.axis[j].first = p[k++];
        lay.axis[j].second = p[k++];
    }
    lay.n_rot = {p[k], p[k + 1]};
    k += 2;
    lay.m_rot = {p[k], p[k + 1]};
    return lay;
}

Eigen::VectorXcd sine_state_amplitudes(int n_atoms) {
    const int d = n_atoms + 1;
    Eigen::VectorXcd amp(d);
    const double norm = std::sqrt(2.0 / d);
    for (int j = 0; j < d; ++j) {
        const double m = -0.5 * n_atoms + j;
        amp(j) = norm * std::sin(kPi * (m + 0.5) / d);
    }
    return amp;
}

}  // namespace

StateVector prepare_state(const ProtocolSpec& spec) {
    spec.validate();
    const GateEngine& eng = shared_gate_engine(spec.n_atoms);
    const DickeBasis& basis = eng.basis();
    const int d = basis.dim;

    switch (spec.kind) {
        case ProtocolSpec::Kind::Css: {
            StateVector psi = ground_state(spec.n_atoms);
            // R_{pi/2} = R_y(-pi/2)
            psi.amplitudes = eng.rotation(kPi / 2, kPi / 2, -kPi / 2) * psi.amplitudes;
            return psi;
        }
        case ProtocolSpec::Kind::Sss: {
            StateVector psi = ground_state(spec.n_atoms);
            psi.amplitudes = eng.rotation(kPi / 2, kPi / 2, -kPi / 2) * psi.amplitudes;
            psi.amplitudes = eng.oat_gate(0.0, 0.0, spec.sss_mu) * psi.amplitudes;
            double theta = spec.sss_theta;
            if (std::isnan(theta)) theta = sss_moments(spec.n_atoms, spec.sss_mu).theta;
            psi.amplitudes = eng.rotation(kPi / 2, 0.0, theta) * psi.amplitudes;
            return psi;
        }
        case ProtocolSpec::Kind::Ghz: {
            Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(d);
            amp(0) = amp(d - 1) = 1.0 / std::sqrt(2.0);
            StateVector psi{basis, std::move(amp)};
            // Working-point shift R_z(-pi/(2N)).
            psi.amplitudes = eng.apply_rz(psi.amplitudes, -kPi / (2.0 * spec.n_atoms));
            return psi;
        }
        case ProtocolSpec::Kind::Variational: {
            const VariationalLayout lay = unpack(spec);
            StateVector psi = ground_state(spec.n_atoms);
            psi.amplitudes = eng.rotation(kPi / 2, kPi / 2, -kPi / 2) * psi.amplitudes;
            for (int j = 0; j < spec.var_n; ++j)
                psi.amplitudes =
                    eng.oat_gate(lay.axis[j].first, lay.axis[j].second, lay.mu[j]) *
                    psi.amplitudes;
            psi.amplitudes =
                eng.axis_frame(lay.n_rot.first, lay.n_rot.second) * psi.amplitudes;
            return psi;
        }
        case ProtocolSpec::Kind::Poi: {
            if (!spec.poi_state.empty()) {
                Eigen::VectorXcd amp(d);
                for (int j = 0; j < d; ++j) amp(j) = spec.poi_state[j];
                check_numeric(std::abs(amp.norm() - 1.0) < 1e-9,
                              "POI probe state is not normalized");
                return StateVector{basis, std::move(amp)};
            }
            return StateVector{basis, sine_state_amplitudes(spec.n_atoms)};
        }
    }
    throw InvalidArgument("unknown protocol kind");
}

Eigen::MatrixXcd measurement_unitary(const ProtocolSpec& spec, const GateEngine& eng) {
    switch (spec.kind) {
        case ProtocolSpec::Kind::Css:
        case ProtocolSpec::Kind::Sss:
            // Effective S_y measurement.
            return eng.axis_frame(kPi / 2, kPi / 2);
        case ProtocolSpec::Kind::Ghz: {
            // Final Ramsey pulse: pi/2 about x for N even, about y for N odd.
            if (spec.n_atoms % 2 == 0) return eng.rotation(kPi / 2, 0.0, kPi / 2);
            return eng.rotation(kPi / 2, kPi / 2, kPi / 2);
        }
        case ProtocolSpec::Kind::Variational: {
            const VariationalLayout lay = unpack(spec);
            Eigen::MatrixXcd u =
                eng.axis_frame(lay.n_rot.first, lay.n_rot.second).adjoint();
            for (int j = spec.var_n; j < spec.var_n + spec.var_m; ++j)
                u = eng.oat_gate(lay.axis[j].first, lay.axis[j].second, lay.mu[j]) * u;
            return eng.axis_frame(lay.m_rot.first, lay.m_rot.second) * u;
        }
        case ProtocolSpec::Kind::Poi:
            return phase_operator(spec.n_atoms).eigenvectors.adjoint();
    }
    throw InvalidArgument("unknown protocol kind");
}

namespace {

ConditionalModel parity_model(const ProtocolSpec& spec, const PriorModel& prior) {
    const int nq = prior.n_nodes();
    const double sign = (spec.n_atoms % 2 == 0) ? 1.0 : -1.0;  // (-1)^N
    ConditionalModel model;
    model.outcomes = {-1.0, +1.0};
    model.prior = prior;
    model.probs.resize(2, nq);
    model.dprobs.resize(2, nq);
    const double n = spec.n_atoms;
    for (int q = 0; q < nq; ++q) {
        const double s = sign * std::sin(n * prior.nodes[q]);
        const double ds = sign * n * std::cos(n * prior.nodes[q]);
        model.probs(0, q) = 0.5 * (1.0 - s);
        model.probs(1, q) = 0.5 * (1.0 + s);
        model.dprobs(0, q) = -0.5 * ds;
        model.dprobs(1, q) = +0.5 * ds;
    }
    return model;
}

}  // namespace

ConditionalModel statistical_model(const ProtocolSpec& spec, const PriorModel& prior) {
    spec.validate();
    if (spec.kind == ProtocolSpec::Kind::Ghz && spec.ghz_parity)
        return parity_model(spec, prior);

    const GateEngine& eng = shared_gate_engine(spec.n_atoms);
    const int d = eng.basis().dim;
    const StateVector psi = prepare_state(spec);
    const Eigen::MatrixXcd u_meas = measurement_unitary(spec, eng);

    // W[x][M] = U_meas[x][M] * psi_M; A_x(phi) = sum_M W[x][M] e^{-i phi M}.
    Eigen::MatrixXcd w = u_meas * psi.amplitudes.asDiagonal();

    ConditionalModel model;
    model.prior = prior;
    if (spec.kind == ProtocolSpec::Kind::Poi)
        model.outcomes = phase_operator(spec.n_atoms).eigenvalues;
    else
        model.outcomes = eng.basis().m_values;

    const int nq = prior.n_nodes();
    model.probs.resize(d, nq);
    model.dprobs.resize(d, nq);
    Eigen::VectorXcd phase(d), dphase(d);
    for (int q = 0; q < nq; ++q) {
        const double phi = prior.nodes[q];
        for (int j = 0; j < d; ++j) {
            const double m = eng.basis().m_values[j];
            const complexd e(std::cos(phi * m), -std::sin(phi * m));
            phase(j) = e;
            dphase(j) = complexd(0, -m) * e;
        }
        const Eigen::VectorXcd a = w * phase;
        const Eigen::VectorXcd da = w * dphase;
        double colsum = 0;
        for (int x = 0; x < d; ++x) {
            const double p = std::norm(a(x));
            model.probs(x, q) = p;
            model.dprobs(x, q) = 2.0 * (std::conj(a(x)) * da(x)).real();
            colsum += p;
        }
        check_numeric(std::abs(colsum - 1.0) < 1e-10,
                      "statistical model column is not normalized");
    }
    return model;
}

SpinMoments sss_moments(int n_atoms, double mu) {
    require(n_atoms >= 2, "sss_moments needs N >= 2");
    const double n = n_atoms;
    SpinMoments mom;
    const double c = std::cos(0.5 * mu);
    mom.ex_sx = 0.5 * n * std::pow(c, n - 1);
    const double a = 1.0 - std::pow(std::cos(mu), n - 2.0);
    const double b = 4.0 * std::sin(0.5 * mu) * std::pow(c, n - 2.0);
    mom.ex_sx2 = 0.25 * n * (n * (1.0 - std::pow(c, 2.0 * n - 2.0)) - 0.5 * (n - 1) * a) +
                 mom.ex_sx * mom.ex_sx;
    const double root = std::sqrt(a * a + b * b);
    mom.ex_sy2 = 0.25 * n * (1.0 + 0.25 * (n - 1) * (a - root));
    mom.theta = (mu == 0.0) ? 0.0 : 0.5 * std::atan2(b, -a);
    mom.wineland_xi = std::sqrt(n) * std::sqrt(mom.ex_sy2) / mom.ex_sx;
    return mom;
}

double analytic_efm(AnalyticKind kind, int n_atoms, double delta_phi, double sss_mu) {
    require(delta_phi > 0, "delta_phi must be positive");
    const double v = delta_phi * delta_phi;
    const double n = n_atoms;
    switch (kind) {
        case AnalyticKind::Css:
            return std::cosh(v) / n + std::sinh(v) - v;
        case AnalyticKind::Sss: {
            const SpinMoments m = sss_moments(n_atoms, sss_mu);
            const double sx2 = m.ex_sx * m.ex_sx;
            return (m.ex_sy2 / sx2) * std::cosh(v) + (m.ex_sx2 / sx2) * std::sinh(v) - v;
        }
        case AnalyticKind::Ghz: {
            const double efm = std::exp(n * n * v) / (n * n) - v;
            if (!(efm > 0)) throw NumericalError("GHZ effective measurement uncertainty non-positive");
            return efm;
        }
    }
    throw InvalidArgument("unknown analytic kind");
}

PhaseOperatorData phase_operator(int n_atoms) {
    require(n_atoms >= 1, "n_atoms must be >= 1");
    const int d = n_atoms + 1;
    PhaseOperatorData out;
    out.eigenvalues.resize(d);
    out.eigenvectors.resize(d, d);
    const double norm = 1.0 / std::sqrt(static_cast<double>(d));
    for (int sj = 0; sj < d; ++sj) {
        const double s = -0.5 * n_atoms + sj;
        const double phi_s = 2.0 * kPi * s / d;
        out.eigenvalues[sj] = phi_s;
        for (int mj = 0; mj < d; ++mj) {
            const double m = -0.5 * n_atoms + mj;
            out.eigenvectors(mj, sj) =
                norm * complexd(std::cos(phi_s * m), -std::sin(phi_s * m));
        }
    }
    out.sine_state = StateVector{DickeBasis::of(n_atoms), sine_state_amplitudes(n_atoms)};
    return out;
}

namespace {

const char* kind_name(ProtocolSpec::Kind k) {
    switch (k) {
        case ProtocolSpec::Kind::Css: return "css";
        case ProtocolSpec::Kind::Sss: return "sss";
        case ProtocolSpec::Kind::Ghz: return "ghz";
        case ProtocolSpec::Kind::Variational: return "variational";
        case ProtocolSpec::Kind::Poi: return "poi";
    }
    return "?";
}

}  // namespace

std::string protocol_to_json(const ProtocolSpec& spec) {
    spec.validate();
    json j;
    j["kind"] = kind_name(spec.kind);
    j["n_atoms"] = spec.n_atoms;
    j["estimator"] = spec.estimator == EstimatorKind::Linear ? "linear" : "optimal_bayes";
    switch (spec.kind) {
        case ProtocolSpec::Kind::Sss:
            j["mu"] = spec.sss_mu;
            if (!std::isnan(spec.sss_theta)) j["theta"] = spec.sss_theta;
            break;
        case ProtocolSpec::Kind::Ghz:
            j["parity"] = spec.ghz_parity;
            break;
        case ProtocolSpec::Kind::Variational:
            j["n"] = spec.var_n;
            j["m"] = spec.var_m;
            j["params"] = spec.var_params;
            break;
        case ProtocolSpec::Kind::Poi:
            if (!spec.poi_state.empty()) {
                std::vector<double> re, im;
                for (const auto& c : spec.poi_state) {
                    re.push_back(c.real());
                    im.push_back(c.imag());
                }
                j["state_re"] = re;
                j["state_im"] = im;
            }
            break;
        default:
            break;
    }
    return j.dump();
}

ProtocolSpec protocol_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("protocol JSON parse error: ") + e.what());
    }
    ProtocolSpec spec;
    const std::string kind = j.at("kind").get<std::string>();
    spec.n_atoms = j.at("n_atoms").get<int>();
    if (j.contains("estimator")) {
        const std::string est = j["estimator"].get<std::string>();
        if (est == "linear")
            spec.estimator = EstimatorKind::Linear;
        else if (est == "optimal_bayes")
            spec.estimator = EstimatorKind::OptimalBayes;
        else
            throw ConfigError("unknown estimator kind: " + est);
    }
    if (kind == "css") {
        spec.kind = ProtocolSpec::Kind::Css;
    } else if (kind == "sss") {
        spec.kind = ProtocolSpec::Kind::Sss;
        spec.sss_mu = j.at("mu").get<double>();
        if (j.contains("theta")) spec.sss_theta = j["theta"].get<double>();
    } else if (kind == "ghz") {
        spec.kind = ProtocolSpec::Kind::Ghz;
        if (j.contains("parity")) spec.ghz_parity = j["parity"].get<bool>();
    } else if (kind == "variational") {
        spec.kind = ProtocolSpec::Kind::Variational;
        spec.var_n = j.at("n").get<int>();
        spec.var_m = j.at("m").get<int>();
        spec.var_params = j.at("params").get<std::vector<double>>();
    } else if (kind == "poi") {
        spec.kind = ProtocolSpec::Kind::Poi;
        if (j.contains("state_re")) {
            const auto re = j["state_re"].get<std::vector<double>>();
            const auto im = j["state_im"].get<std::vector<double>>();
            require(re.size() == im.size(), "POI state arrays differ in length");
            for (std::size_t i = 0; i < re.size(); ++i)
                spec.poi_state.emplace_back(re[i], im[i]);
        }
    } else {
        throw ConfigError("unknown protocol kind: " + kind);
    }
    spec.validate();
    return spec;
}

ModelSampler::ModelSampler(const ProtocolSpec& spec) {
    spec.validate();
    n_atoms_ = spec.n_atoms;
    if (spec.kind == ProtocolSpec::Kind::Ghz && spec.ghz_parity) {
        parity_ = true;
        parity_sign_ = (spec.n_atoms % 2 == 0) ? 1 : -1;
        n_out_ = 2;
        outcomes_ = {-1.0, +1.0};
        return;
    }
    const GateEngine& eng = shared_gate_engine(spec.n_atoms);
    const StateVector psi = prepare_state(spec);
    const Eigen::MatrixXcd w = measurement_unitary(spec, eng) * psi.amplitudes.asDiagonal();
    dim_ = eng.basis().dim;
    n_out_ = dim_;
    m0_ = eng.basis().m_values.front();
    outcomes_ = (spec.kind == ProtocolSpec::Kind::Poi)
                    ? phase_operator(spec.n_atoms).eigenvalues
                    : eng.basis().m_values;
    wre_.resize(static_cast<std::size_t>(n_out_) * dim_);
    wim_.resize(static_cast<std::size_t>(n_out_) * dim_);
    for (int x = 0; x < n_out_; ++x)
        for (int j = 0; j < dim_; ++j) {
            wre_[static_cast<std::size_t>(x) * dim_ + j] = w(x, j).real();
            wim_[static_cast<std::size_t>(x) * dim_ + j] = w(x, j).imag();
        }
}

void ModelSampler::probs_at(double phi, double* out) const {
    if (parity_) {
        const double s = parity_sign_ * std::sin(n_atoms_ * phi);
        out[0] = 0.5 * (1.0 - s);
        out[1] = 0.5 * (1.0 + s);
        return;
    }
    thread_local std::vector<double> pre, pim;
    pre.resize(dim_);
    pim.resize(dim_);
    kernels::phase_ladder(phi, m0_, dim_, pre.data(), pim.data());
    kernels::probs_from_weights(wre_.data(), wim_.data(), n_out_, dim_, pre.data(),
                                pim.data(), out);
}

}  // namespace clockforge
