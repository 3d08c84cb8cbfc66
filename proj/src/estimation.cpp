#include "clockforge/estimation.hpp"

#include <cmath>
#include <limits>

#include "clockforge/kernels.hpp"

namespace clockforge {

namespace {

constexpr double kOutcomeFloor = 1e-300;  // outcomes never observed contribute nothing
constexpr double kFisherFloor = 1e-14;    // probability floor inside the Fisher quotient

ErrorReport make_report(const ConditionalModel& model, double bmse) {
    ErrorReport rep;
    rep.prior_var = model.prior.variance_on_grid();
    if (bmse < 0 && bmse > -1e-14 * rep.prior_var) bmse = 0;  // rounding guard
    rep.bmse = bmse;
    rep.efm = efm_transform(std::max(bmse, 0.0), rep.prior_var);
    rep.n_nodes = model.prior.n_nodes();
    rep.truncation = model.prior.truncation;
    return rep;
}

// Finite-difference weights for the first derivative at x0 on arbitrary nodes
// (Fornberg's algorithm, derivative order 1).
void fornberg_weights(double x0, const double* x, int n, double* w) {
    constexpr int kOrder = 1;
    std::vector<double> c(static_cast<std::size_t>(n) * (kOrder + 1), 0.0);
    auto C = [&](int i, int j) -> double& { return c[i * (kOrder + 1) + j]; };
    double c1 = 1.0;
    double c4 = x[0] - x0;
    C(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, kOrder);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    C(i, k) = c1 * (k * C(i - 1, k - 1) - c5 * C(i - 1, k)) / c2;
                C(i, 0) = -c1 * c5 * C(i - 1, 0) / c2;
            }
            for (int k = mn; k >= 1; --k)
                C(j, k) = (c4 * C(j, k) - k * C(j, k - 1)) / c3;
            C(j, 0) = c4 * C(j, 0) / c3;
        }
        c1 = c2;
    }
    for (int i = 0; i < n; ++i) w[i] = C(i, kOrder);
}

Eigen::MatrixXd derivative_columns(const ConditionalModel& model) {
    const int nq = model.prior.n_nodes();
    const int nx = static_cast<int>(model.outcomes.size());
    require(nq >= 5, "too few quadrature nodes for differentiation");
    Eigen::MatrixXd d(nx, nq);
    double w[5];
    for (int q = 0; q < nq; ++q) {
        int lo = std::clamp(q - 2, 0, nq - 5);
        fornberg_weights(model.prior.nodes[q], model.prior.nodes.data() + lo, 5, w);
        for (int x = 0; x < nx; ++x) {
            double acc = 0;
            for (int k = 0; k < 5; ++k) acc += w[k] * model.probs(x, lo + k);
            d(x, q) = acc;
        }
    }
    // Coarse-grid guard: a model column jumping by O(1) between neighbouring
    // nodes cannot be differentiated meaningfully on this grid.
    for (int x = 0; x < nx; ++x)
        for (int q = 1; q < nq; ++q)
            check_numeric(std::abs(model.probs(x, q) - model.probs(x, q - 1)) < 0.5,
                          "node spacing too coarse for numerical differentiation");
    return d;
}

}  // namespace

double efm_transform(double bmse, double prior_var) {
    require(bmse >= 0 && prior_var > 0, "efm_transform needs 0 <= bmse and prior_var > 0");
    if (bmse > prior_var) {
        if (bmse <= prior_var * (1.0 + 1e-12)) return std::numeric_limits<double>::infinity();
        throw InvalidArgument("bmse exceeds the prior variance (caller bug)");
    }
    if (bmse == 0) return 0.0;
    if (bmse == prior_var) return std::numeric_limits<double>::infinity();
    return 1.0 / (1.0 / bmse - 1.0 / prior_var);
}

std::pair<EstimatorTable, ErrorReport> linear_estimate(const ConditionalModel& model) {
    const int nq = model.prior.n_nodes();
    const int nx = static_cast<int>(model.outcomes.size());

    // <X>(phi_q), <X^2>(phi_q)
    std::vector<double> m1(nq), m2(nq);
    for (int q = 0; q < nq; ++q) {
        double a = 0, b = 0;
        for (int x = 0; x < nx; ++x) {
            const double val = model.outcomes[x];
            a += val * model.probs(x, q);
            b += val * val * model.probs(x, q);
        }
        m1[q] = a;
        m2[q] = b;
    }
    const double num = kernels::weighted_sum2(model.prior.weights.data(),
                                              model.prior.nodes.data(), m1.data(), nq);
    const double den =
        kernels::weighted_sum(model.prior.weights.data(), m2.data(), nq);
    check_numeric(den > 0, "degenerate signal: the second moment of X vanishes");

    EstimatorTable table;
    table.kind = EstimatorKind::Linear;
    table.scale = num / den;
    table.values.resize(nx);
    for (int x = 0; x < nx; ++x) table.values[x] = table.scale * model.outcomes[x];

    const double prior_var = model.prior.variance_on_grid();
    return {std::move(table), make_report(model, prior_var - num * num / den)};
}

std::pair<EstimatorTable, ErrorReport> optimal_bayes_estimate(const ConditionalModel& model) {
    const int nq = model.prior.n_nodes();
    const int nx = static_cast<int>(model.outcomes.size());

    EstimatorTable table;
    table.kind = EstimatorKind::OptimalBayes;
    table.values.assign(nx, 0.0);

    const double* w = model.prior.weights.data();
    const double* phi = model.prior.nodes.data();
    double gain = 0;
    for (int x = 0; x < nx; ++x) {
        // Row-major access via a copied row keeps the reduction order fixed.
        Eigen::VectorXd row = model.probs.row(x);
        const double px = kernels::weighted_sum(w, row.data(), nq);
        if (px < kOutcomeFloor) continue;
        const double num = kernels::weighted_sum2(w, phi, row.data(), nq);
        table.values[x] = num / px;
        gain += num * num / px;
    }
    const double prior_var = model.prior.variance_on_grid();
    return {std::move(table), make_report(model, prior_var - gain)};
}

std::pair<EstimatorTable, ErrorReport> estimate(const ConditionalModel& model,
                                                EstimatorKind kind) {
    return kind == EstimatorKind::Linear ? linear_estimate(model)
                                         : optimal_bayes_estimate(model);
}

double bmse_objective(const ProtocolSpec& spec, const PriorModel& prior, EstimatorKind kind) {
    const ModelSampler sampler(spec);
    const int nx = sampler.n_out();
    const int nq = prior.n_nodes();
    const double* w = prior.weights.data();
    const double* phi = prior.nodes.data();

    thread_local std::vector<double> probs;  // row-major nq x nx
    probs.resize(static_cast<std::size_t>(nq) * nx);
    for (int q = 0; q < nq; ++q) sampler.probs_at(phi[q], probs.data() + static_cast<std::size_t>(q) * nx);

    const double prior_var = prior.variance_on_grid();
    if (kind == EstimatorKind::Linear) {
        double num = 0, den = 0;
        for (int q = 0; q < nq; ++q) {
            const double* col = probs.data() + static_cast<std::size_t>(q) * nx;
            double m1 = 0, m2 = 0;
            for (int x = 0; x < nx; ++x) {
                const double val = sampler.outcomes()[x];
                m1 += val * col[x];
                m2 += val * val * col[x];
            }
            num += w[q] * phi[q] * m1;
            den += w[q] * m2;
        }
        check_numeric(den > 0, "degenerate signal: the second moment of X vanishes");
        return std::max(prior_var - num * num / den, 0.0);
    }
    double gain = 0;
    for (int x = 0; x < nx; ++x) {
        double px = 0, num = 0;
        for (int q = 0; q < nq; ++q) {
            const double p = probs[static_cast<std::size_t>(q) * nx + x];
            px += w[q] * p;
            num += w[q] * phi[q] * p;
        }
        if (px < kOutcomeFloor) continue;
        gain += num * num / px;
    }
    return std::max(prior_var - gain, 0.0);
}

double bcrb(const ConditionalModel& model) {
    const int nq = model.prior.n_nodes();
    const int nx = static_cast<int>(model.outcomes.size());
    Eigen::MatrixXd fallback;
    if (!model.has_derivatives()) fallback = derivative_columns(model);
    const Eigen::MatrixXd& deriv = model.has_derivatives() ? model.dprobs : fallback;

    double fbar = 0;
    for (int q = 0; q < nq; ++q) {
        double f = 0;
        for (int x = 0; x < nx; ++x) {
            const double p = std::max(model.probs(x, q), kFisherFloor);
            f += deriv(x, q) * deriv(x, q) / p;
        }
        fbar += model.prior.weights[q] * f;
    }
    return 1.0 / (fbar + 1.0 / model.prior.variance_on_grid());
}

}  // namespace clockforge
