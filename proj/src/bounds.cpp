#include "clockforge/bounds.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>

#include "clockforge/protocol.hpp"
#include "clockforge/rng.hpp"

namespace clockforge {

namespace {

// c(D) = sum_q w_q e^{-i phi_q D}, d(D) = sum_q w_q phi_q e^{-i phi_q D}
// for integer ladder offsets D = M_i - M_j.
struct PhaseMoments {
    std::vector<complexd> c, d;  // index D = 0..N

    complexd cc(int delta) const { return delta >= 0 ? c[delta] : std::conj(c[-delta]); }
    complexd dd(int delta) const { return delta >= 0 ? d[delta] : std::conj(d[-delta]); }
};

PhaseMoments phase_moments(const PriorModel& prior, int n_atoms) {
    PhaseMoments pm;
    pm.c.assign(n_atoms + 1, 0.0);
    pm.d.assign(n_atoms + 1, 0.0);
    for (int q = 0; q < prior.n_nodes(); ++q) {
        const double w = prior.weights[q];
        const double phi = prior.nodes[q];
        for (int delta = 0; delta <= n_atoms; ++delta) {
            const complexd e(std::cos(phi * delta), -std::sin(phi * delta));
            pm.c[delta] += w * e;
            pm.d[delta] += w * phi * e;
        }
    }
    return pm;
}

struct LSolve {
    Eigen::MatrixXcd l;  // in the original basis
    double bound = 0;
};

// Solve rho' = (L rho + rho L)/2 for Hermitian rho, rho' and evaluate
// prior_var - Tr(rho L^2).
LSolve solve_l(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& rho_prime,
               double prior_var) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    check_numeric(es.info() == Eigen::Success, "averaged-state eigendecomposition failed");
    const Eigen::VectorXd lam = es.eigenvalues();
    const Eigen::MatrixXcd& u = es.eigenvectors();
    const int d = static_cast<int>(lam.size());
    const double eps = 1e-12 * lam.maxCoeff();

    const Eigen::MatrixXcd r = u.adjoint() * rho_prime * u;
    Eigen::MatrixXcd lt = Eigen::MatrixXcd::Zero(d, d);
    double kept = 0, dropped = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double denom = lam(i) + lam(j);
            const double wij = std::norm(r(i, j));
            if (denom > eps) {
                lt(i, j) = 2.0 * r(i, j) / denom;
                kept += wij;
            } else {
                dropped += wij;
            }
        }
    if (dropped > kept)
        std::cerr << "clockforge: conditioning warning: epsilon truncation removed most of"
                     " the rho_bar' weight in the L solve\n";

    double tr = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) tr += lam(i) * std::norm(lt(i, j));
    return {u * lt * u.adjoint(), prior_var - tr};
}

// Omega = sum_q w_q R_z^dag(phi_q) [L^2 - 2 phi_q L] R_z(phi_q), assembled
// from the ladder phase moments.
Eigen::MatrixXcd state_update_operator(const Eigen::MatrixXcd& l, const PhaseMoments& pm) {
    const int d = static_cast<int>(l.rows());
    const Eigen::MatrixXcd l2 = l * l;
    Eigen::MatrixXcd omega(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const int delta = i - j;
            // R_z^dag A R_z multiplies A_ij by e^{+i phi (M_i - M_j)}.
            omega(i, j) = l2(i, j) * std::conj(pm.cc(delta)) -
                          2.0 * l(i, j) * std::conj(pm.dd(delta));
        }
    return omega;
}

StateVector most_negative_eigenvector(const Eigen::MatrixXcd& omega, const DickeBasis& basis) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(omega);
    check_numeric(es.info() == Eigen::Success, "state-update eigendecomposition failed");
    return StateVector{basis, es.eigenvectors().col(0)};  // eigenvalues ascending
}

}  // namespace

AveragedState averaged_state(const StateVector& state, const PriorModel& prior) {
    const int d = state.basis.dim;
    const PhaseMoments pm = phase_moments(prior, state.basis.n_atoms);
    const Eigen::MatrixXcd rho = state.amplitudes * state.amplitudes.adjoint();
    Eigen::MatrixXcd rho_bar(d, d), rho_prime(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const int delta = i - j;
            rho_bar(i, j) = rho(i, j) * pm.cc(delta);
            rho_prime(i, j) = rho(i, j) * pm.dd(delta);
        }
    check_numeric(std::abs(rho_bar.trace().real() - 1.0) < 1e-10 &&
                      (rho_bar - rho_bar.adjoint()).cwiseAbs().maxCoeff() < 1e-10,
                  "averaged state lost trace or hermiticity");
    check_numeric((rho_prime - rho_prime.adjoint()).cwiseAbs().maxCoeff() < 1e-10,
                  "averaged first-moment state lost hermiticity");
    return AveragedState{DensityOp{state.basis, std::move(rho_bar)}, std::move(rho_prime)};
}

double bqcrb(const StateVector& state, const PriorModel& prior) {
    const AveragedState avg = averaged_state(state, prior);
    return solve_l(avg.rho_bar.matrix, avg.rho_bar_prime, prior.variance_on_grid()).bound;
}

double bqcrb_via_qfi(const StateVector& state, const PriorModel& prior) {
    const AveragedState avg = averaged_state(state, prior);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(avg.rho_bar.matrix);
    check_numeric(es.info() == Eigen::Success, "averaged-state eigendecomposition failed");
    const Eigen::VectorXd lam = es.eigenvalues();
    const Eigen::MatrixXcd& u = es.eigenvectors();
    const int d = state.basis.dim;
    const double eps = 1e-12 * lam.maxCoeff();

    // <u_i| S_z |u_j> with S_z diagonal in the Dicke basis.
    Eigen::MatrixXcd mu = u;
    for (int k = 0; k < d; ++k) mu.row(k) *= state.basis.m_values[k];
    const Eigen::MatrixXcd v = u.adjoint() * mu;

    double fq = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double denom = lam(i) + lam(j);
            if (denom <= eps) continue;
            const double diff = lam(i) - lam(j);
            fq += 2.0 * diff * diff / denom * std::norm(v(i, j));
        }
    const double var = prior.variance_on_grid();
    return var * (1.0 - var * fq);
}

double ctl_oqi(double delta_phi) {
    require(delta_phi > 0, "delta_phi must be positive");
    return 4.0 * kPi * kPi * std::erfc(kPi / (std::sqrt(2.0) * delta_phi));
}

double ctl_oqi_sum(double delta_phi, int k_max) {
    require(delta_phi > 0, "delta_phi must be positive");
    require(k_max >= 1, "k_max must be >= 1");
    const double s = std::sqrt(2.0) * delta_phi;
    double acc = 0;
    for (int k = 1; k <= k_max; ++k) {
        const double pk = std::erf((2.0 * k + 1.0) * kPi / s) - std::erf((2.0 * k - 1.0) * kPi / s);
        acc += (2.0 * kPi * k) * (2.0 * kPi * k) * pk;
        if (pk < 1e-300) break;
    }
    return acc;
}

double oqi_asymptotic(int n_atoms, double delta_phi) {
    require(n_atoms >= 1, "n_atoms must be >= 1");
    const double n = n_atoms;
    return kPi * kPi / (n * n) + ctl_oqi(delta_phi);
}

namespace {

OqiResult oqi_from(StateVector initial, const PriorModel& prior, double tol, int max_iter,
                   const PhaseMoments& pm) {
    const DickeBasis basis = initial.basis;
    const double prior_var = prior.variance_on_grid();
    OqiResult res;
    res.optimal_state = std::move(initial);
    double prev = prior_var;
    int since_improvement = 0;
    for (int it = 0; it < max_iter; ++it) {
        const AveragedState avg = averaged_state(res.optimal_state, prior);
        LSolve ls = solve_l(avg.rho_bar.matrix, avg.rho_bar_prime, prior_var);
        res.l_operator = std::move(ls.l);
        res.bound = ls.bound;
        res.trace.push_back(res.bound);
        res.iterations = it + 1;
        if (it > 0 && std::abs(prev - res.bound) < tol * std::abs(res.bound)) {
            res.converged = true;
            break;
        }
        since_improvement = (res.bound < prev - tol * std::abs(res.bound))
                                ? 0
                                : since_improvement + 1;
        if (since_improvement >= 20) break;  // stagnation: record, do not spin
        prev = res.bound;
        res.optimal_state =
            most_negative_eigenvector(state_update_operator(res.l_operator, pm), basis);
    }
    return res;
}

}  // namespace

OqiResult oqi(int n_atoms, const PriorModel& prior, double tol, int max_iter, int n_cap) {
    require(n_atoms >= 1 && n_atoms <= n_cap, "n_atoms exceeds the dense-eigensolve cap");
    require(tol > 0, "tol must be positive");
    const DickeBasis basis = DickeBasis::of(n_atoms);
    const PhaseMoments pm = phase_moments(prior, n_atoms);
    const double prior_var = prior.variance_on_grid();

    OqiResult res = oqi_from(phase_operator(n_atoms).sine_state, prior, tol, max_iter, pm);
    // The sine state can sit on a degenerate fixed point (an S_z eigenstate
    // gives L = 0 and no descent direction); seeded random restarts guard
    // against such local fixed points.
    for (uint64_t restart = 0; restart < 3; ++restart) {
        if (res.converged && res.bound < 0.999 * prior_var) break;
        Rng rng = Rng::stream(0x0a1u, restart);
        Eigen::VectorXcd amp(basis.dim);
        for (int j = 0; j < basis.dim; ++j) amp(j) = complexd(rng.gaussian(), rng.gaussian());
        amp.normalize();
        OqiResult alt = oqi_from(StateVector{basis, amp}, prior, tol, max_iter, pm);
        if (alt.bound < res.bound) res = std::move(alt);
    }
    return res;
}

OqiResult poi_optimal(int n_atoms, const PriorModel& prior, double tol, int max_iter,
                      const std::optional<StateVector>& initial) {
    require(n_atoms >= 1 && n_atoms <= 128, "n_atoms exceeds the POI cap");
    require(tol > 0, "tol must be positive");
    const DickeBasis basis = DickeBasis::of(n_atoms);
    const PhaseOperatorData pod = phase_operator(n_atoms);
    const PhaseMoments pm = phase_moments(prior, n_atoms);
    const double prior_var = prior.variance_on_grid();
    const int d = basis.dim;
    const int nq = prior.n_nodes();

    OqiResult res;
    if (initial) {
        res.optimal_state = *initial;
    } else {
        // |s = 0>
        const int s0 = n_atoms / 2;  // eigenvalue ladder index of s=0 (N even); N odd has no 0
        res.optimal_state = StateVector{basis, pod.eigenvectors.col(s0)};
    }

    double prev = prior_var;
    int since_improvement = 0;
    for (int it = 0; it < max_iter; ++it) {
        // P(s | phi_q) for the fixed phase-operator PVM.
        Eigen::MatrixXd probs(d, nq);
        for (int q = 0; q < nq; ++q) {
            Eigen::VectorXcd v = res.optimal_state.amplitudes;
            const double phi = prior.nodes[q];
            for (int j = 0; j < d; ++j) {
                const double m = basis.m_values[j];
                v(j) *= complexd(std::cos(phi * m), -std::sin(phi * m));
            }
            const Eigen::VectorXcd a = pod.eigenvectors.adjoint() * v;
            for (int s = 0; s < d; ++s) probs(s, q) = std::norm(a(s));
        }
        // Optimal-Bayes estimator and its BMSE.
        Eigen::VectorXd est = Eigen::VectorXd::Zero(d);
        double gain = 0;
        for (int s = 0; s < d; ++s) {
            double px = 0, num = 0;
            for (int q = 0; q < nq; ++q) {
                px += prior.weights[q] * probs(s, q);
                num += prior.weights[q] * prior.nodes[q] * probs(s, q);
            }
            if (px < 1e-300) continue;
            est(s) = num / px;
            gain += num * num / px;
        }
        res.bound = prior_var - gain;
        res.trace.push_back(res.bound);
        res.iterations = it + 1;
        res.l_operator = pod.eigenvectors * est.asDiagonal() * pod.eigenvectors.adjoint();
        if (std::abs(prev - res.bound) < tol * std::abs(res.bound)) {
            res.converged = true;
            break;
        }
        since_improvement = (res.bound < prev - tol * std::abs(res.bound))
                                ? 0
                                : since_improvement + 1;
        if (since_improvement >= 20) break;
        prev = res.bound;
        res.optimal_state =
            most_negative_eigenvector(state_update_operator(res.l_operator, pm), basis);
    }
    return res;
}

}  // namespace clockforge
