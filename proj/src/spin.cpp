#include "clockforge/spin.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace clockforge {

DickeBasis DickeBasis::of(int n_atoms) {
    require(n_atoms >= 1, "n_atoms must be >= 1");
    require(n_atoms <= 4096, "n_atoms too large for dense Dicke-space operators");
    DickeBasis b;
    b.n_atoms = n_atoms;
    b.dim = n_atoms + 1;
    b.m_values.resize(b.dim);
    const double s = 0.5 * n_atoms;
    for (int j = 0; j < b.dim; ++j) b.m_values[j] = -s + j;
    return b;
}

CollectiveOps collective_ops(int n_atoms) {
    const DickeBasis basis = DickeBasis::of(n_atoms);
    const int d = basis.dim;
    const double s = basis.spin();

    Eigen::MatrixXcd sx = Eigen::MatrixXcd::Zero(d, d);
    Eigen::MatrixXcd sy = Eigen::MatrixXcd::Zero(d, d);
    Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(d, d);
    for (int j = 0; j < d; ++j) {
        const double m = basis.m_values[j];
        sz(j, j) = m;
        if (j + 1 < d) {
            // <M+1| S_+ |M> = sqrt(S(S+1) - M(M+1))
            const double c = std::sqrt(s * (s + 1) - m * (m + 1));
            sx(j + 1, j) = 0.5 * c;
            sx(j, j + 1) = 0.5 * c;
            sy(j + 1, j) = complexd(0, -0.5 * c);
            sy(j, j + 1) = complexd(0, +0.5 * c);
        }
    }
    return CollectiveOps{{basis, std::move(sx)}, {basis, std::move(sy)}, {basis, std::move(sz)}};
}

StateVector ground_state(int n_atoms) {
    const DickeBasis basis = DickeBasis::of(n_atoms);
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(basis.dim);
    amp(0) = 1.0;
    return StateVector{basis, std::move(amp)};
}

std::pair<double, double> axis_angles(const Vec3& axis) {
    const double r = axis.norm();
    require(std::abs(r - 1.0) <= 1e-9, "axis must be a unit vector");
    return {std::acos(std::clamp(axis.z / r, -1.0, 1.0)), std::atan2(axis.y, axis.x)};
}

GateEngine::GateEngine(int n_atoms) : basis_(DickeBasis::of(n_atoms)) {
    const CollectiveOps ops = collective_ops(n_atoms);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ops.sy.matrix);
    check_numeric(es.info() == Eigen::Success, "S_y eigendecomposition failed");
    vy_ = es.eigenvectors();  // eigenvalues ascending == m_values
}

Eigen::MatrixXcd GateEngine::ry(double beta) const {
    const int d = basis_.dim;
    Eigen::VectorXcd phases(d);
    for (int j = 0; j < d; ++j) {
        const double a = -beta * basis_.m_values[j];
        phases(j) = complexd(std::cos(a), std::sin(a));
    }
    return vy_ * phases.asDiagonal() * vy_.adjoint();
}

Eigen::MatrixXcd GateEngine::axis_frame(double theta, double phi) const {
    Eigen::MatrixXcd u = ry(-theta);
    const int d = basis_.dim;
    for (int j = 0; j < d; ++j) {
        const double a = phi * basis_.m_values[j];
        u.col(j) *= complexd(std::cos(a), std::sin(a));
    }
    return u;
}

Eigen::MatrixXcd GateEngine::rotation(double theta, double phi, double angle) const {
    const int d = basis_.dim;
    Eigen::VectorXcd phases(d);
    for (int j = 0; j < d; ++j) {
        const double a = -angle * basis_.m_values[j];
        phases(j) = complexd(std::cos(a), std::sin(a));
    }
    if (theta == 0.0) return Eigen::MatrixXcd(phases.asDiagonal());
    const Eigen::MatrixXcd u = axis_frame(theta, phi);
    return u.adjoint() * phases.asDiagonal() * u;
}

Eigen::MatrixXcd GateEngine::rotation(const Vec3& axis, double angle) const {
    const auto [theta, phi] = axis_angles(axis);
    return rotation(theta, phi, angle);
}

Eigen::MatrixXcd GateEngine::oat_gate(double theta, double phi, double mu) const {
    const int d = basis_.dim;
    Eigen::VectorXcd phases(d);
    for (int j = 0; j < d; ++j) {
        const double m = basis_.m_values[j];
        const double a = -0.5 * mu * m * m;
        phases(j) = complexd(std::cos(a), std::sin(a));
    }
    if (theta == 0.0) return Eigen::MatrixXcd(phases.asDiagonal());
    const Eigen::MatrixXcd u = axis_frame(theta, phi);
    return u.adjoint() * phases.asDiagonal() * u;
}

Eigen::MatrixXcd GateEngine::oat_gate(const Vec3& axis, double mu) const {
    const auto [theta, phi] = axis_angles(axis);
    return oat_gate(theta, phi, mu);
}

Eigen::VectorXcd GateEngine::apply_rz(const Eigen::VectorXcd& v, double angle) const {
    const int d = basis_.dim;
    Eigen::VectorXcd out(d);
    for (int j = 0; j < d; ++j) {
        const double a = -angle * basis_.m_values[j];
        out(j) = v(j) * complexd(std::cos(a), std::sin(a));
    }
    return out;
}

const GateEngine& shared_gate_engine(int n_atoms) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GateEngine>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[n_atoms];
    if (!slot) slot = std::make_unique<GateEngine>(n_atoms);
    return *slot;
}

namespace {

void require_same_basis(const DickeBasis& a, const DickeBasis& b) {
    require(a.n_atoms == b.n_atoms, "operands live in different Dicke bases");
}

}  // namespace

StateVector rotate(const StateVector& state, const Vec3& axis, double angle) {
    const GateEngine& eng = shared_gate_engine(state.basis.n_atoms);
    return StateVector{state.basis, eng.rotation(axis, angle) * state.amplitudes};
}

StateVector oat(const StateVector& state, const Vec3& axis, double mu) {
    const GateEngine& eng = shared_gate_engine(state.basis.n_atoms);
    return StateVector{state.basis, eng.oat_gate(axis, mu) * state.amplitudes};
}

double expect(const StateVector& state, const SpinOperator& op) {
    require_same_basis(state.basis, op.basis);
    const complexd val = state.amplitudes.dot(op.matrix * state.amplitudes);
    check_numeric(std::abs(val.imag()) < kHardTol,
                  "expectation value has an imaginary residue above the hard threshold");
    return val.real();
}

double expect(const DensityOp& rho, const SpinOperator& op) {
    require_same_basis(rho.basis, op.basis);
    const complexd val = (rho.matrix * op.matrix).trace();
    check_numeric(std::abs(val.imag()) < kHardTol,
                  "expectation value has an imaginary residue above the hard threshold");
    return val.real();
}

DensityOp density_from_state(const StateVector& state) {
    return DensityOp{state.basis, state.amplitudes * state.amplitudes.adjoint()};
}

}  // namespace clockforge
