#pragma once

#include <Eigen/Dense>
#include <vector>

#include "clockforge/common.hpp"

namespace clockforge {

// Permutationally symmetric subspace of N two-level atoms: spin S = N/2,
// states labeled by the S_z eigenvalue M in ascending order.
struct DickeBasis {
    int n_atoms = 0;
    int dim = 0;
    std::vector<double> m_values;

    static DickeBasis of(int n_atoms);
    double spin() const { return 0.5 * n_atoms; }
};

struct SpinOperator {
    DickeBasis basis;
    Eigen::MatrixXcd matrix;
};

struct CollectiveOps {
    SpinOperator sx, sy, sz;
};

struct StateVector {
    DickeBasis basis;
    Eigen::VectorXcd amplitudes;

    double norm() const { return amplitudes.norm(); }
};

struct DensityOp {
    DickeBasis basis;
    Eigen::MatrixXcd matrix;
};

CollectiveOps collective_ops(int n_atoms);

// |down>^N : amplitude 1 at M = -N/2.
StateVector ground_state(int n_atoms);

StateVector rotate(const StateVector& state, const Vec3& axis, double angle);
StateVector oat(const StateVector& state, const Vec3& axis, double mu);

double expect(const StateVector& state, const SpinOperator& op);
double expect(const DensityOp& rho, const SpinOperator& op);

DensityOp density_from_state(const StateVector& state);

// Exact-gate engine. All collective rotations exp(-i angle S_k) and twisting
// gates exp(-i mu/2 S_k^2) are assembled from the diagonal z-phases and the
// cached eigenbasis of S_y, so no per-gate eigensolve is needed.
class GateEngine {
public:
    explicit GateEngine(int n_atoms);

    const DickeBasis& basis() const { return basis_; }

    // U(theta,phi) = e^{+i theta S_y} e^{+i phi S_z}; satisfies
    // U^dag S_z U = sin(theta)cos(phi) S_x + sin(theta)sin(phi) S_y + cos(theta) S_z.
    Eigen::MatrixXcd axis_frame(double theta, double phi) const;

    Eigen::MatrixXcd rotation(double theta, double phi, double angle) const;
    Eigen::MatrixXcd rotation(const Vec3& axis, double angle) const;
    Eigen::MatrixXcd oat_gate(double theta, double phi, double mu) const;
    Eigen::MatrixXcd oat_gate(const Vec3& axis, double mu) const;

    // e^{-i angle S_z} applied to a vector (diagonal phases).
    Eigen::VectorXcd apply_rz(const Eigen::VectorXcd& v, double angle) const;

private:
    Eigen::MatrixXcd ry(double beta) const;  // e^{-i beta S_y}

    DickeBasis basis_;
    Eigen::MatrixXcd vy_;  // columns: eigenvectors of S_y, eigenvalues = m_values
};

// Polar/azimuth angles of a unit 3-vector (validated to 1e-9).
std::pair<double, double> axis_angles(const Vec3& axis);

// Process-wide engine cache keyed by N; engines are immutable after
// construction and safe to share across threads.
const GateEngine& shared_gate_engine(int n_atoms);

}  // namespace clockforge
