#pragma once

#include <functional>
#include <vector>

#include "clockforge/common.hpp"

namespace clockforge {

// Power-law noise exponent and the numerically determined prior-width factor
// chi(alpha) = 1, 1.7, 2 for alpha = -1 (white), 0 (flicker), +1 (random walk).
struct NoiseExponent {
    int alpha = 0;
    double chi = 1.7;

    static NoiseExponent of(int alpha);
};

// Zero-mean Gaussian prior over the phase, discretized on Gauss-Legendre
// nodes reweighted by the Gaussian density. All modules consume the same
// grid so that bounds and estimators stay comparable.
struct PriorModel {
    double width = 0;  // delta_phi [rad]
    std::vector<double> nodes;
    std::vector<double> weights;
    double truncation = 8.0;  // half-range in units of width (before the CTL floor)

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    double variance_on_grid() const;  // sum w phi^2
};

PriorModel gaussian_prior(double delta_phi, int n_nodes = 201, double truncation = 8.0);

// Node count adapted to the fastest phase factor e^{-i phi N} on the grid;
// keeps quadrature resolved for large N * delta_phi.
PriorModel gaussian_prior_auto(double delta_phi, int n_atoms);

double width_from_interrogation(double T, double Z, NoiseExponent alpha);
double deadtime_width(double T_D, double Z, NoiseExponent alpha);
double combine_widths(double delta_phi_T, double delta_phi_D);

// Laser coherence time Z solving sigma_lo(Z + T_D) * omega0 * Z = 1 rad
// (omega0 = 2 pi nu0) by bisection to relative 1e-10.
double coherence_time(const std::function<double(double)>& sigma_lo, double omega0,
                      double T_D = 0.0);

// Gauss-Legendre nodes/weights on [-1, 1] (Newton on the Legendre recurrence).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace clockforge
