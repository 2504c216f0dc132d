#pragma once

// Midpoint quadrature for Tf(x) = int_{-R}^{R} f(x - h(t)) dt and its adjoint
// T*g(y) = int g(y + h(t)) dt on lattice sets and step functions.

#include "mclab/lattice.hpp"

#include <vector>

namespace mclab {

// Nodes t_m = -R + (m + 1/2) t_step, m = 0 .. ceil(2R / t_step) - 1.
// t_step = 0 selects, per call, half the finest resolution among the sets
// involved. Any explicit t_step must not exceed that bound.
struct QuadratureSpec {
    double t_step = 0.0;
    double R = 1.0;
    int jobs = 1;

    static QuadratureSpec automatic(double R = 1.0, int jobs = 1) { return {0.0, R, jobs}; }
};

// |{t in [-R,R] : x - h(t) in E}| by the midpoint rule.
double apply_T(const LatticeSet& E, std::span<const double> x, const QuadratureSpec& quad);

// |{t in [-R,R] : x + h(t) in F}| by the midpoint rule.
double apply_T_star(const LatticeSet& F, std::span<const double> x, const QuadratureSpec& quad);

// T chi_E evaluated at every cell center of F, in F's cell order.
std::vector<double> apply_T_on_cells(const LatticeSet& E, const LatticeSet& F, const QuadratureSpec& quad);

// T* chi_F evaluated at every cell center of E, in E's cell order.
std::vector<double> apply_T_star_on_cells(const LatticeSet& F, const LatticeSet& E, const QuadratureSpec& quad);

// <T chi_E, chi_F>, summed over the cells of F.
double pairing(const LatticeSet& E, const LatticeSet& F, const QuadratureSpec& quad);

// <chi_E, T* chi_F>, summed over the cells of E.
double pairing_adjoint(const LatticeSet& E, const LatticeSet& F, const QuadratureSpec& quad);

// <T f, chi_F> = sum_j 2^j <T chi_{E_j}, chi_F>.
double apply_T_step(const StepFunction& f, const LatticeSet& F, const QuadratureSpec& quad);

// <T f, g> for step functions f and g.
double bilinear(const StepFunction& f, const StepFunction& g, const QuadratureSpec& quad);

// Step actually used for a call on sets with the given resolutions.
double effective_step(const QuadratureSpec& quad, double finest_delta);

}  // namespace mclab
