#pragma once

// Moment curve h(t) = (t, t^2, ..., t^n), anisotropic dilations, alternating
// curve sums and their Jacobians.

#include "mclab/rational.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mclab {

using Point = std::vector<double>;

struct CurveConfig {
    int n = 2;

    explicit CurveConfig(int dim);
};

// Exact endpoint exponents p_n = (n+1)/2, q_n = n(n+1)/(2(n-1)) and their
// duals, plus optional Lorentz indices restricted to the admissible range
// u < q_n, v > p_n, u < v.
struct ExponentProfile {
    int n;
    Rational p;
    Rational q;
    Rational p_dual;
    Rational q_dual;
    std::optional<double> u;
    std::optional<double> v;

    explicit ExponentProfile(int dim);
    ExponentProfile(int dim, double u_index, double v_index);

    double p_value() const { return to_double(p); }
    double q_value() const { return to_double(q); }
    double p_dual_value() const { return to_double(p_dual); }
    double q_dual_value() const { return to_double(q_dual); }
};

Point moment_curve(const CurveConfig& cfg, double t);

// h'(t) = (1, 2t, ..., n t^{n-1}).
Point moment_curve_derivative(const CurveConfig& cfg, double t);

// D_R(x) = (R x_1, R^2 x_2, ..., R^n x_n). Rejects R <= 0.
Point dilate(const CurveConfig& cfg, double R, std::span<const double> x);

// h(t_1) - h(t_2) + h(t_3) - ... + (-1)^{k+1} h(t_k). Rejects empty t.
Point phi_k(const CurveConfig& cfg, std::span<const double> t);

// a_n with |det[h'(t_i)]| = a_n prod_{i<j} |t_j - t_i|, fixed once per n by
// dividing the determinant by the coordinate product at a generic node set.
double vandermonde_constant(int n);

// |det| of the n x n matrix with rows h'(t_i), computed by LU and checked
// against a_n prod_{i<j}|t_j - t_i|. Throws InvariantError on disagreement.
double vandermonde_jacobian(const CurveConfig& cfg, std::span<const double> t);

// Determinant of the derivative matrix only (no product check).
double derivative_matrix_determinant(const CurveConfig& cfg, std::span<const double> t);

double vandermonde_product(std::span<const double> t);

// Role of each position of a configuration in a band partition.
enum class IndexRole { dropped, free, quasi_free, bound };

// Index layout for slice coordinates over a configuration of length m
// (0-based positions). Dropped positions form the fixed prefix t^0; free and
// quasi-free positions carry tau in ascending order; each bound position
// carries an offset s from its anchor, again in ascending order.
struct SliceLayout {
    std::vector<IndexRole> role;
    std::vector<int> anchor;  // anchor position for bound (and quasi-free) entries, -1 otherwise

    int size() const { return static_cast<int>(role.size()); }
    int prefix_length() const;
    int tau_count() const;
    int offset_count() const;
    std::vector<int> tau_positions() const;
    std::vector<int> bound_positions() const;
};

// Rebuilds the full configuration (t0, t(tau, s)) from slice coordinates.
std::vector<double> reconstruct_configuration(const SliceLayout& layout,
                                              std::span<const double> t0,
                                              std::span<const double> tau,
                                              std::span<const double> s);

struct SlicedJacobian {
    double exact = 0.0;              // from exact polynomial derivative rows
    double finite_difference = 0.0;  // from a degree-exact central stencil
};

// |det d Phi_m(t0, t(tau, s)) / d tau|. Both routes are evaluated and must
// agree to relative 1e-8, otherwise InvariantError.
SlicedJacobian jacobian_sliced_both(const CurveConfig& cfg, std::span<const double> t0,
                                    const SliceLayout& layout, std::span<const double> tau,
                                    std::span<const double> s);

double jacobian_sliced(const CurveConfig& cfg, std::span<const double> t0,
                       const SliceLayout& layout, std::span<const double> tau,
                       std::span<const double> s);

}  // namespace mclab
