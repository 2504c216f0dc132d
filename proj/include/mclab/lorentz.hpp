#pragma once

// Lorentz quasi-norms of step functions and the exponent region R_n.

#include "mclab/geometry.hpp"
#include "mclab/lattice.hpp"
#include "mclab/rational.hpp"

#include <limits>
#include <utility>
#include <vector>

namespace mclab {

struct LorentzIndex {
    double p = 1.0;
    double w = 1.0;  // secondary index, may be infinity

    LorentzIndex(double p_index, double w_index);
    bool weak() const { return w == std::numeric_limits<double>::infinity(); }
};

// A value taken on a set of the given measure.
struct Plateau {
    double value = 0.0;
    double measure = 0.0;
};

// 2^j on a set of the given measure.
struct DyadicLevel {
    int j = 0;
    double measure = 0.0;
};

// (int_0^inf (t^{1/p} f*(t))^w dt/t)^{1/w}, integrated exactly plateau by
// plateau; sup_t t^{1/p} f*(t) when w is infinite.
double rearrangement_norm(std::vector<Plateau> plateaus, const LorentzIndex& idx);

// The same quantity times (w/p)^{1/w}. This normalization gives |E|^{1/p} for
// every chi_E and is non-increasing in w; the plain one is not.
double rearrangement_norm_normalized(std::vector<Plateau> plateaus, const LorentzIndex& idx);

// (sum_j 2^{jw} |E_j|^{w/p})^{1/w}; sup_j 2^j |E_j|^{1/p} when w is infinite.
double dyadic_norm(const std::vector<DyadicLevel>& levels, const LorentzIndex& idx);

double lorentz_norm_rearrangement(const StepFunction& f, const LorentzIndex& idx);
double lorentz_norm_dyadic(const StepFunction& f, const LorentzIndex& idx);

using RationalPoint = std::pair<Rational, Rational>;

// Closed convex hull of (0,0), (1/p_n, 1/q_n), (1 - 1/q_n, 1 - 1/p_n), (1,1)
// in the (1/p, 1/q) square. Coinciding vertices are listed once.
struct ExponentRegion {
    std::vector<RationalPoint> vertices;  // counter-clockwise

    bool contains(const Rational& inv_p, const Rational& inv_q) const;
};

ExponentRegion region_Rn(const CurveConfig& cfg);

}  // namespace mclab
