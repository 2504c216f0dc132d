#pragma once

// Dyadic bookkeeping for the weak-to-strong argument: interaction classes of
// the levels of a step function against a set F, half-level sets, the overlap
// audit and the two competing bounds for a class.
//
// F is passed as disjoint pieces, since natural test sets (unions of balls at
// different scales) do not share one lattice.

#include "mclab/geometry.hpp"
#include "mclab/lattice.hpp"
#include "mclab/operator.hpp"

#include <map>
#include <vector>

namespace mclab {

using SetPieces = std::vector<LatticeSet>;

double pieces_measure(const SetPieces& F);

// eps = 2^eps_exp, eta = 2^eta_exp, i in 1..spacing.
struct InteractionClassKey {
    int eps_exp = 0;
    int eta_exp = 0;
    int i = 1;

    double eps() const;
    double eta() const;
    auto operator<=>(const InteractionClassKey&) const = default;
};

struct LevelInteraction {
    int j = 0;
    double measure = 0.0;  // |E_j|
    double S = 0.0;        // S(E_j, F)
    int eps_exp = 0;       // eps/2 |E_j|^{1/r}|F|^{1/s'} < S <= eps |E_j|^{1/r}|F|^{1/s'}
    int eta_exp = 0;       // eta/2 < 2^{jr}|E_j| <= eta
};

struct Classification {
    double A = 0.0;
    double measure_F = 0.0;
    std::vector<LevelInteraction> levels;  // every level with S > 0, ascending j
    std::vector<int> zero;                 // levels with S = 0
    std::map<InteractionClassKey, std::vector<int>> classes;

    // ceil(A log2(1/eps)), at least 1.
    static int spacing(double A, int eps_exp);
};

// Smallest e with x <= 2^e, exact for every positive finite x.
int dyadic_ceiling_exponent(double x);

// r = p, s' = q' from the profile. Classes with equal (eps, eta) are split by
// j mod spacing, so indices in one class differ by at least the spacing.
Classification classify(const StepFunction& f, const SetPieces& F, const ExponentProfile& profile, double A,
                        const QuadratureSpec& quad);

// 8 B / (r log 2), B standing in for the unknown exponent bound.
double default_separation_constant(const ExponentProfile& profile, double B_est = 1.0);

enum class HalfLevelSide { G, E };

struct HalfLevelSet {
    int j = 0;
    SetPieces pieces;     // side G: aligned with F's pieces; side E: one piece inside E_j
    double measure = 0.0;
    double full = 0.0;    // S(E_j, F)
    double kept = 0.0;    // S(E_j, G_j), or S(E_{j}', F) on side E
};

// Side G: cells of F where T chi_{E_j} >= S(E_j,F) / (2|F|). Side E: cells of
// E_j where T* chi_F >= S(E_j,F) / (2|E_j|). Levels with S = 0 are skipped.
// kept >= full / 2 is re-verified; InvariantError otherwise.
std::vector<HalfLevelSet> half_level_sets(const StepFunction& f, const SetPieces& F, const QuadratureSpec& quad,
                                          HalfLevelSide side = HalfLevelSide::G);

struct OverlapPair {
    int a = 0;  // positions in the audited list
    int b = 0;
    double overlap = 0.0;
};

struct OverlapReport {
    double sum = 0.0;        // sum |G_j|
    double measure_F = 0.0;
    double ratio = 0.0;      // sum / |F|
    double C_audit = 4.0;
    bool pass = false;
    std::vector<OverlapPair> pairs;  // every pair with positive overlap
    OverlapPair worst;               // largest overlap, when any
};

// Side-G sets (aligned pieces) of one separated class.
OverlapReport overlap_audit(const std::vector<HalfLevelSet>& G, double measure_F, double C_audit = 4.0);

struct TwoBoundReport {
    InteractionClassKey key;
    int count = 0;
    double lambda = 0.0;    // (sum over all levels of 2^{ju}|E_j|^{u/r})^{1/u}
    int eta_exp = 0;        // class eta after dividing f by lambda
    double measured = 0.0;  // sum over the class of 2^j S(E_j,F), divided by lambda
    double bound1 = 0.0;    // eps eta^{(1-u)/r} |F|^{1/s'}
    double bound2 = 0.0;    // eta^{(s-u)/(rs)} |F|^{1/s'}
    double ratio1 = 0.0;
    double ratio2 = 0.0;
    double ratio_min = 0.0;  // measured / min(bound1, bound2)
    bool first_binding = false;
};

// Requires 1 <= u < s = q_n and a nonempty class from `cls`.
TwoBoundReport two_bound_check(const InteractionClassKey& key, const Classification& cls, const StepFunction& f,
                               const ExponentProfile& profile, double u);

}  // namespace mclab
