#pragma once

// Sampled parameter towers over lattice sets, and numerical checks of the two
// multilinear lower bounds together with their exponent bookkeeping.

#include "mclab/bands.hpp"
#include "mclab/lattice.hpp"
#include "mclab/operator.hpp"
#include "mclab/rational.hpp"

#include <array>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mclab {

// alpha: lower bound for T chi_E on F (or the average 𝒯(E,F)/|F|);
// beta: the dual quantity for T* chi_F on E.
struct InteractionStats {
    double alpha = 0.0;
    double beta = 0.0;
};

class TowerConstructionError : public std::runtime_error {
public:
    TowerConstructionError(int failed_level, const std::string& what)
        : std::runtime_error(what), failed_level_(failed_level) {}
    int failed_level() const { return failed_level_; }

private:
    int failed_level_;
};

// E[0] supplies x0 and the even levels, F[0] the odd ones. A second entry
// replaces the first at the top level: F.back() when K is odd, E.back() when
// K is even. stats[i] belongs to the i-th pair (E[min(i,|E|-1)], F[min(i,|F|-1)]).
struct TowerInputs {
    std::vector<LatticeSet> E;
    std::vector<LatticeSet> F;
    std::vector<InteractionStats> stats;
};

struct TowerOptions {
    int samples_per_level = 64;
    int branch = 4;        // children drawn per good parent
    int retries = 16;      // fresh x0 draws before giving up
    double grid_step = 0;  // 0: auto from the widths and the lattice resolution
    double c_n = 0;        // 0: 1/(4n)
    int jobs = 1;
};

struct TowerSample {
    std::vector<double> t;
    int parent = -1;     // index into the previous level
    double slice = 0.0;  // measure of admissible extensions seen from the parent
};

struct TowerLevel {
    int k = 0;
    int target = 0;  // index into OmegaTower::targets
    bool plus = true;  // sign of h(t_k) in Phi_k
    double width = 0.0;  // alpha or beta of the schedule; slots need c_n * width
    std::vector<TowerSample> samples;
    double acceptance = 0.0;  // mean admissible measure per parent, over width
    int parents = 0;
    int good_parents = 0;
};

struct OmegaTower {
    int n = 0;
    Point x0;
    double c_n = 0.0;
    double grid_step = 0.0;
    int attempts = 0;
    std::vector<LatticeSet> targets;
    std::vector<std::string> target_names;
    std::vector<InteractionStats> stats;
    std::vector<TowerLevel> levels;

    int depth() const { return static_cast<int>(levels.size()); }
};

// Greedy tower of depth K. Every retained sample is re-checked for nesting,
// separation and membership before returning.
OmegaTower grow_tower(const TowerInputs& inputs, int K, const TowerOptions& options, std::mt19937_64& rng);

// Grid points s with x0 + Phi_{k-1}(prefix) +- h(s) in the level-k target and
// |s - t_j| >= c_n * width for every earlier coordinate.
std::vector<double> admissible_extensions(const OmegaTower& tower, int k, const std::vector<double>& prefix);

// Re-check of the three tower invariants; the first violation, or nullopt.
std::optional<std::string> tower_violation(const OmegaTower& tower);

struct JacobianChain {
    double integral = 0.0;  // mean over starts of the integral of J over the fiber
    double bound = 0.0;     // alpha2^n alpha1^{n(n-1)/2} (beta1/alpha1)^{n-1}
    double constant = 0.0;  // integral / (n! bound)
    int starts = 0;
    int paths = 0;
};

// For a tower of depth 2n: fix t0 among the level-n samples and integrate the
// Jacobian of Phi_{2n} in the last n coordinates over the admissible
// completions, by random paths weighted with the product of slice measures.
JacobianChain jacobian_chain(const OmegaTower& tower, int starts, int paths, std::mt19937_64& rng);

enum class CheckStatus { pass, fail, inconclusive };
std::string to_string(CheckStatus s);

struct MultilinearOptions {
    double c = 0.0;  // pass threshold on |E2|/bound or |F2|/bound; 0 selects the default
    std::optional<double> rho;  // stands in for alpha2 in the upper-bound lemma
    // Pass to the half-level set even when the raw minimum is positive. The
    // raw minimum over a discretized set is often a single boundary cell.
    bool always_halve = false;
};

// Defaults calibrated on the quasi-extremal pairs of the test corpus.
double default_mlE_constant();
double default_mlF_constant();

struct MlEReport {
    int n = 0;
    InteractionStats first;   // (E1, F)
    InteractionStats second;  // (E2, F)
    bool halved = false;      // F replaced by its half-level set
    double measure_F = 0.0;
    double measure_E2 = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
    double c = 0.0;
    CheckStatus status = CheckStatus::inconclusive;
    std::string note;
};

MlEReport verify_mlE(const LatticeSet& E1, const LatticeSet& E2, const LatticeSet& F, const QuadratureSpec& quad,
                     const MultilinearOptions& options = {});

// Exponents of alpha1, alpha2, beta1, beta2 in a lower bound for |F2|.
struct ExponentCandidate {
    Rational r1, r2, s1, s2;
    std::string origin;
};

struct CandidateCheck {
    bool r_sum = false;   // r1 + r2 = n(n-1)/2
    bool s_sum = false;   // s1 + s2 = n
    bool strict = false;  // s2/q_n' - r2/q_n - 1 > 0
    Rational margin;      // s2/q_n' - r2/q_n - 1

    bool ok() const { return r_sum && s_sum && strict; }
};

CandidateCheck check_candidate(int n, const ExponentCandidate& c);

// Candidate from one configuration of the case analysis: role of the last
// position and the band counts after dropping. nullopt when the counts are
// outside the ranges the case analysis allows.
std::optional<ExponentCandidate> candidate_from_counts(int n, IndexRole last, const BandCounts& counts);

// The two base candidates followed by every distinct candidate reachable
// from admissible counts, in a fixed order.
std::vector<ExponentCandidate> mlF_candidates(int n);

struct ScoredCandidate {
    ExponentCandidate candidate;
    CandidateCheck check;
    double bound = 0.0;
    double ratio = 0.0;  // |F2| / bound
};

struct MlFReport {
    int n = 0;
    InteractionStats first;   // (E, F1)
    InteractionStats second;  // (E, F2), alpha possibly replaced by rho
    bool halved = false;
    double measure_F2 = 0.0;
    std::vector<ScoredCandidate> candidates;
    int best = -1;                   // largest |F2| / bound
    double max_bound_ratio = 0.0;    // max over valid candidates of bound / |F2|
    double best_ratio = 0.0;
    double c = 0.0;
    CheckStatus status = CheckStatus::inconclusive;
    std::string note;
};

MlFReport verify_mlF(const LatticeSet& E, const LatticeSet& F1, const LatticeSet& F2, const QuadratureSpec& quad,
                     const MultilinearOptions& options = {});

enum class HypothesisSide { one, two };

// e = (u1..u4) for side one, (v1..v4) for side two.
struct HypothesisExponents {
    HypothesisSide side = HypothesisSide::one;
    std::array<Rational, 4> e{};
    Rational r;
    Rational s;
};

struct HypothesisCheck {
    bool ok = false;
    std::string violated;  // empty when ok
    // Exponents of |E| and |F| in the restricted weak-type bound the
    // hypothesis yields after substituting alpha and beta.
    Rational exponent_E;
    Rational exponent_F;

    explicit operator bool() const { return ok; }
};

// Requires 1 < r < s.
HypothesisCheck check_hypothesis_exponents(const HypothesisExponents& he);

// Exponents of the upper-bound lemma read as side-two exponents, and of the
// lower-bound lemma read as side-one exponents, at (r, s) = (p_n, q_n).
HypothesisExponents side_two_instance(int n, const ExponentCandidate& c);
HypothesisExponents side_one_from_mlE(int n);

}  // namespace mclab
