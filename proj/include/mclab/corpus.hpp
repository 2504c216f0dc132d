#pragma once

// Set pairs for restricted weak-type estimates: quasi-extremal tube/ball
// pairs and randomized boxes placed so that T chi_E actually meets F.

#include "mclab/geometry.hpp"
#include "mclab/lattice.hpp"
#include "mclab/operator.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mclab {

enum class PairKind { quasi, boxes, tube_box };
std::string to_string(PairKind kind);
PairKind pair_kind_from_string(const std::string& name);

struct SetPair {
    PairKind kind = PairKind::quasi;
    std::string label;
    LatticeSet E{2, 1.0};
    LatticeSet F{2, 1.0};
};

// N_{eps,r}(center) against B_{eps,r}(center) at delta = eps r^n / divisor.
SetPair quasi_pair(int n, double eps, double r, const Point& center, double divisor = 4.0,
                   std::size_t budget = default_cell_budget());

struct CorpusOptions {
    std::vector<PairKind> kinds{PairKind::quasi, PairKind::boxes, PairKind::tube_box};
    // Smallest box side, as a power of two; n = 3 gets one step less.
    int min_side_exp = -4;
    std::size_t budget = default_cell_budget();
};

// Kind drawn uniformly from options.kinds.
SetPair random_pair(int n, std::mt19937_64& rng, const CorpusOptions& options = {});

// Pair i comes from its own generator seeded with (seed, n, i), so the corpus
// does not depend on how it is split across workers.
std::vector<SetPair> random_corpus(int n, int count, std::uint64_t seed, const CorpusOptions& options = {},
                                   int jobs = 1);

// <T chi_E, chi_F> / (|E|^{1/p_n} |F|^{1/q_n'}).
double restricted_weak_ratio(const LatticeSet& E, const LatticeSet& F, const QuadratureSpec& quad);

}  // namespace mclab
