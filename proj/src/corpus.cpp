#include "mclab/corpus.hpp"

#include "mclab/error.hpp"
#include "mclab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mclab {

std::string to_string(PairKind kind) {
    switch (kind) {
        case PairKind::quasi: return "quasi";
        case PairKind::boxes: return "boxes";
        case PairKind::tube_box: return "tube_box";
    }
    return "unknown";
}

PairKind pair_kind_from_string(const std::string& name) {
    if (name == "quasi") return PairKind::quasi;
    if (name == "boxes") return PairKind::boxes;
    if (name == "tube_box") return PairKind::tube_box;
    throw PreconditionError("unknown pair kind '" + name + "'");
}

SetPair quasi_pair(int n, double eps, double r, const Point& center, double divisor, std::size_t budget) {
    require(divisor >= 4.0, "quasi_pair: divisor must be at least 4");
    const CurveConfig cfg(n);
    const double delta = eps * std::pow(r, n) / divisor;
    SetPair out;
    out.kind = PairKind::quasi;
    std::ostringstream label;
    label << "quasi eps=" << eps << " r=" << r;
    out.label = label.str();
    out.E = tube_set(cfg, eps, r, center, delta, budget);
    out.F = ball_set(cfg, eps, r, center, delta, budget);
    return out;
}

namespace {

int min_side_exp(int n, const CorpusOptions& o) { return n >= 3 ? o.min_side_exp + 1 : o.min_side_exp; }

std::vector<double> random_sides(int n, int lo_exp, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> e(static_cast<double>(lo_exp), 0.0);
    std::vector<double> s(static_cast<std::size_t>(n));
    for (auto& x : s) x = std::exp2(e(rng));
    return s;
}

LatticeSet centered_box(const Point& c, const std::vector<double>& sides, double delta, std::size_t budget) {
    std::vector<double> lo(c.size()), hi(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
        lo[k] = c[k] - sides[k] / 2;
        hi[k] = c[k] + sides[k] / 2;
    }
    return box_set(static_cast<int>(c.size()), delta, lo, hi, budget);
}

Point random_center(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Point c(static_cast<std::size_t>(n));
    for (auto& x : c) x = u(rng);
    return c;
}

}  // namespace

SetPair random_pair(int n, std::mt19937_64& rng, const CorpusOptions& options) {
    require(n >= 2, "random_pair: n must be at least 2");
    require(!options.kinds.empty(), "random_pair: no pair kinds selected");
    require(options.min_side_exp < 0, "random_pair: min_side_exp must be negative");
    std::uniform_int_distribution<std::size_t> pick(0, options.kinds.size() - 1);
    const PairKind kind = options.kinds[pick(rng)];
    const CurveConfig cfg(n);
    const int lo_exp = min_side_exp(n, options);
    std::uniform_real_distribution<double> t_dist(-0.9, 0.9);

    SetPair out;
    out.kind = kind;
    std::ostringstream label;
    switch (kind) {
        case PairKind::quasi: {
            std::uniform_int_distribution<int> a(1, n >= 3 ? 3 : 4);
            std::uniform_int_distribution<int> b(0, n >= 3 ? 1 : 2);
            const double eps = std::exp2(-a(rng));
            const double r = std::exp2(-b(rng));
            return quasi_pair(n, eps, r, random_center(n, rng), 4.0, options.budget);
        }
        case PairKind::boxes: {
            const Point c = random_center(n, rng);
            const auto sE = random_sides(n, lo_exp, rng);
            const auto sF = random_sides(n, lo_exp, rng);
            const double t0 = t_dist(rng);
            const Point h = moment_curve(cfg, t0);
            Point cF(c);
            for (std::size_t k = 0; k < cF.size(); ++k) cF[k] += h[k];
            const double delta = std::min(*std::min_element(sE.begin(), sE.end()),
                                          *std::min_element(sF.begin(), sF.end())) / 4;
            out.E = centered_box(c, sE, delta, options.budget);
            out.F = centered_box(cF, sF, delta, options.budget);
            label << "boxes t0=" << t0;
            break;
        }
        case PairKind::tube_box: {
            std::uniform_int_distribution<int> a(1, 3);
            const double eps = std::exp2(-a(rng));
            const Point c = random_center(n, rng);
            const auto sF = random_sides(n, lo_exp, rng);
            std::uniform_real_distribution<double> shift(-0.5, 0.5);
            Point cF(c);
            for (std::size_t k = 0; k < cF.size(); ++k) cF[k] += shift(rng) * sF[k];
            const double delta = std::min(eps / 4, *std::min_element(sF.begin(), sF.end()) / 4);
            out.E = tube_set(cfg, eps, 1.0, c, delta, options.budget);
            out.F = centered_box(cF, sF, delta, options.budget);
            label << "tube_box eps=" << eps;
            break;
        }
    }
    out.label = label.str();
    ensure(!out.E.empty() && !out.F.empty(), "random_pair: produced an empty set");
    return out;
}

std::vector<SetPair> random_corpus(int n, int count, std::uint64_t seed, const CorpusOptions& options, int jobs) {
    require(count >= 0, "random_corpus: count must be nonnegative");
    std::vector<SetPair> out(static_cast<std::size_t>(count));
    parallel_chunks(out.size(), jobs, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin; i < end; ++i) {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(i)};
            std::mt19937_64 rng(seq);
            out[i] = random_pair(n, rng, options);
        }
    });
    return out;
}

double restricted_weak_ratio(const LatticeSet& E, const LatticeSet& F, const QuadratureSpec& quad) {
    require(E.dimension() == F.dimension(), "restricted_weak_ratio: dimensions differ");
    require(!E.empty() && !F.empty(), "restricted_weak_ratio: empty set");
    const ExponentProfile prof(E.dimension());
    const double s = pairing(E, F, quad);
    return s / (std::pow(E.measure(), 1.0 / prof.p_value()) * std::pow(F.measure(), 1.0 / prof.q_dual_value()));
}

}  // namespace mclab
