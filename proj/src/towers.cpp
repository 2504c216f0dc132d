#include "mclab/towers.hpp"

#include "mclab/error.hpp"
#include "mclab/geometry.hpp"
#include "mclab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace mclab {

namespace {

struct LevelPlan {
    int target = 0;
    double width = 0.0;
};

// Level k (1-based) of a depth-K tower over inputs with |E| E-sets first in
// the target list, then the F-sets.
LevelPlan plan_level(const TowerInputs& in, int K, int k) {
    const int nE = static_cast<int>(in.E.size());
    const int nF = static_cast<int>(in.F.size());
    const bool top = k == K;
    if (k % 2 == 1) {
        const int f = (top && K % 2 == 1) ? nF - 1 : 0;
        const auto& st = in.stats[static_cast<std::size_t>(std::min(f, static_cast<int>(in.stats.size()) - 1))];
        return {nE + f, st.beta};
    }
    const int e = (top && K % 2 == 0) ? nE - 1 : 0;
    const auto& st = in.stats[static_cast<std::size_t>(std::min(e, static_cast<int>(in.stats.size()) - 1))];
    return {e, st.alpha};
}

double separation(const OmegaTower& tower, int k) {
    return tower.c_n * tower.levels[static_cast<std::size_t>(k - 1)].width;
}

int grid_size(double g) { return std::max(1, static_cast<int>(std::ceil(2.0 / g - 1e-9))); }

// Point x0 + Phi_{k-1}(prefix).
Point tower_base(const OmegaTower& tower, const std::vector<double>& prefix) {
    Point base = tower.x0;
    if (!prefix.empty()) {
        const CurveConfig cfg(tower.n);
        const Point p = phi_k(cfg, prefix);
        for (int i = 0; i < tower.n; ++i) base[static_cast<std::size_t>(i)] += p[static_cast<std::size_t>(i)];
    }
    return base;
}

bool member(const LatticeSet& set, const Point& base, bool plus, double s, Point& scratch) {
    double pw = 1.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        pw *= s;
        scratch[i] = plus ? base[i] + pw : base[i] - pw;
    }
    return set.contains_point(scratch);
}

std::string name_of(const char* stem, std::size_t i, std::size_t count) {
    return count == 1 ? std::string(stem) : std::string(stem) + std::to_string(i + 1);
}

// One attempt from a fixed x0; returns the failing level, or 0 on success.
int build_levels(OmegaTower& tower, int K, const TowerOptions& opt, std::mt19937_64& rng) {
    for (int k = 1; k <= K; ++k) {
        auto& level = tower.levels[static_cast<std::size_t>(k - 1)];
        level.samples.clear();
        level.acceptance = 0.0;
        level.parents = 0;
        level.good_parents = 0;
        if (tower.targets[static_cast<std::size_t>(level.target)].empty()) return k;

        std::vector<TowerSample> parents;
        if (k == 1)
            parents.push_back(TowerSample{});
        else
            parents = tower.levels[static_cast<std::size_t>(k - 2)].samples;

        const std::uint64_t level_seed = rng();
        const double need = tower.c_n * level.width;
        std::vector<std::vector<TowerSample>> children(parents.size());
        std::vector<double> accepted(parents.size(), 0.0);
        parallel_chunks(parents.size(), opt.jobs, [&](std::size_t begin, std::size_t end, std::size_t) {
            for (std::size_t p = begin; p < end; ++p) {
                const auto ext = admissible_extensions(tower, k, parents[p].t);
                const double measure = static_cast<double>(ext.size()) * tower.grid_step;
                accepted[p] = measure;
                if (measure < need || ext.empty()) continue;
                std::seed_seq seq{level_seed, static_cast<std::uint64_t>(p)};
                std::mt19937_64 local(seq);
                std::vector<double> picks;
                std::sample(ext.begin(), ext.end(), std::back_inserter(picks),
                            static_cast<std::size_t>(std::max(1, opt.branch)), local);
                for (double s : picks) {
                    TowerSample child;
                    child.t = parents[p].t;
                    child.t.push_back(s);
                    child.parent = k == 1 ? -1 : static_cast<int>(p);
                    child.slice = measure;
                    children[p].push_back(std::move(child));
                }
            }
        });

        level.parents = static_cast<int>(parents.size());
        double total = 0.0;
        std::vector<TowerSample> all;
        for (std::size_t p = 0; p < parents.size(); ++p) {
            total += accepted[p];
            if (!children[p].empty()) ++level.good_parents;
            for (auto& c : children[p]) all.push_back(std::move(c));
        }
        level.acceptance = total / static_cast<double>(parents.size()) / level.width;
        if (all.empty()) return k;
        if (static_cast<int>(all.size()) > opt.samples_per_level) {
            std::vector<TowerSample> kept;
            std::sample(std::make_move_iterator(all.begin()), std::make_move_iterator(all.end()),
                        std::back_inserter(kept), static_cast<std::size_t>(opt.samples_per_level), rng);
            all = std::move(kept);
        }
        level.samples = std::move(all);
    }
    return 0;
}

}  // namespace

std::vector<double> admissible_extensions(const OmegaTower& tower, int k, const std::vector<double>& prefix) {
    require(k >= 1 && k <= tower.depth(), "admissible_extensions: level out of range");
    require(static_cast<int>(prefix.size()) == k - 1, "admissible_extensions: prefix length must be k-1");
    const auto& level = tower.levels[static_cast<std::size_t>(k - 1)];
    const LatticeSet& target = tower.targets[static_cast<std::size_t>(level.target)];
    const double sep = separation(tower, k);
    const Point base = tower_base(tower, prefix);
    Point scratch(base.size());
    std::vector<double> out;
    const int grid = grid_size(tower.grid_step);
    for (int m = 0; m < grid; ++m) {
        const double s = -1.0 + (m + 0.5) * tower.grid_step;
        bool apart = true;
        for (double t : prefix)
            if (std::fabs(s - t) < sep) {
                apart = false;
                break;
            }
        if (apart && member(target, base, level.plus, s, scratch)) out.push_back(s);
    }
    return out;
}

std::optional<std::string> tower_violation(const OmegaTower& tower) {
    Point scratch(static_cast<std::size_t>(tower.n));
    for (int k = 1; k <= tower.depth(); ++k) {
        const auto& level = tower.levels[static_cast<std::size_t>(k - 1)];
        const double sep = separation(tower, k);
        for (std::size_t i = 0; i < level.samples.size(); ++i) {
            const auto& smp = level.samples[i];
            std::ostringstream where;
            where << "level " << k << " sample " << i << ": ";
            if (static_cast<int>(smp.t.size()) != k) return where.str() + "wrong length";
            if (k > 1) {
                const auto& prev = tower.levels[static_cast<std::size_t>(k - 2)].samples;
                if (smp.parent < 0 || smp.parent >= static_cast<int>(prev.size()))
                    return where.str() + "dangling parent";
                if (!std::equal(prev[static_cast<std::size_t>(smp.parent)].t.begin(),
                                prev[static_cast<std::size_t>(smp.parent)].t.end(), smp.t.begin()))
                    return where.str() + "does not extend its parent";
            }
            const double s = smp.t.back();
            if (std::fabs(s) > 1.0) return where.str() + "outside [-1,1]";
            for (int j = 0; j + 1 < k; ++j)
                if (std::fabs(s - smp.t[static_cast<std::size_t>(j)]) < sep)
                    return where.str() + "separation below c_n * width";
            const std::vector<double> prefix(smp.t.begin(), smp.t.end() - 1);
            if (!member(tower.targets[static_cast<std::size_t>(level.target)], tower_base(tower, prefix), level.plus, s,
                        scratch))
                return where.str() + "x0 + Phi_k(t) misses " + tower.target_names[static_cast<std::size_t>(level.target)];
        }
    }
    return std::nullopt;
}

OmegaTower grow_tower(const TowerInputs& inputs, int K, const TowerOptions& options, std::mt19937_64& rng) {
    require(!inputs.E.empty() && !inputs.F.empty(), "grow_tower: need E and F targets");
    require(inputs.E.size() <= 2 && inputs.F.size() <= 2, "grow_tower: at most two sets per side");
    require(!inputs.stats.empty() && inputs.stats.size() == std::max(inputs.E.size(), inputs.F.size()),
            "grow_tower: one InteractionStats per pair");
    const int n = inputs.E.front().dimension();
    for (const auto* side : {&inputs.E, &inputs.F})
        for (const auto& s : *side) require(s.dimension() == n, "grow_tower: mixed dimensions");
    require(!inputs.E.front().empty(), "grow_tower: E is empty, no base point");
    require(K >= 1 && K <= 2 * n, "grow_tower: depth must lie in 1..2n");
    require(options.samples_per_level >= 1 && options.branch >= 1 && options.retries >= 1,
            "grow_tower: sampling counts must be positive");

    OmegaTower tower;
    tower.n = n;
    tower.c_n = options.c_n > 0 ? options.c_n : 1.0 / (4.0 * n);
    for (std::size_t i = 0; i < inputs.E.size(); ++i) {
        tower.targets.push_back(inputs.E[i]);
        tower.target_names.push_back(name_of("E", i, inputs.E.size()));
    }
    for (std::size_t i = 0; i < inputs.F.size(); ++i) {
        tower.targets.push_back(inputs.F[i]);
        tower.target_names.push_back(name_of("F", i, inputs.F.size()));
    }
    tower.stats = inputs.stats;

    double min_width = std::numeric_limits<double>::infinity();
    double min_delta = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= K; ++k) {
        const LevelPlan lp = plan_level(inputs, K, k);
        require(lp.width > 0 && std::isfinite(lp.width), "grow_tower: stats must be positive");
        TowerLevel level;
        level.k = k;
        level.target = lp.target;
        level.plus = k % 2 == 1;
        level.width = lp.width;
        tower.levels.push_back(level);
        min_width = std::min(min_width, lp.width);
        min_delta = std::min(min_delta, tower.targets[static_cast<std::size_t>(lp.target)].delta());
    }
    double g = options.grid_step;
    if (g <= 0) g = std::max(std::min(min_delta / 2.0, tower.c_n * min_width / 8.0), 1.0 / 8192.0);
    tower.grid_step = 2.0 / grid_size(g);

    const LatticeSet& base_set = inputs.E.front();
    std::uniform_int_distribution<std::size_t> pick(0, base_set.size() - 1);
    int deepest_failure = 0;
    for (int attempt = 1; attempt <= options.retries; ++attempt) {
        tower.attempts = attempt;
        tower.x0 = base_set.cell_center(pick(rng));
        const int failed = build_levels(tower, K, options, rng);
        if (failed == 0) {
            if (auto bad = tower_violation(tower)) throw InvariantError("grow_tower: " + *bad);
            return tower;
        }
        deepest_failure = std::max(deepest_failure, failed);
        // Nothing to retry when the target itself is empty.
        if (tower.targets[static_cast<std::size_t>(tower.levels[static_cast<std::size_t>(failed - 1)].target)].empty())
            break;
    }
    std::ostringstream msg;
    msg << "grow_tower: no admissible extensions at level " << deepest_failure << " after " << tower.attempts
        << " base points";
    throw TowerConstructionError(deepest_failure, msg.str());
}

JacobianChain jacobian_chain(const OmegaTower& tower, int starts, int paths, std::mt19937_64& rng) {
    const int n = tower.n;
    require(tower.depth() == 2 * n, "jacobian_chain: needs a tower of depth 2n");
    require(starts >= 1 && paths >= 1, "jacobian_chain: counts must be positive");
    const auto& base_level = tower.levels[static_cast<std::size_t>(n - 1)].samples;
    require(!base_level.empty(), "jacobian_chain: empty level n");

    std::vector<std::size_t> order(base_level.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> chosen;
    std::sample(order.begin(), order.end(), std::back_inserter(chosen),
                static_cast<std::size_t>(starts), rng);

    const double a_n = vandermonde_constant(n);
    double total = 0.0;
    for (std::size_t idx : chosen) {
        double sum = 0.0;
        for (int p = 0; p < paths; ++p) {
            std::vector<double> t = base_level[idx].t;
            double weight = 1.0;
            for (int k = n + 1; k <= 2 * n; ++k) {
                const auto ext = admissible_extensions(tower, k, t);
                if (ext.empty()) {
                    weight = 0.0;
                    break;
                }
                std::uniform_int_distribution<std::size_t> d(0, ext.size() - 1);
                t.push_back(ext[d(rng)]);
                weight *= static_cast<double>(ext.size()) * tower.grid_step;
            }
            if (weight == 0.0) continue;
            const std::vector<double> last(t.end() - n, t.end());
            sum += weight * a_n * vandermonde_product(last);
        }
        total += sum / paths;
    }

    JacobianChain out;
    out.starts = static_cast<int>(chosen.size());
    out.paths = paths;
    out.integral = total / static_cast<double>(chosen.size());
    const double a1 = tower.stats.front().alpha;
    const double b1 = tower.stats.front().beta;
    const double a2 = tower.stats.back().alpha;
    out.bound = std::pow(a2, n) * std::pow(a1, n * (n - 1) / 2.0) * std::pow(b1 / a1, n - 1);
    out.constant = out.integral / (std::tgamma(n + 1.0) * out.bound);
    return out;
}

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

// Smallest ratio seen on the quasi-extremal pairs N_{eps,r}, B_{eps,r} with
// eps in {1/2, 1/4, 1/8}, r in {1, 1/2, 1/4}, n in {2,3} (1.7 and 4.7),
// rounded down with room to spare.
double default_mlE_constant() { return 0.5; }
double default_mlF_constant() { return 0.5; }

namespace {

struct Refined {
    std::vector<std::vector<double>> values;  // per set, on the kept cells
    LatticeSet kept;
    bool halved = false;
};

// Values of per-set functions on the cells of `base`; if any vanishes
// somewhere, keep only the cells clearing half the average of every function.
Refined refine_cells(const LatticeSet& base, std::vector<std::vector<double>> values, bool always) {
    Refined out{std::move(values), base, false};
    bool zero = always;
    for (const auto& v : out.values)
        if (!v.empty() && *std::min_element(v.begin(), v.end()) <= 0.0) zero = true;
    if (!zero) return out;

    out.halved = true;
    std::vector<double> threshold;
    for (const auto& v : out.values)
        threshold.push_back(std::accumulate(v.begin(), v.end(), 0.0) / (2.0 * static_cast<double>(v.size())));
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < base.size(); ++c) {
        bool ok = true;
        for (std::size_t j = 0; j < out.values.size(); ++j)
            if (out.values[j][c] < threshold[j]) ok = false;
        if (ok) keep.push_back(c);
    }
    std::vector<bool> mask(base.size(), false);
    for (auto c : keep) mask[c] = true;
    out.kept = base.filter([&](std::size_t c) { return mask[c]; });
    for (auto& v : out.values) {
        std::vector<double> w;
        for (auto c : keep) w.push_back(v[c]);
        v = std::move(w);
    }
    return out;
}

double min_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()); }

double sum_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

Rational tri(int n) { return Rational(n * (n - 1), 2); }

Rational q_of(int n) { return Rational(n * (n + 1), 2 * (n - 1)); }

}  // namespace

MlEReport verify_mlE(const LatticeSet& E1, const LatticeSet& E2, const LatticeSet& F, const QuadratureSpec& quad,
                     const MultilinearOptions& options) {
    const int n = F.dimension();
    require(E1.dimension() == n && E2.dimension() == n, "verify_mlE: mixed dimensions");
    require(!E1.empty() && !E2.empty() && !F.empty(), "verify_mlE: empty set");

    MlEReport rep;
    rep.n = n;
    rep.c = options.c > 0 ? options.c : default_mlE_constant();
    rep.measure_E2 = E2.measure();

    auto ref = refine_cells(F, {apply_T_on_cells(E1, F, quad), apply_T_on_cells(E2, F, quad)}, options.always_halve);
    rep.halved = ref.halved;
    rep.measure_F = ref.kept.measure();
    if (ref.kept.empty()) {
        rep.note = "half-level set of F is empty";
        return rep;
    }
    const double vol = ref.kept.cell_volume();
    rep.first = {min_of(ref.values[0]), sum_of(ref.values[0]) * vol / E1.measure()};
    rep.second = {min_of(ref.values[1]), sum_of(ref.values[1]) * vol / E2.measure()};
    if (rep.first.alpha <= 0 || rep.second.alpha <= 0 || rep.first.beta <= 0) {
        rep.note = "degenerate measured constants";
        return rep;
    }
    if (rep.second.alpha < rep.first.alpha) {
        rep.note = "premise alpha2 >= alpha1 fails";
        return rep;
    }
    const double a1 = rep.first.alpha, a2 = rep.second.alpha, b1 = rep.first.beta;
    rep.bound = std::pow(a2, n) * std::pow(a1, n * (n - 1) / 2.0) * std::pow(b1 / a1, n - 1);
    rep.ratio = rep.measure_E2 / rep.bound;
    rep.status = rep.ratio >= rep.c ? CheckStatus::pass : CheckStatus::fail;
    return rep;
}

CandidateCheck check_candidate(int n, const ExponentCandidate& c) {
    require(n >= 2, "check_candidate: n >= 2");
    const Rational q = q_of(n);
    CandidateCheck out;
    out.r_sum = c.r1 + c.r2 == tri(n);
    out.s_sum = c.s1 + c.s2 == Rational(n);
    out.margin = c.s2 / dual(q) - c.r2 / q - 1;
    out.strict = out.margin > 0;
    return out;
}

std::optional<ExponentCandidate> candidate_from_counts(int n, IndexRole last, const BandCounts& counts) {
    require(n >= 2, "candidate_from_counts: n >= 2");
    const int k = counts.k;
    const int M1 = counts.M1, M2 = counts.M2, N = counts.N;
    if (k < n || k > 2 * n - 1 || M1 < 0 || M2 < 0 || N < 1) return std::nullopt;
    const int K = (k + 1) / 2;
    const int a = n - M1 - M2 - K;  // power of beta2/alpha1
    const int b = M1 + M2 + K;      // power of beta1/alpha1
    const Rational T = tri(n);
    if (M1 + K > n - N + 1) return std::nullopt;

    std::ostringstream tag;
    tag << "k=" << k << " M1=" << M1 << " M2=" << M2 << " N=" << N;
    ExponentCandidate c;
    switch (last) {
        case IndexRole::free: {
            if (N == 1) {
                if (M1 + M2 + K + 1 > n) return std::nullopt;
                c = {T, 0, n - 2, 2, "last free alone in its band"};
                return c;
            }
            if (2 * M2 > N - 1 || b >= n) return std::nullopt;
            const int X = std::max(0, N * (N - 1) / 2 + M1 + K - n);
            c = {T - X, X, b - 1, a + 1, "last free, " + tag.str()};
            return c;
        }
        case IndexRole::quasi_free: {
            if (N < 2 || M2 < 1 || 2 * M2 > N || a < 0) return std::nullopt;
            const int X = std::max(0, N * (N - 1) / 2 + M1 + K - n);
            c = {T - X, X, b - 2, a + 2, "last quasi-free, " + tag.str()};
            return c;
        }
        case IndexRole::bound: {
            if (2 * M2 > N - 1 || a < 0) return std::nullopt;
            if (counts.R2 != 0 && counts.R2 < 2) return std::nullopt;
            const int X = N * (N - 1) / 2 + M1 + K - n - 2;
            c = {T - X, X, b - 1, a + 1, "last bound, " + tag.str()};
            return c;
        }
        case IndexRole::dropped: return std::nullopt;
    }
    return std::nullopt;
}

std::vector<ExponentCandidate> mlF_candidates(int n) {
    require(n >= 2, "mlF_candidates: n >= 2");
    const Rational T = tri(n);
    std::vector<ExponentCandidate> out{{T, 0, 0, n, "beta1 >= alpha1"}, {T, 0, n - 2, 2, "last free alone in its band"}};
    std::map<std::tuple<Rational, Rational, Rational, Rational>, bool> seen;
    for (const auto& c : out) seen[{c.r1, c.r2, c.s1, c.s2}] = true;
    for (auto role : {IndexRole::free, IndexRole::quasi_free, IndexRole::bound})
        for (int k = n; k <= 2 * n - 1; ++k)
            for (int N = 1; N <= n; ++N)
                for (int M1 = 0; M1 <= n; ++M1)
                    for (int M2 = 0; M2 <= n; ++M2) {
                        BandCounts bc;
                        bc.k = k;
                        bc.N = N;
                        bc.M1 = M1;
                        bc.M2 = M2;
                        const auto c = candidate_from_counts(n, role, bc);
                        if (!c) continue;
                        auto key = std::make_tuple(c->r1, c->r2, c->s1, c->s2);
                        if (seen.count(key)) continue;
                        seen[key] = true;
                        out.push_back(*c);
                    }
    return out;
}

MlFReport verify_mlF(const LatticeSet& E, const LatticeSet& F1, const LatticeSet& F2, const QuadratureSpec& quad,
                     const MultilinearOptions& options) {
    const int n = E.dimension();
    require(F1.dimension() == n && F2.dimension() == n, "verify_mlF: mixed dimensions");
    require(!E.empty() && !F1.empty() && !F2.empty(), "verify_mlF: empty set");

    MlFReport rep;
    rep.n = n;
    rep.c = options.c > 0 ? options.c : default_mlF_constant();
    rep.measure_F2 = F2.measure();

    auto ref = refine_cells(E, {apply_T_star_on_cells(F1, E, quad), apply_T_star_on_cells(F2, E, quad)}, options.always_halve);
    rep.halved = ref.halved;
    if (ref.kept.empty()) {
        rep.note = "half-level set of E is empty";
        return rep;
    }
    const double vol = ref.kept.cell_volume();
    rep.first = {sum_of(ref.values[0]) * vol / F1.measure(), min_of(ref.values[0])};
    rep.second = {sum_of(ref.values[1]) * vol / F2.measure(), min_of(ref.values[1])};
    if (options.rho) {
        require(*options.rho > 0 && *options.rho <= rep.first.alpha, "verify_mlF: rho must lie in (0, alpha1]");
        rep.second.alpha = *options.rho;
    }
    if (rep.first.alpha <= 0 || rep.second.alpha <= 0 || rep.first.beta <= 0 || rep.second.beta <= 0) {
        rep.note = "degenerate measured constants";
        return rep;
    }
    if (rep.second.alpha > rep.first.alpha || rep.second.beta < rep.first.beta) {
        rep.note = "premise alpha2 <= alpha1, beta2 >= beta1 fails";
        return rep;
    }

    const double la1 = std::log(rep.first.alpha), la2 = std::log(rep.second.alpha);
    const double lb1 = std::log(rep.first.beta), lb2 = std::log(rep.second.beta);
    double worst = 0.0;
    for (const auto& c : mlF_candidates(n)) {
        ScoredCandidate sc{c, check_candidate(n, c), 0.0, 0.0};
        sc.bound = std::exp(to_double(c.r1) * la1 + to_double(c.r2) * la2 + to_double(c.s1) * lb1 +
                            to_double(c.s2) * lb2);
        sc.ratio = rep.measure_F2 / sc.bound;
        if (sc.check.ok()) {
            worst = std::max(worst, sc.bound / rep.measure_F2);
            if (rep.best < 0 || sc.ratio > rep.candidates[static_cast<std::size_t>(rep.best)].ratio)
                rep.best = static_cast<int>(rep.candidates.size());
        }
        rep.candidates.push_back(std::move(sc));
    }
    ensure(rep.best >= 0, "verify_mlF: no exponent candidate satisfies the strict inequality");
    rep.max_bound_ratio = worst;
    rep.best_ratio = rep.candidates[static_cast<std::size_t>(rep.best)].ratio;
    rep.status = rep.best_ratio >= rep.c ? CheckStatus::pass : CheckStatus::fail;
    return rep;
}

HypothesisCheck check_hypothesis_exponents(const HypothesisExponents& he) {
    require(he.r > 1 && he.s > he.r, "check_hypothesis_exponents: need 1 < r < s");
    const Rational rd = dual(he.r);
    const Rational sd = dual(he.s);
    const auto& e = he.e;
    const Rational U = e[0] + e[1];
    const Rational V = e[2] + e[3];

    HypothesisCheck out;
    Rational want_U, want_V, margin;
    if (he.side == HypothesisSide::one) {
        want_U = rd / (rd - sd);
        want_V = he.r / (he.s - he.r);
        margin = e[1] / he.r - e[3] / rd - 1;
        // alpha = S/2|F|, beta = S/|E| in alpha^U beta^V <~ |E|.
        out.exponent_E = (1 + V) / (U + V);
        out.exponent_F = U / (U + V);
    } else {
        want_U = sd / (rd - sd);
        want_V = he.s / (he.s - he.r);
        margin = e[3] / sd - e[1] / he.s - 1;
        // alpha = S/|F|, beta = S/2|E| in alpha^U beta^V <~ |F|.
        out.exponent_E = V / (U + V);
        out.exponent_F = (1 + U) / (U + V);
    }
    const char* names[2][3] = {{"u1+u2", "u3+u4", "u2/r - u4/r' - 1 > 0"},
                               {"v1+v2", "v3+v4", "v4/s' - v2/s - 1 > 0"}};
    const int side = he.side == HypothesisSide::one ? 0 : 1;
    if (U != want_U)
        out.violated = std::string(names[side][0]) + " = " + to_string(U) + ", expected " + to_string(want_U);
    else if (V != want_V)
        out.violated = std::string(names[side][1]) + " = " + to_string(V) + ", expected " + to_string(want_V);
    else if (!(margin > 0))
        out.violated = std::string(names[side][2]) + " fails with " + to_string(margin);
    else if (out.exponent_E != 1 / he.r || out.exponent_F != 1 / sd)
        out.violated = "restricted weak-type exponents (" + to_string(out.exponent_E) + ", " +
                       to_string(out.exponent_F) + ") differ from (1/r, 1/s')";
    out.ok = out.violated.empty();
    return out;
}

HypothesisExponents side_two_instance(int n, const ExponentCandidate& c) {
    require(n >= 2, "side_two_instance: n >= 2");
    return {HypothesisSide::two, {c.r1, c.r2, c.s1, c.s2}, Rational(n + 1, 2), q_of(n)};
}

HypothesisExponents side_one_from_mlE(int n) {
    require(n >= 2, "side_one_from_mlE: n >= 2");
    return {HypothesisSide::one, {tri(n) - (n - 1), Rational(n), Rational(n - 1), Rational(0)}, Rational(n + 1, 2),
            q_of(n)};
}

}  // namespace mclab
