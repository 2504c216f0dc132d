#include "mclab/bands.hpp"

#include "mclab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

namespace mclab {

namespace {

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

void check_class(double fraction, double promised, const SamplingPolicy& policy, const char* what) {
    ensure(fraction >= (1.0 - policy.tolerance) * promised,
           std::string(what) + ": most frequent class below the promised fraction");
}

int band_of(const std::vector<std::vector<int>>& bands, int pos) {
    for (std::size_t b = 0; b < bands.size(); ++b)
        if (std::find(bands[b].begin(), bands[b].end(), pos) != bands[b].end()) return static_cast<int>(b);
    return -1;
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

// Bound pairs (position, band minimum) for bands of three or more.
std::vector<std::pair<int, int>> bound_pairs(const std::vector<std::vector<int>>& bands) {
    std::vector<std::pair<int, int>> out;
    for (const auto& b : bands)
        if (b.size() >= 3)
            for (std::size_t i = 1; i < b.size(); ++i) out.emplace_back(b[i], b[0]);
    return out;
}

void sort_bands(std::vector<std::vector<int>>& bands) {
    for (auto& b : bands) std::sort(b.begin(), b.end());
    std::sort(bands.begin(), bands.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

void require_configs(const Ensemble& ensemble) {
    require(!ensemble.empty(), "bands: empty ensemble");
    const std::size_t m = ensemble.front().size();
    require(m >= 1, "bands: empty configuration");
    for (const auto& t : ensemble) {
        require(t.size() == m, "bands: configurations of different lengths");
        for (double x : t) require(std::isfinite(x), "bands: non-finite entry");
    }
}

// Separations the tower sets guarantee: odd positions (even 1-based indices)
// sit c_n alpha1 away from everything earlier, all pairs at least c_n beta1.
void require_tower_separation(const Ensemble& ensemble, const BandParams& p) {
    for (const auto& t : ensemble)
        for (std::size_t k = 1; k < t.size(); ++k)
            for (std::size_t j = 0; j < k; ++j) {
                const double d = std::fabs(t[k] - t[j]);
                require(d >= p.c_n * p.beta1, "refine_partition: pair closer than c_n beta1");
                if (k % 2 == 1) require(d >= p.c_n * p.alpha1, "refine_partition: even index closer than c_n alpha1");
            }
}

struct LoopOutcome {
    std::vector<std::vector<int>> bands;
    Ensemble survivors;
    double outer = 0.0;  // final delta or rho
    double inner = 0.0;  // final delta' or rho'
    int iterations = 0;
};

// The shared refinement loop over the positions in sigma with gap threshold
// outer*scale and bound window inner*scale.
LoopOutcome refine_loop(Ensemble omega, const std::vector<int>& sigma, double outer, double inner, double scale,
                        double eps, int n, const SamplingPolicy& policy) {
    for (int iter = 1; iter <= n; ++iter) {
        auto g = gap_partition(omega, sigma, outer * scale, policy);
        omega = std::move(g.sub);
        const auto pairs = bound_pairs(g.bands);
        Ensemble good, bad;
        for (auto& t : omega) {
            bool ok = true;
            for (auto [i, j] : pairs)
                if (std::fabs(t[static_cast<std::size_t>(i)] - t[static_cast<std::size_t>(j)]) >= inner * scale) {
                    ok = false;
                    break;
                }
            (ok ? good : bad).push_back(std::move(t));
        }
        if (2 * good.size() >= good.size() + bad.size()) return {g.bands, std::move(good), outer, inner, iter};

        std::map<std::pair<int, int>, std::size_t> hits;
        for (const auto& t : bad)
            for (auto pr : pairs)
                if (std::fabs(t[static_cast<std::size_t>(pr.first)] - t[static_cast<std::size_t>(pr.second)]) >=
                    inner * scale)
                    ++hits[pr];
        auto worst = std::max_element(hits.begin(), hits.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
        check_class(static_cast<double>(worst->second) / static_cast<double>(bad.size()),
                    1.0 / static_cast<double>(pairs.size()), policy, "refine_partition");
        Ensemble next;
        for (auto& t : bad)
            if (std::fabs(t[static_cast<std::size_t>(worst->first.first)] -
                          t[static_cast<std::size_t>(worst->first.second)]) >= inner * scale)
                next.push_back(std::move(t));
        omega = std::move(next);
        outer = inner / n;
        inner = eps * inner / (2.0 * n);
    }
    throw InvariantError("refine_partition: no stable partition within n passes");
}

}  // namespace

BandParams BandParams::defaults(int n, double alpha1, double beta1, double gamma2) {
    require(n >= 2, "BandParams: need n >= 2");
    BandParams p;
    p.c_n = 1.0 / (4.0 * n);
    p.eps_lemma = 1.0 / (4.0 * n * n);
    p.delta = p.c_n / (2.0 * n);
    p.delta_prime = p.eps_lemma / 2.0 * p.delta;
    p.rho = p.delta_prime / 2.0;
    p.rho_prime = p.eps_lemma / 2.0 * p.rho;
    p.alpha1 = alpha1;
    p.beta1 = beta1;
    p.gamma2 = gamma2;
    p.validate();
    return p;
}

void BandParams::validate() const {
    for (double v : {c_n, eps_lemma, delta, delta_prime, rho, rho_prime, alpha1, beta1, gamma2})
        require(v > 0.0 && std::isfinite(v), "BandParams: parameters must be positive");
    require(eps_lemma < 1.0, "BandParams: eps must lie in (0,1)");
    require(delta_prime < eps_lemma * delta, "BandParams: need delta' < eps delta");
    require(rho < delta_prime, "BandParams: need rho < delta'");
    require(rho_prime < eps_lemma * rho, "BandParams: need rho' < eps rho");
}

SortResult sort_class(const Ensemble& ensemble, const SamplingPolicy& policy) {
    require_configs(ensemble);
    const int m = static_cast<int>(ensemble.front().size());
    std::map<std::vector<int>, std::vector<std::size_t>> classes;
    for (std::size_t c = 0; c < ensemble.size(); ++c) {
        std::vector<int> order(static_cast<std::size_t>(m));
        std::iota(order.begin(), order.end(), 0);
        const auto& t = ensemble[c];
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return t[static_cast<std::size_t>(a)] < t[static_cast<std::size_t>(b)];
        });
        classes[order].push_back(c);
    }
    auto best = classes.begin();
    for (auto it = classes.begin(); it != classes.end(); ++it)
        if (it->second.size() > best->second.size()) best = it;
    SortResult out;
    out.sigma = best->first;
    for (auto c : best->second) out.sub.push_back(ensemble[c]);
    out.fraction = static_cast<double>(out.sub.size()) / static_cast<double>(ensemble.size());
    check_class(out.fraction, 1.0 / std::min(factorial(m), static_cast<double>(ensemble.size())), policy,
                "sort_class");
    return out;
}

GapResult gap_partition(const Ensemble& sorted, const std::vector<int>& sigma, double threshold,
                        const SamplingPolicy& policy) {
    require_configs(sorted);
    require(!sigma.empty(), "gap_partition: empty position list");
    const int m = static_cast<int>(sorted.front().size());
    for (int pos : sigma) require(pos >= 0 && pos < m, "gap_partition: position out of range");
    std::map<std::vector<int>, std::vector<std::size_t>> classes;
    for (std::size_t c = 0; c < sorted.size(); ++c) {
        const auto& t = sorted[c];
        std::vector<int> breaks;
        for (std::size_t j = 1; j < sigma.size(); ++j) {
            const double gap = t[static_cast<std::size_t>(sigma[j])] - t[static_cast<std::size_t>(sigma[j - 1])];
            require(gap >= 0.0, "gap_partition: configuration not sorted by sigma");
            if (gap >= threshold) breaks.push_back(static_cast<int>(j));
        }
        classes[breaks].push_back(c);
    }
    auto best = classes.begin();
    for (auto it = classes.begin(); it != classes.end(); ++it)
        if (it->second.size() > best->second.size()) best = it;
    GapResult out;
    out.breaks = best->first;
    for (auto c : best->second) out.sub.push_back(sorted[c]);
    out.fraction = static_cast<double>(out.sub.size()) / static_cast<double>(sorted.size());
    const double patterns = std::ldexp(1.0, static_cast<int>(sigma.size()) - 1);
    check_class(out.fraction, 1.0 / std::min(patterns, static_cast<double>(sorted.size())), policy,
                "gap_partition");
    std::vector<int> current{sigma.front()};
    std::size_t next_break = 0;
    for (std::size_t j = 1; j < sigma.size(); ++j) {
        if (next_break < out.breaks.size() && out.breaks[next_break] == static_cast<int>(j)) {
            out.bands.push_back(current);
            current.clear();
            ++next_break;
        }
        current.push_back(sigma[j]);
    }
    out.bands.push_back(current);
    sort_bands(out.bands);
    return out;
}

std::vector<IndexRole> BandPartition::roles() const {
    std::vector<IndexRole> role(static_cast<std::size_t>(m), IndexRole::dropped);
    for (const auto& b : bands) {
        if (b.empty()) continue;
        role[static_cast<std::size_t>(b[0])] = IndexRole::free;
        for (std::size_t i = 1; i < b.size(); ++i)
            role[static_cast<std::size_t>(b[i])] = b.size() == 2 ? IndexRole::quasi_free : IndexRole::bound;
    }
    return role;
}

std::vector<int> BandPartition::anchors() const {
    std::vector<int> anchor(static_cast<std::size_t>(m), -1);
    for (const auto& b : bands)
        for (std::size_t i = 1; i < b.size(); ++i) anchor[static_cast<std::size_t>(b[i])] = b[0];
    return anchor;
}

SliceLayout BandPartition::layout() const { return SliceLayout{roles(), anchors()}; }

BandCounts BandPartition::counts() const {
    BandCounts c;
    const auto role = roles();
    for (int pos = dropped_prefix; pos < m; ++pos) {
        const bool in_last = contains(last_band, pos);
        switch (role[static_cast<std::size_t>(pos)]) {
            case IndexRole::free:
                ++c.free;
                if (in_last) ++c.N;
                break;
            case IndexRole::quasi_free:
                ++c.quasi_free;
                if (in_last) {
                    ++c.M2;
                    ++c.N;
                } else {
                    ++c.M1;
                }
                break;
            case IndexRole::bound:
                ++c.bound;
                if (in_last) ++c.R2;
                break;
            case IndexRole::dropped: break;
        }
    }
    c.k = m - dropped_prefix;
    return c;
}

int BandPartition::free_or_quasi_free() const {
    const auto c = counts();
    return c.free + c.quasi_free;
}

RefineResult refine_partition(const Ensemble& ensemble, const BandParams& params, BandStage stage,
                              const BandPartition* first, const SamplingPolicy& policy) {
    params.validate();
    require_configs(ensemble);
    const int m = static_cast<int>(ensemble.front().size());
    require(m >= 3 && m % 2 == 1, "refine_partition: configurations must have length 2n-1");
    const int n = (m + 1) / 2;
    require_tower_separation(ensemble, params);
    const auto sorted = sort_class(ensemble, policy);

    RefineResult out;
    out.params = params;
    out.partition.m = m;
    if (stage == BandStage::first) {
        auto loop = refine_loop(sorted.sub, sorted.sigma, params.delta, params.delta_prime, params.alpha1,
                                params.eps_lemma, n, policy);
        out.params.delta = loop.outer;
        out.params.delta_prime = loop.inner;
        if (out.params.rho >= out.params.delta_prime) {
            out.params.rho = out.params.delta_prime / 2.0;
            out.params.rho_prime = out.params.eps_lemma / 2.0 * out.params.rho;
        }
        out.partition.bands = std::move(loop.bands);
        out.partition.last_band = out.partition.bands[static_cast<std::size_t>(band_of(out.partition.bands, m - 1))];
        out.survivors = std::move(loop.survivors);
        out.iterations = loop.iterations;

        ensure(static_cast<int>(out.partition.bands.size()) >= n, "refine_partition: fewer than n bands");
        for (const auto& b : out.partition.bands) {
            ensure(static_cast<int>(b.size()) <= n, "refine_partition: band with more than n elements");
            for (std::size_t i = 1; i < b.size(); ++i)
                ensure(b[i] % 2 == 0, "refine_partition: an even index is not the least element of its band");
        }
    } else {
        require(first != nullptr && first->m == m, "refine_partition: second stage needs the first partition");
        const auto& B = first->last_band;
        require(contains(B, m - 1), "refine_partition: first partition has no band with the last index");
        std::vector<int> sigma_B;
        for (int pos : sorted.sigma)
            if (contains(B, pos)) sigma_B.push_back(pos);
        auto loop = refine_loop(sorted.sub, sigma_B, params.rho, params.rho_prime, params.gamma2, params.eps_lemma,
                                n, policy);
        out.params.rho = loop.outer;
        out.params.rho_prime = loop.inner;
        for (const auto& b : first->bands)
            if (b != B) out.partition.bands.push_back(b);
        for (auto& b : loop.bands) out.partition.bands.push_back(std::move(b));
        sort_bands(out.partition.bands);
        out.partition.last_band = B;
        out.survivors = std::move(loop.survivors);
        out.iterations = loop.iterations;
    }
    for (const auto& t : out.survivors) {
        const auto bad = window_violation(out.partition, out.params, stage, t);
        ensure(!bad, "refine_partition: survivor breaks a window: " + bad.value_or(""));
    }
    return out;
}

std::optional<std::string> window_violation(const BandPartition& p, const BandParams& params, BandStage stage,
                                            const Configuration& t) {
    require(static_cast<int>(t.size()) == p.m, "window_violation: configuration length mismatch");
    const auto role = p.roles();
    const auto anchor = p.anchors();
    const double lo_quasi = params.c_n * params.beta1;
    for (int i = p.dropped_prefix; i < p.m; ++i) {
        for (int j = p.dropped_prefix; j < i; ++j) {
            const double d = std::fabs(t[static_cast<std::size_t>(i)] - t[static_cast<std::size_t>(j)]);
            const bool inner = stage == BandStage::second && contains(p.last_band, i) && contains(p.last_band, j);
            const double sep = inner ? params.rho * params.gamma2 : params.delta * params.alpha1;
            const double tight = inner ? params.rho_prime * params.gamma2 : params.delta_prime * params.alpha1;
            const bool same = band_of(p.bands, i) == band_of(p.bands, j);
            if (!same) {
                // Outside the last band the second stage keeps first-stage bands,
                // and members of the last band stay delta alpha1 from the rest.
                if (d < sep) return "positions " + std::to_string(j) + "," + std::to_string(i) + " too close";
                continue;
            }
            const int lo = std::min(i, j);
            const int hi = std::max(i, j);
            if (anchor[static_cast<std::size_t>(hi)] != lo) continue;  // two bound members of one band
            if (role[static_cast<std::size_t>(hi)] == IndexRole::quasi_free) {
                if (d < lo_quasi || d >= sep) return "quasi-bound pair " + std::to_string(hi) + " outside its window";
            } else if (d >= tight) {
                return "bound pair " + std::to_string(hi) + " outside its window";
            }
        }
    }
    return std::nullopt;
}

DropResult drop_and_redesignate(const BandPartition& partition, int n) {
    require(n >= 1, "drop_and_redesignate: need n >= 1");
    DropResult out{partition, {}};
    auto& p = out.partition;
    int count = p.free_or_quasi_free();
    require(count >= n, "drop_and_redesignate: fewer than n free or quasi-free indices");
    int drops = 0;
    while (count > n) {
        out.count_trace.push_back(count);
        const int pos = p.dropped_prefix;
        for (auto& b : p.bands) std::erase(b, pos);
        std::erase_if(p.bands, [](const auto& b) { return b.empty(); });
        std::erase(p.last_band, pos);
        ++p.dropped_prefix;
        ++drops;
        const int next = p.free_or_quasi_free();
        ensure(next - count >= -1 && next - count <= 1, "drop_and_redesignate: count moved by more than one");
        count = next;
        ensure(drops <= n - 1, "drop_and_redesignate: more than n-1 drops");
    }
    out.count_trace.push_back(count);
    return out;
}

PipelineResult run_band_pipeline(const Ensemble& ensemble, const BandParams& params, int n,
                                 const SamplingPolicy& policy) {
    require(!ensemble.empty() && static_cast<int>(ensemble.front().size()) == 2 * n - 1,
            "run_band_pipeline: configurations must have length 2n-1");
    PipelineResult out;
    out.first = refine_partition(ensemble, params, BandStage::first, nullptr, policy);
    out.second = refine_partition(out.first.survivors, out.first.params, BandStage::second, &out.first.partition,
                                  policy);
    out.dropped = drop_and_redesignate(out.second.partition, n);
    out.survivor_fraction =
        static_cast<double>(out.second.survivors.size()) / static_cast<double>(ensemble.size());
    return out;
}

SliceCoordinates slice_coordinates(const BandPartition& partition, const Configuration& t) {
    require(static_cast<int>(t.size()) == partition.m, "slice_coordinates: configuration length mismatch");
    const auto role = partition.roles();
    const auto anchor = partition.anchors();
    SliceCoordinates out;
    for (int pos = 0; pos < partition.m; ++pos) {
        const auto k = static_cast<std::size_t>(pos);
        switch (role[k]) {
            case IndexRole::dropped: out.t0.push_back(t[k]); break;
            case IndexRole::free:
            case IndexRole::quasi_free: out.tau.push_back(t[k]); break;
            case IndexRole::bound: out.s.push_back(t[k] - t[static_cast<std::size_t>(anchor[k])]); break;
        }
    }
    require(static_cast<int>(out.t0.size()) == partition.dropped_prefix,
            "slice_coordinates: bands cover a dropped position or miss a live one");
    return out;
}

bool lemma_window_holds(const BandPartition& partition, double eps_lemma, const Configuration& t) {
    require(static_cast<int>(t.size()) == partition.m, "lemma_window_holds: configuration length mismatch");
    const auto role = partition.roles();
    const auto anchor = partition.anchors();
    for (int i = partition.dropped_prefix; i < partition.m; ++i) {
        if (role[static_cast<std::size_t>(i)] != IndexRole::bound) continue;
        const int j = anchor[static_cast<std::size_t>(i)];
        const double d = std::fabs(t[static_cast<std::size_t>(i)] - t[static_cast<std::size_t>(j)]);
        for (int l = partition.dropped_prefix; l < partition.m; ++l) {
            const auto r = role[static_cast<std::size_t>(l)];
            if (l == j || (r != IndexRole::free && r != IndexRole::quasi_free)) continue;
            if (d >= eps_lemma * std::fabs(t[static_cast<std::size_t>(j)] - t[static_cast<std::size_t>(l)]))
                return false;
        }
    }
    return true;
}

JacobianCertificate certify_jacobian(const BandPartition& partition, const BandParams& params,
                                     const Configuration& t, double constant) {
    require(constant > 0.0, "certify_jacobian: need a positive constant");
    require(lemma_window_holds(partition, params.eps_lemma, t),
            "certify_jacobian: configuration violates the bound-index window");
    const auto sc = slice_coordinates(partition, t);
    require(sc.tau.size() >= 2, "certify_jacobian: need at least two free or quasi-free indices");
    const CurveConfig cfg(static_cast<int>(sc.tau.size()));
    JacobianCertificate out;
    out.actual = jacobian_sliced(cfg, sc.t0, partition.layout(), sc.tau, sc.s);
    out.lower_bound = constant * vandermonde_product(sc.tau);
    out.ok = out.actual >= out.lower_bound;
    return out;
}

double calibrate_jacobian_constant(const std::vector<std::pair<BandPartition, Configuration>>& corpus,
                                   const BandParams& params) {
    require(!corpus.empty(), "calibrate_jacobian_constant: empty corpus");
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& [p, t] : corpus) {
        require(lemma_window_holds(p, params.eps_lemma, t), "calibrate_jacobian_constant: inadmissible entry");
        const auto sc = slice_coordinates(p, t);
        const double prod = vandermonde_product(sc.tau);
        require(prod > 0.0, "calibrate_jacobian_constant: coinciding tau");
        const CurveConfig cfg(static_cast<int>(sc.tau.size()));
        lowest = std::min(lowest, jacobian_sliced(cfg, sc.t0, p.layout(), sc.tau, sc.s) / prod);
    }
    return 0.9 * lowest;
}

Ensemble sample_band_ensemble(const EnsembleModel& model, const BandParams& params, std::mt19937_64& rng) {
    require(model.n >= 2 && model.count >= 1, "sample_band_ensemble: need n >= 2 and a positive count");
    require(model.beta1 < model.alpha1 && model.beta1 < model.beta2, "sample_band_ensemble: need beta1 below alpha1, beta2");
    const int m = 2 * model.n - 1;
    auto separation = [&](int pos) {
        if (pos == m - 1) return params.c_n * model.beta2;
        return pos % 2 == 1 ? params.c_n * model.alpha1 : params.c_n * model.beta1;
    };
    auto admissible = [&](const Configuration& t, int upto) {
        for (int k = 1; k <= upto; ++k)
            for (int j = 0; j < k; ++j)
                if (std::fabs(t[static_cast<std::size_t>(k)] - t[static_cast<std::size_t>(j)]) < separation(k))
                    return false;
        return true;
    };
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    Configuration tmpl(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            double x = unit(rng);
            if (k % 2 == 0 && k > 0 && coin(rng) < model.cluster_prob) {
                const int partner = std::uniform_int_distribution<int>(0, k - 1)(rng);
                const double lo = std::log(2.0 * separation(k));
                const double hi = std::log(4.0 * params.delta * model.alpha1);
                const double d = std::exp(lo + (hi - lo) * coin(rng));
                x = tmpl[static_cast<std::size_t>(partner)] + (coin(rng) < 0.5 ? -d : d);
            }
            if (x < -1.0 || x > 1.0) continue;
            tmpl[static_cast<std::size_t>(k)] = x;
            placed = admissible(tmpl, k);
        }
        ensure(placed, "sample_band_ensemble: could not place a template entry");
    }
    // Jitter each entry by a quarter of its distance to the nearest other one,
    // so the value order is shared and only near-threshold gaps vary.
    std::vector<double> reach(static_cast<std::size_t>(m), 1.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (i != j)
                reach[static_cast<std::size_t>(i)] =
                    std::min(reach[static_cast<std::size_t>(i)],
                             0.25 * std::fabs(tmpl[static_cast<std::size_t>(i)] - tmpl[static_cast<std::size_t>(j)]));
    Ensemble out;
    int rejected = 0;
    while (static_cast<int>(out.size()) < model.count) {
        Configuration t(tmpl);
        for (int k = 0; k < m; ++k) t[static_cast<std::size_t>(k)] += reach[static_cast<std::size_t>(k)] * unit(rng);
        bool inside = std::all_of(t.begin(), t.end(), [](double x) { return x >= -1.0 && x <= 1.0; });
        if (inside && admissible(t, m - 1)) {
            out.push_back(std::move(t));
        } else {
            ensure(++rejected < 100 * model.count, "sample_band_ensemble: jitter keeps breaking separations");
        }
    }
    return out;
}

}  // namespace mclab
