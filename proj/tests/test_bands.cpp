#include "mclab/bands.hpp"
#include "mclab/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace mclab;

namespace {

BandPartition make_partition(int m, std::vector<std::vector<int>> bands, int prefix = 0) {
    BandPartition p;
    p.m = m;
    p.bands = std::move(bands);
    p.dropped_prefix = prefix;
    for (const auto& b : p.bands)
        for (int x : b)
            if (x == m - 1) p.last_band = b;
    return p;
}

// Every set partition of {0..m-1}, bands ascending and ordered by minimum.
void for_each_partition(int m, const std::function<void(const std::vector<std::vector<int>>&)>& visit) {
    std::vector<std::vector<int>> bands;
    std::function<void(int)> rec = [&](int k) {
        if (k == m) {
            visit(bands);
            return;
        }
        for (auto& b : bands) {
            b.push_back(k);
            rec(k + 1);
            b.pop_back();
        }
        bands.push_back({k});
        rec(k + 1);
        bands.pop_back();
    };
    rec(0);
}

}  // namespace

TEST_CASE("parameter defaults and validation") {
    for (int n = 2; n <= 6; ++n) {
        const auto p = BandParams::defaults(n, 1.0, 1e-3, 1e-2);
        CHECK(p.c_n == doctest::Approx(1.0 / (4 * n)));
        CHECK(p.delta_prime < p.eps_lemma * p.delta);
        CHECK(p.rho < p.delta_prime);
        CHECK(p.rho_prime < p.eps_lemma * p.rho);
    }
    auto p = BandParams::defaults(3, 1.0, 1e-3, 1e-2);
    p.rho = p.delta_prime * 2;
    CHECK_THROWS_AS(p.validate(), PreconditionError);
}

TEST_CASE("sort classes") {
    Ensemble inc{{-0.5, 0.0, 0.5}, {-0.9, 0.1, 0.2}};
    auto r = sort_class(inc);
    CHECK(r.sigma == std::vector<int>{0, 1, 2});
    CHECK(r.fraction == 1.0);

    auto one = sort_class({{0.3, -0.2, 0.9, 0.0}});
    CHECK(one.sigma == std::vector<int>{1, 3, 0, 2});
    CHECK(one.fraction == 1.0);

    // Uniform samples: every order has probability 1/6; the largest class
    // cannot fall more than a few standard deviations below that.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Ensemble many;
    for (int i = 0; i < 1000; ++i) many.push_back({u(rng), u(rng), u(rng)});
    auto big = sort_class(many);
    const double sd = std::sqrt((1.0 / 6) * (5.0 / 6) / 1000);
    CHECK(big.fraction >= 1.0 / 6 - 3 * sd);
    for (const auto& t : big.sub)
        for (std::size_t i = 1; i < 3; ++i)
            CHECK(t[static_cast<std::size_t>(big.sigma[i])] >= t[static_cast<std::size_t>(big.sigma[i - 1])]);
}

TEST_CASE("gap partitions") {
    Ensemble e{{-0.5, -0.1, 0.4, 0.45, 0.9}};
    const std::vector<int> sigma{0, 1, 2, 3, 4};
    CHECK(gap_partition(e, sigma, 0.0).bands.size() == 5);
    CHECK(gap_partition(e, sigma, 2.0).bands.size() == 1);
    // Gap exactly at the threshold breaks.
    CHECK(gap_partition({{0.0, 0.25}}, {0, 1}, 0.25).bands.size() == 2);
    CHECK_THROWS_AS(gap_partition({{0.5, 0.0}}, {0, 1}, 0.1), PreconditionError);

    // Planted clusters {0,1}, {2}, {3,4} about 0.3 apart, members within 0.04.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> jit(-0.01, 0.01);
    Ensemble planted;
    int clean = 0;
    for (int i = 0; i < 500; ++i) {
        Configuration t{-0.6 + jit(rng), -0.57 + jit(rng), -0.2 + jit(rng), 0.1 + jit(rng), 0.12 + jit(rng)};
        if (rng() % 20 == 0) t[2] = -0.5;  // occasional sample that merges bands
        planted.push_back(t);
    }
    for (const auto& t : planted)
        if (t[2] != -0.5) ++clean;
    auto g = gap_partition(planted, sigma, 0.1);
    CHECK(g.bands == std::vector<std::vector<int>>{{0, 1}, {2}, {3, 4}});
    CHECK(static_cast<double>(g.sub.size()) >= 0.9 * 500);
    CHECK(static_cast<int>(g.sub.size()) == clean);
}

TEST_CASE("designation rules") {
    auto p = make_partition(7, {{0, 2}, {1, 4, 6}, {3}, {5}});
    const auto role = p.roles();
    CHECK(role[0] == IndexRole::free);
    CHECK(role[2] == IndexRole::quasi_free);
    CHECK(role[1] == IndexRole::free);
    CHECK(role[4] == IndexRole::bound);
    CHECK(role[6] == IndexRole::bound);
    CHECK(p.anchors()[6] == 1);
    const auto c = p.counts();
    CHECK(c.free == 4);
    CHECK(c.quasi_free == 1);
    CHECK(c.bound == 2);
    CHECK(c.R2 == 2);
    CHECK(c.N == 1);
    CHECK(c.M1 == 1);
    CHECK(c.k == 7);
}

TEST_CASE("first stage on well separated and planted ensembles") {
    const int n = 3;
    const auto params = BandParams::defaults(n, 1.0, 1e-3, 1e-2);
    Ensemble far{{-0.9, -0.5, -0.1, 0.3, 0.7}, {-0.88, -0.52, -0.11, 0.31, 0.69}};
    auto r = refine_partition(far, params, BandStage::first);
    CHECK(r.iterations == 1);
    CHECK(r.partition.bands.size() == 5);
    CHECK(r.partition.free_or_quasi_free() == 5);

    // Indices 1 and 3 at distance beta1, the rest far apart.
    Ensemble pair{{-0.9, -0.5, -0.9 + 1e-3, 0.3, 0.7}};
    auto q = refine_partition(pair, params, BandStage::first);
    CHECK(q.partition.bands.front() == std::vector<int>{0, 2});
    CHECK(q.partition.roles()[2] == IndexRole::quasi_free);

    // Even index too close to an earlier one violates the tower separation.
    CHECK_THROWS_AS(refine_partition({{0.0, 0.001, 0.5, -0.5, 0.9}}, params, BandStage::first), PreconditionError);
}

TEST_CASE("planted bound pair forces a shrink") {
    // Bound members need a band of three, so n = 3 is the smallest case.
    const auto params = BandParams::defaults(3, 1.0, 1e-6, 1e-5);
    const double wide = 0.5 * params.delta;  // inside delta alpha1, outside delta' alpha1
    Ensemble e;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> jit(-1e-4, 1e-4);
    for (int i = 0; i < 50; ++i)
        e.push_back({0.0 + jit(rng), -0.6, wide + jit(rng), 0.6, -wide + jit(rng)});
    auto r = refine_partition(e, params, BandStage::first);
    CHECK(r.iterations >= 2);
    CHECK(r.params.delta < params.delta);
    for (const auto& t : r.survivors) CHECK_FALSE(window_violation(r.partition, r.params, BandStage::first, t));
}

TEST_CASE("pipeline invariants on random ensembles") {
    std::mt19937_64 rng(2024);
    int shrinks = 0;
    int second_stage_splits = 0;
    for (int n = 2; n <= 5; ++n) {
        for (int trial = 0; trial < 125; ++trial) {
            EnsembleModel model;
            model.n = n;
            model.beta1 = 1e-7;
            model.beta2 = 1e-6;
            model.count = 60;
            const auto params = BandParams::defaults(n, model.alpha1, model.beta1, model.beta2);
            const auto ensemble = sample_band_ensemble(model, params, rng);
            const auto out = run_band_pipeline(ensemble, params, n);
            CHECK(out.first.iterations <= n);
            CHECK(out.second.iterations <= n);
            if (out.first.iterations > 1) ++shrinks;
            if (out.second.partition.bands.size() > out.first.partition.bands.size()) ++second_stage_splits;
            CHECK(static_cast<int>(out.first.partition.bands.size()) >= n);
            for (const auto& b : out.first.partition.bands) {
                CHECK(static_cast<int>(b.size()) <= n);
                for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i] % 2 == 0);
            }
            const auto& trace = out.dropped.count_trace;
            for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] - trace[i - 1] >= -1);
            CHECK(trace.back() == n);
            CHECK(out.survivor_fraction > 0.0);
            for (const auto& t : out.second.survivors)
                CHECK_FALSE(window_violation(out.second.partition, out.second.params, BandStage::second, t));
        }
    }
    // The generator has to exercise the interesting branches.
    CHECK(shrinks > 0);
    CHECK(second_stage_splits > 0);
}

TEST_CASE("dropping indices") {
    auto exact = make_partition(5, {{0, 2, 4}, {1}, {3}});
    auto d0 = drop_and_redesignate(exact, 3);
    CHECK(d0.partition.dropped_prefix == 0);
    CHECK(d0.count_trace == std::vector<int>{3});

    for (int n = 2; n <= 5; ++n) {
        const int m = 2 * n - 1;
        std::vector<std::vector<int>> singletons;
        for (int k = 0; k < m; ++k) singletons.push_back({k});
        auto d = drop_and_redesignate(make_partition(m, singletons), n);
        CHECK(d.partition.dropped_prefix == n - 1);
        CHECK(d.partition.counts().k == n);
    }
    CHECK_THROWS_AS(drop_and_redesignate(make_partition(5, {{0, 1, 2, 3, 4}}), 3), PreconditionError);

    // Every partition of up to seven positions.
    for (int n = 2; n <= 4; ++n) {
        const int m = 2 * n - 1;
        int checked = 0;
        for_each_partition(m, [&](const std::vector<std::vector<int>>& bands) {
            auto p = make_partition(m, bands);
            if (p.free_or_quasi_free() < n) return;
            auto d = drop_and_redesignate(p, n);
            for (std::size_t i = 1; i < d.count_trace.size(); ++i) {
                const int step = d.count_trace[i] - d.count_trace[i - 1];
                CHECK(step >= -1);
                CHECK(step <= 1);
            }
            CHECK(d.count_trace.back() == n);
            CHECK(d.partition.dropped_prefix <= n - 1);
            ++checked;
        });
        CHECK(checked > 0);
    }
}

TEST_CASE("slice coordinates round trip") {
    auto free_only = make_partition(3, {{0}, {1}, {2}});
    Configuration t{0.1, -0.4, 0.8};
    auto sc = slice_coordinates(free_only, t);
    CHECK(sc.tau == t);
    CHECK(sc.s.empty());

    auto one_bound = make_partition(5, {{0}, {1, 2, 4}, {3}});
    Configuration u{0.5, 0.1, 0.1 + 0.003, -0.7, 0.1 - 0.002};
    auto su = slice_coordinates(one_bound, u);
    REQUIRE(su.s.size() == 2);
    CHECK(su.s[0] == doctest::Approx(0.003));
    CHECK(su.s[1] == doctest::Approx(-0.002));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> x(-1.0, 1.0);
    auto dropped = make_partition(7, {{2, 4, 6}, {3}, {5}}, 2);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto& p = trial % 2 ? one_bound : dropped;
        Configuration c(static_cast<std::size_t>(p.m));
        for (auto& v : c) v = x(rng);
        auto s = slice_coordinates(p, c);
        auto back = reconstruct_configuration(p.layout(), s.t0, s.tau, s.s);
        REQUIRE(back.size() == c.size());
        for (std::size_t i = 0; i < c.size(); ++i) CHECK(back[i] == doctest::Approx(c[i]).epsilon(1e-15));
    }
    CHECK_THROWS_AS(slice_coordinates(dropped, Configuration{0.0}), PreconditionError);
}

TEST_CASE("jacobian certificates") {
    const auto params = BandParams::defaults(3, 1.0, 1e-4, 1e-3);
    // All free: the sliced Jacobian is the Vandermonde determinant.
    auto all_free = make_partition(5, {{2}, {3}, {4}}, 2);
    Configuration t{0.9, -0.9, -0.5, 0.1, 0.6};
    const double a3 = vandermonde_constant(3);
    auto cert = certify_jacobian(all_free, params, t, 0.9 * a3);
    CHECK(cert.ok);
    CHECK(cert.actual / cert.lower_bound >= 1.0);
    CHECK(cert.actual == doctest::Approx(a3 * oracle::gap_product({-0.5, 0.1, 0.6})));

    // Offsets at zero collapse each bound column onto its anchor:
    // position 1 (sign -) carries positions 2 and 4 (sign +), net +1.
    auto bound = make_partition(5, {{0}, {1, 2, 4}, {3}});
    Configuration z{0.7, -0.2, -0.2, 0.4, -0.2};
    auto cz = certify_jacobian(bound, params, z, 1e-6);
    auto rows = oracle::derivative_rows({0.7, -0.2, 0.4});
    const std::vector<double> coef{1.0, 1.0, -1.0};
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (auto& v : rows[i]) v *= coef[i];
    CHECK(cz.actual == doctest::Approx(std::fabs(oracle::leibniz_determinant(rows))).epsilon(1e-9));

    Configuration wide{0.7, -0.2, 0.3, 0.4, -0.2};
    CHECK_THROWS_AS(certify_jacobian(bound, params, wide, 1.0), PreconditionError);
}

TEST_CASE("calibrated constant certifies every admissible pipeline output") {
    std::mt19937_64 rng(77);
    for (int n = 2; n <= 4; ++n) {
        std::vector<std::pair<BandPartition, Configuration>> corpus;
        BandParams params;
        while (corpus.size() < 500) {
            EnsembleModel model;
            model.n = n;
            model.beta1 = 1e-7;
            model.beta2 = 1e-6;
            model.count = 40;
            params = BandParams::defaults(n, model.alpha1, model.beta1, model.beta2);
            const auto out = run_band_pipeline(sample_band_ensemble(model, params, rng), params, n);
            for (const auto& t : out.second.survivors) {
                if (!lemma_window_holds(out.dropped.partition, params.eps_lemma, t)) continue;
                corpus.emplace_back(out.dropped.partition, t);
                if (corpus.size() == 500) break;
            }
        }
        const double c = calibrate_jacobian_constant(corpus, params);
        CHECK(c > 0.0);
        int ok = 0;
        for (const auto& [p, t] : corpus) ok += certify_jacobian(p, params, t, c).ok ? 1 : 0;
        CHECK(ok == 500);
    }
}
