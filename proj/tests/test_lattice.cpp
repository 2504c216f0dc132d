#include "mclab/error.hpp"
#include "mclab/lattice.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mclab;

namespace {

const std::vector<double> kOrigin2{0.0, 0.0};
const std::vector<double> kOrigin3{0.0, 0.0, 0.0};

}  // namespace

TEST_CASE("cell bookkeeping and set operations") {
    auto a = LatticeSet::from_cells(2, 0.5, {0, 0, 1, 0, 0, 0, -3, 2});
    CHECK(a.size() == 3);
    CHECK(a.measure() == doctest::Approx(0.75));
    CHECK(a.contains_cell(std::vector<CellIndex>{-3, 2}));
    CHECK_FALSE(a.contains_cell(std::vector<CellIndex>{2, 2}));
    CHECK(a.contains_point(std::vector<double>{0.7, 0.2}));
    CHECK_FALSE(a.contains_point(std::vector<double>{-0.1, 0.2}));

    auto b = LatticeSet::from_cells(2, 0.5, {1, 0, 5, 5});
    CHECK(a.unite(b).size() == 4);
    CHECK(a.intersect(b).size() == 1);
    CHECK(a.difference(b).size() == 2);
    CHECK(a.intersection_count(b) == 1);
    // Measure is additive over disjoint pieces.
    CHECK(a.difference(b).measure() + b.measure() == doctest::Approx(a.unite(b).measure()));

    auto c = LatticeSet::from_cells(2, 0.25, {0, 0});
    CHECK_THROWS_AS(a.unite(c), PreconditionError);
    CHECK_THROWS_AS(LatticeSet::from_cells(2, 0.5, {1, 2, 3}), PreconditionError);
}

TEST_CASE("hashed index agrees with a dense index") {
    // Sparse, widely spread cells force the hashed path.
    std::vector<CellIndex> flat;
    for (CellIndex i = 0; i < 2000; ++i) {
        flat.push_back(i * 7919);
        flat.push_back(-i * 104729);
        flat.push_back(i % 13);
    }
    auto s = LatticeSet::from_cells(3, 1.0, flat);
    for (std::size_t i = 0; i < s.size(); ++i) REQUIRE(s.contains_cell(s.cell(i)));
    CHECK_FALSE(s.contains_cell(std::vector<CellIndex>{1, 0, 0}));
    CHECK_FALSE(s.contains_cell(std::vector<CellIndex>{7919, -104729, 2}));
}

TEST_CASE("dyadic resolutions are certified disjoint") {
    auto coarse = LatticeSet::from_cells(1, 1.0, {0});
    auto fine_inside = LatticeSet::from_cells(1, 0.25, {3});
    auto fine_outside = LatticeSet::from_cells(1, 0.25, {-1, 4});
    CHECK_FALSE(regions_disjoint(coarse, fine_inside));
    CHECK(regions_disjoint(coarse, fine_outside));
    auto odd = LatticeSet::from_cells(1, 0.3, {1});
    CHECK_THROWS_AS(regions_disjoint(coarse, odd), PreconditionError);
}

TEST_CASE("step functions reject overlapping levels") {
    auto e0 = LatticeSet::from_cells(2, 0.5, {0, 0});
    auto e1 = LatticeSet::from_cells(2, 0.5, {1, 0});
    StepFunction f({{0, e0}, {3, e1}});
    CHECK(f.value_at(std::vector<double>{0.7, 0.1}) == 8.0);
    CHECK(f.value_at(std::vector<double>{0.2, 0.1}) == 1.0);
    CHECK(f.value_at(std::vector<double>{5.0, 0.1}) == 0.0);
    CHECK_THROWS_AS(StepFunction({{0, e0}, {1, e0}}), PreconditionError);
    CHECK_THROWS_AS(StepFunction({{0, e0}, {0, e1}}), PreconditionError);
}

TEST_CASE("tube set against a Monte Carlo volume") {
    const CurveConfig cfg(2);
    const double eps = 0.125;
    auto tube = tube_set(cfg, eps, 1.0, kOrigin2, 1.0 / 128.0);
    const double mc = oracle::tube_area_monte_carlo(eps, 1.0, 1'000'000, 2024);
    CHECK(std::fabs(tube.measure() - mc) <= 0.10 * mc);
}

TEST_CASE("tube set resolution and range checks") {
    const CurveConfig cfg(2);
    CHECK_THROWS_AS(tube_set(cfg, 0.25, 0.5, kOrigin2, 0.25 * 0.25 / 4.0 * 1.01), PreconditionError);
    CHECK_THROWS_AS(tube_set(cfg, 0.0, 0.5, kOrigin2, 1e-3), PreconditionError);
    CHECK_THROWS_AS(tube_set(cfg, 0.25, 1.5, kOrigin2, 1e-3), PreconditionError);
    CHECK_THROWS_AS(tube_set(cfg, 0.25, 0.5, kOrigin3, 1e-3), PreconditionError);
    CHECK_THROWS_AS(tube_set(cfg, 0.25, 1.0, kOrigin2, 1e-3, 100), CapacityError);
}

TEST_CASE("translations by whole cells preserve measure") {
    const CurveConfig cfg(2);
    const double delta = 1.0 / 256.0;
    auto base = tube_set(cfg, 0.25, 0.5, kOrigin2, delta);
    const std::vector<double> shifted_center{37 * delta, -11 * delta};
    auto moved = tube_set(cfg, 0.25, 0.5, shifted_center, delta);
    CHECK(moved.size() == base.size());
    CHECK(moved.flat() == base.translated_cells(std::vector<CellIndex>{37, -11}).flat());
    // An off-lattice shift changes the midpoint sample only slightly.
    auto off = tube_set(cfg, 0.25, 0.5, std::vector<double>{0.3 * delta, 0.7 * delta}, delta);
    CHECK(std::fabs(off.measure() - base.measure()) <= 0.02 * base.measure());
}

TEST_CASE("ball set") {
    const CurveConfig cfg(2);
    auto disc = ball_set(cfg, 0.5, 1.0, kOrigin2, 1.0 / 256.0);
    CHECK(std::fabs(disc.measure() - std::numbers::pi / 4.0) <= 0.10 * std::numbers::pi / 4.0);
    // Coarse resolutions are rejected rather than silently empty.
    CHECK_THROWS_AS(ball_set(cfg, 0.01, 1.0, std::vector<double>{0.5, 0.5}, 0.1), PreconditionError);
    auto ball3 = ball_set(CurveConfig(3), 0.5, 0.5, kOrigin3, 0.5 * 0.125 / 4.0);
    const double want = 4.0 / 3.0 * std::numbers::pi * std::pow(0.5, 3) * std::pow(0.5, 6);
    CHECK(std::fabs(ball3.measure() - want) <= 0.10 * want);
}

TEST_CASE("tube and ball exponents on a small dyadic grid") {
    const CurveConfig cfg(2);
    std::vector<double> le, lr, ltube, lball;
    for (int a = 2; a <= 4; ++a) {
        for (int b = 2; b <= 4; ++b) {
            const double eps = std::ldexp(1.0, -a);
            const double r = std::ldexp(1.0, -b);
            const double delta = eps * r * r / 4.0;
            le.push_back(std::log(eps));
            lr.push_back(std::log(r));
            ltube.push_back(std::log(tube_set(cfg, eps, r, kOrigin2, delta).measure()));
            lball.push_back(std::log(ball_set(cfg, eps, r, kOrigin2, delta).measure()));
        }
    }
    // Partial slopes on a balanced grid equal the least-squares coefficients.
    CHECK(std::fabs(oracle::slope(le, ltube) - 1.0) <= 0.15);
    CHECK(std::fabs(oracle::slope(lr, ltube) - 3.0) <= 0.15);
    CHECK(std::fabs(oracle::slope(le, lball) - 2.0) <= 0.15);
    CHECK(std::fabs(oracle::slope(lr, lball) - 3.0) <= 0.15);
}

TEST_CASE("box set") {
    auto box = box_set(2, 0.5, std::vector<double>{0.0, 0.0}, std::vector<double>{2.0, 1.0});
    CHECK(box.size() == 8);
    CHECK_THROWS_AS(box_set(2, 1e-4, std::vector<double>{0.0, 0.0}, std::vector<double>{10.0, 10.0}, 1000),
                    CapacityError);
}

TEST_CASE("packing translates") {
    const CurveConfig cfg(2);
    auto ball_member = [&](int, const Point& c) {
        return PackMember{{ball_set(cfg, 0.5, 1.0, c, 1.0 / 16.0)}};
    };
    auto one = pack_translates(2, 1, ball_member, [](int) { return 0.5; }, PackRule{});
    CHECK(one.size() == 1);

    auto four = pack_translates(2, 4, ball_member, [](int) { return 0.5; }, PackRule{4.0, 0.0});
    REQUIRE(four.size() == 4);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = a + 1; b < 4; ++b) CHECK(four[a].sets[0].intersect(four[b].sets[0]).empty());

    // Sixteen members sized by the u <= q_n schedule at M = 16, on one lattice
    // so the exhaustive cell check applies.
    const int M = 16;
    auto schedule_box = [&](int j, const Point& c) {
        const double eps = std::pow(2.0, 1.5 * (j + 1 - M));
        const double r = std::ldexp(1.0, -(j + 1));
        const std::vector<double> lo{c[0] - r * (1 + eps), c[1] - r * r * (1 + eps)};
        const std::vector<double> hi{c[0] + r * (1 + eps), c[1] + r * r * (1 + eps)};
        return PackMember{{box_set(2, 1.0 / 64.0, lo, hi)}};
    };
    auto half = [&](int j) { return std::ldexp(1.0, -(j + 1)) * (1 + std::pow(2.0, 1.5 * (j + 1 - M))); };
    auto sixteen = pack_translates(2, M, schedule_box, half, PackRule{});
    for (std::size_t a = 0; a < sixteen.size(); ++a)
        for (std::size_t b = a + 1; b < sixteen.size(); ++b) {
            std::size_t shared = 0;
            const auto& sa = sixteen[a].sets[0];
            for (std::size_t i = 0; i < sa.size(); ++i) shared += sixteen[b].sets[0].contains_cell(sa.cell(i));
            CHECK(shared == 0);
        }

    // A builder that ignores its center is caught by the verification.
    auto fixed = [&](int, const Point&) { return PackMember{{ball_set(cfg, 0.5, 1.0, kOrigin2, 1.0 / 16.0)}}; };
    CHECK_THROWS_AS(pack_translates(2, 2, fixed, [](int) { return 0.5; }, PackRule{}), InvariantError);
}
