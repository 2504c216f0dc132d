#include "mclab/error.hpp"
#include "mclab/towers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace mclab;

namespace {

struct Pair {
    LatticeSet N;
    LatticeSet B;
};

Pair quasi_pair(int n, double eps, double r = 1.0) {
    const CurveConfig cfg(n);
    const Point c(static_cast<std::size_t>(n), 0.0);
    const double d = eps * std::pow(r, n) / 4;
    return {tube_set(cfg, eps, r, c, d), ball_set(cfg, eps, r, c, d)};
}

Rational tri(int n) { return Rational(n * (n - 1), 2); }

// s2 (1 - 1/q) - r2 / q - 1 with q = n(n+1)/(2(n-1)), written out separately.
Rational margin_oracle(int n, const ExponentCandidate& c) {
    const Rational inv_q(2 * (n - 1), n * (n + 1));
    return c.s2 * (1 - inv_q) - c.r2 * inv_q - 1;
}

}  // namespace

TEST_CASE("base exponent candidates") {
    for (int n = 2; n <= 8; ++n) {
        const ExponentCandidate c{tri(n), 0, 0, n, "base"};
        const auto chk = check_candidate(n, c);
        CHECK(chk.ok());
        CHECK(chk.margin == Rational(n) * (1 - Rational(2 * (n - 1), n * (n + 1))) - 1);
    }
    const auto three = check_candidate(3, {3, 0, 1, 2, ""});
    CHECK(three.r_sum);
    CHECK(three.s_sum);
    CHECK(three.margin == Rational(1, 3));

    CHECK_FALSE(check_candidate(3, {3, 0, 2, 1, ""}).strict);
    CHECK_FALSE(check_candidate(3, {2, 0, 1, 2, ""}).r_sum);
}

TEST_CASE("every generated candidate satisfies the exponent identities") {
    for (int n = 2; n <= 8; ++n) {
        const auto list = mlF_candidates(n);
        REQUIRE(list.size() >= 2);
        CHECK(list[0].s2 == Rational(n));
        CHECK(list[1].s1 == Rational(n - 2));
        for (const auto& c : list) {
            const auto chk = check_candidate(n, c);
            INFO("n=" << n << " " << c.origin);
            CHECK(chk.ok());
            CHECK(chk.margin == margin_oracle(n, c));
        }
    }
}

TEST_CASE("candidates from band counts") {
    BandCounts bc;
    bc.k = 2;
    bc.N = 2;
    bc.M1 = 0;
    bc.M2 = 1;
    const auto q = candidate_from_counts(2, IndexRole::quasi_free, bc);
    REQUIRE(q);
    CHECK(q->r1 == Rational(1));
    CHECK(q->r2 == Rational(0));
    CHECK(q->s1 == Rational(0));
    CHECK(q->s2 == Rational(2));

    // n = 3, last position free with one more free index in its band.
    bc = {};
    bc.k = 3;
    bc.N = 2;
    const auto f = candidate_from_counts(3, IndexRole::free, bc);
    REQUIRE(f);
    CHECK(f->r2 == Rational(0));
    CHECK(check_candidate(3, *f).ok());

    // The last bound index brings a negative power of alpha2 when the band is small.
    bc = {};
    bc.k = 2;
    bc.N = 1;
    const auto b = candidate_from_counts(2, IndexRole::bound, bc);
    REQUIRE(b);
    CHECK(b->r2 < Rational(0));

    bc.k = 5;  // more positions than 2n - 1
    CHECK_FALSE(candidate_from_counts(2, IndexRole::free, bc));
    bc.k = 3;
    CHECK_FALSE(candidate_from_counts(2, IndexRole::dropped, bc));
}

TEST_CASE("hypothesis exponent checks") {
    const auto one = check_hypothesis_exponents(side_one_from_mlE(2));
    CHECK(one.ok);
    CHECK(one.exponent_E == Rational(2, 3));
    CHECK(one.exponent_F == Rational(2, 3));  // 1/q_2' with q_2 = 3

    // u2/r - u4/r' - 1 = 0 exactly.
    HypothesisExponents edge{HypothesisSide::one, {Rational(1, 2), Rational(3, 2), 1, 0}, Rational(3, 2), 3};
    const auto e = check_hypothesis_exponents(edge);
    CHECK_FALSE(e.ok);
    CHECK(e.violated.find("u2/r") != std::string::npos);

    const auto four = side_two_instance(4, {6, 0, 0, 4, ""});
    CHECK(four.s == Rational(10, 3));
    CHECK(check_hypothesis_exponents(four).ok);

    HypothesisExponents off = four;
    off.e[0] = 5;
    CHECK(check_hypothesis_exponents(off).violated.find("v1+v2") == 0);

    CHECK_THROWS_AS(check_hypothesis_exponents({HypothesisSide::one, {}, 3, 2}), PreconditionError);
    for (int n = 2; n <= 8; ++n) CHECK(check_hypothesis_exponents(side_one_from_mlE(n)).ok);
}

TEST_CASE("side two is side one for the adjoint") {
    for (int n = 2; n <= 8; ++n)
        for (const auto& c : mlF_candidates(n))
            for (int bump = 0; bump < 3; ++bump) {
                auto two = side_two_instance(n, c);
                two.e[static_cast<std::size_t>(bump)] += Rational(bump, 2);  // bump 0 leaves it valid
                const HypothesisExponents adj{HypothesisSide::one, {two.e[2], two.e[3], two.e[0], two.e[1]},
                                              dual(two.s), dual(two.r)};
                const auto a = check_hypothesis_exponents(two);
                const auto b = check_hypothesis_exponents(adj);
                CHECK(a.ok == b.ok);
                CHECK(a.ok == (bump == 0));
                CHECK(a.exponent_E == b.exponent_F);
                CHECK(a.exponent_F == b.exponent_E);
            }
}

TEST_CASE("tower of depth 3 on a quasi-extremal pair") {
    const auto p = quasi_pair(2, 0.125);
    const auto q = QuadratureSpec::automatic();
    const auto rep = verify_mlE(p.N, p.N, p.B, q);
    const TowerInputs in{{p.N}, {p.B, p.B}, {rep.first, rep.first}};
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        std::mt19937_64 rng(seed);
        const auto tower = grow_tower(in, 3, {}, rng);
        REQUIRE(tower.depth() == 3);
        CHECK_FALSE(tower_violation(tower));
        CHECK(tower.levels[0].width == rep.first.beta);
        CHECK(tower.levels[1].width == rep.first.alpha);
        CHECK(tower.target_names[static_cast<std::size_t>(tower.levels[2].target)] == "F2");
        for (const auto& level : tower.levels) {
            CHECK(!level.samples.empty());
            CHECK(level.acceptance >= 0.25);
            CHECK(level.acceptance <= 4.0);
        }
    }
}

TEST_CASE("tampered towers are caught") {
    const auto p = quasi_pair(2, 0.25);
    const auto rep = verify_mlE(p.N, p.N, p.B, QuadratureSpec::automatic());
    std::mt19937_64 rng(3);
    auto tower = grow_tower({{p.N}, {p.B}, {rep.first}}, 2, {}, rng);
    auto bad = tower;
    bad.levels[1].samples[0].t[1] = bad.levels[1].samples[0].t[0];
    CHECK(tower_violation(bad));
    bad = tower;
    bad.x0[0] += 10.0;
    CHECK(tower_violation(bad));
}

TEST_CASE("depth one samples the adjoint slice") {
    const auto p = quasi_pair(2, 0.25);
    const auto q = QuadratureSpec::automatic();
    const auto rep = verify_mlE(p.N, p.N, p.B, q);
    std::mt19937_64 rng(11);
    const auto tower = grow_tower({{p.N}, {p.B}, {rep.first}}, 1, {}, rng);
    const auto ext = admissible_extensions(tower, 1, {});
    const double measure = static_cast<double>(ext.size()) * tower.grid_step;
    CHECK(measure >= tower.c_n * rep.first.beta);
    // Same quantity through the operator's quadrature.
    CHECK(measure == doctest::Approx(apply_T_star(p.B, tower.x0, q)).epsilon(0.1));
}

TEST_CASE("construction failures carry the level") {
    const auto p = quasi_pair(2, 0.25);
    const LatticeSet empty(2, p.B.delta());
    std::mt19937_64 rng(1);
    try {
        grow_tower({{p.N}, {empty}, {{1.0, 0.1}}}, 3, {}, rng);
        FAIL("expected a construction failure");
    } catch (const TowerConstructionError& e) {
        CHECK(e.failed_level() == 1);
    }

    // A far-away second E target: level 4 can never be reached.
    const Point far{40.0, 0.0};
    const auto moved = tube_set(CurveConfig(2), 0.25, 1.0, far, p.N.delta());
    TowerOptions opt;
    opt.retries = 3;
    try {
        grow_tower({{p.N, moved}, {p.B}, {{1.8, 0.2}, {1.8, 0.2}}}, 4, opt, rng);
        FAIL("expected a construction failure");
    } catch (const TowerConstructionError& e) {
        CHECK(e.failed_level() == 4);
    }

    CHECK_THROWS_AS(grow_tower({{p.N}, {p.B}, {{1.0, 0.1}}}, 5, {}, rng), PreconditionError);
    CHECK_THROWS_AS(grow_tower({{p.N}, {p.B}, {{0.0, 0.1}}}, 2, {}, rng), PreconditionError);
}

TEST_CASE("tower growth does not depend on the thread count") {
    const auto p = quasi_pair(2, 0.25);
    const auto rep = verify_mlE(p.N, p.N, p.B, QuadratureSpec::automatic());
    const TowerInputs in{{p.N, p.N}, {p.B}, {rep.first, rep.second}};
    TowerOptions a, b;
    b.jobs = 3;
    std::mt19937_64 r1(5), r2(5);
    const auto t1 = grow_tower(in, 4, a, r1);
    const auto t2 = grow_tower(in, 4, b, r2);
    for (int k = 0; k < 4; ++k) {
        const auto& s1 = t1.levels[static_cast<std::size_t>(k)].samples;
        const auto& s2 = t2.levels[static_cast<std::size_t>(k)].samples;
        REQUIRE(s1.size() == s2.size());
        for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i].t == s2[i].t);
    }
}

TEST_CASE("lower-bound lemma on quasi-extremal pairs") {
    const auto q = QuadratureSpec::automatic();
    for (int n : {2, 3})
        for (double eps : {0.5, 0.25, 0.125}) {
            const auto p = quasi_pair(n, eps);
            const auto rep = verify_mlE(p.N, p.N, p.B, q);
            INFO("n=" << n << " eps=" << eps);
            CHECK(rep.status == CheckStatus::pass);
            CHECK(rep.ratio >= rep.c);
            CHECK(rep.ratio <= 8.0);
            if (n == 2) {
                const double a1 = rep.first.alpha, a2 = rep.second.alpha, b1 = rep.first.beta;
                CHECK(rep.bound == doctest::Approx(a2 * a2 * a1 * (b1 / a1)));
            }
        }
}

TEST_CASE("shrinking E2 lowers the ratio or breaks the premise") {
    const auto q = QuadratureSpec::automatic();
    const auto p = quasi_pair(2, 0.125);
    const auto full = verify_mlE(p.N, p.N, p.B, q);
    const auto half = p.N.filter([](std::size_t i) { return i % 2 == 0; });
    const auto rep = verify_mlE(p.N, half, p.B, q);
    if (rep.status == CheckStatus::inconclusive) {
        CHECK(rep.note.find("alpha2 >= alpha1") != std::string::npos);
    } else {
        CHECK(rep.ratio < full.ratio);
        CHECK(rep.status == CheckStatus::pass);
    }
}

TEST_CASE("degenerate pairs are inconclusive") {
    const auto q = QuadratureSpec::automatic();
    const auto p = quasi_pair(2, 0.25);
    const Point far{40.0, 0.0};
    const auto moved = tube_set(CurveConfig(2), 0.25, 1.0, far, p.N.delta());
    CHECK(verify_mlE(moved, moved, p.B, q).status == CheckStatus::inconclusive);
    CHECK(verify_mlF(moved, p.B, p.B, q).status == CheckStatus::inconclusive);
}

TEST_CASE("upper-bound lemma with F1 = F2") {
    const auto q = QuadratureSpec::automatic();
    MultilinearOptions opt;
    opt.always_halve = true;
    for (int n : {2, 3})
        for (double eps : {0.5, 0.25, 0.125})
            for (double r : {1.0, 0.5}) {
                const auto p = quasi_pair(n, eps, r);
                const auto rep = verify_mlF(p.N, p.B, p.B, q, opt);
                INFO("n=" << n << " eps=" << eps << " r=" << r);
                REQUIRE(rep.status == CheckStatus::pass);
                CHECK(rep.halved);
                CHECK(rep.best_ratio >= rep.c);
                CHECK(rep.best_ratio <= 32.0);
                // Equal sets make every admissible candidate the same bound.
                CHECK(rep.max_bound_ratio * rep.best_ratio == doctest::Approx(1.0));
            }

    const auto p = quasi_pair(2, 0.25);
    const auto base = verify_mlF(p.N, p.B, p.B, q, opt);
    opt.rho = base.first.alpha / 2;
    const auto lowered = verify_mlF(p.N, p.B, p.B, q, opt);
    CHECK(lowered.second.alpha == doctest::Approx(base.first.alpha / 2));
    CHECK(lowered.status == CheckStatus::pass);
    opt.rho = base.first.alpha * 2;
    CHECK_THROWS_AS(verify_mlF(p.N, p.B, p.B, q, opt), PreconditionError);
}

TEST_CASE("Jacobian chain constant is stable across seeds") {
    const auto q = QuadratureSpec::automatic();
    for (int n : {2, 3}) {
        const auto p = quasi_pair(n, 0.25);
        const auto rep = verify_mlE(p.N, p.N, p.B, q);
        const TowerInputs in{{p.N, p.N}, {p.B}, {rep.first, rep.second}};
        std::vector<double> cs;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            std::mt19937_64 rng(seed);
            const auto tower = grow_tower(in, 2 * n, {}, rng);
            const auto chain = jacobian_chain(tower, 16, 60, rng);
            CHECK(chain.integral > 0);
            CHECK(chain.bound == doctest::Approx(rep.bound));
            cs.push_back(chain.constant);
        }
        std::vector<double> sorted = cs;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[2];
        for (double c : cs) {
            CHECK(c >= 0.5 * median);
            CHECK(c <= 1.5 * median);
        }
    }
}
