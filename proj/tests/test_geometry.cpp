#include "mclab/error.hpp"
#include "mclab/geometry.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mclab;

namespace {

void check_point(const Point& got, std::initializer_list<double> want) {
    REQUIRE(got.size() == want.size());
    std::size_t i = 0;
    for (double w : want) CHECK(got[i++] == doctest::Approx(w));
}

SliceLayout all_free(int m) {
    return {std::vector<IndexRole>(static_cast<std::size_t>(m), IndexRole::free),
            std::vector<int>(static_cast<std::size_t>(m), -1)};
}

}  // namespace

TEST_CASE("moment curve evaluation") {
    check_point(moment_curve(CurveConfig(3), 0.0), {0, 0, 0});
    check_point(moment_curve(CurveConfig(3), 2.0), {2, 4, 8});
    check_point(moment_curve(CurveConfig(5), -1.0), {-1, 1, -1, 1, -1});
    CHECK_THROWS_AS(CurveConfig(1), PreconditionError);
}

TEST_CASE("exponent profile is exact") {
    ExponentProfile p2(2);
    CHECK(p2.p == Rational(3, 2));
    CHECK(p2.q == Rational(3));
    CHECK(p2.q_dual == Rational(3, 2));
    for (int n = 2; n <= 8; ++n) {
        ExponentProfile e(n);
        CHECK(1 / e.p + 1 / e.p_dual == Rational(1));
        CHECK(1 / e.q + 1 / e.q_dual == Rational(1));
        CHECK(e.q == Rational(n * (n + 1), 2 * (n - 1)));
    }
    CHECK_NOTHROW(ExponentProfile(2, 2.0, 2.5));
    CHECK_THROWS_AS(ExponentProfile(2, 3.0, 4.0), PreconditionError);
    CHECK_THROWS_AS(ExponentProfile(2, 2.0, 1.4), PreconditionError);
    CHECK_THROWS_AS(ExponentProfile(2, 2.0, 2.0), PreconditionError);
}

TEST_CASE("dilation") {
    const double a = 0.3, b = -1.7, c = 2.5;
    check_point(dilate(CurveConfig(2), 2.0, std::vector<double>{1, 1}), {2, 4});
    check_point(dilate(CurveConfig(3), 1.0, std::vector<double>{a, b, c}), {a, b, c});
    check_point(dilate(CurveConfig(3), 3.0, moment_curve(CurveConfig(3), 2.0)), {6, 36, 216});
    CHECK_THROWS_AS(dilate(CurveConfig(2), 0.0, std::vector<double>{1, 1}), PreconditionError);
    CHECK_THROWS_AS(dilate(CurveConfig(2), -1.0, std::vector<double>{1, 1}), PreconditionError);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> radius(0.05, 4.0);
    std::uniform_real_distribution<double> param(-2.0, 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const CurveConfig cfg(2 + trial % 5);
        const double R = radius(rng);
        const double t = param(rng);
        const auto lhs = dilate(cfg, R, moment_curve(cfg, t));
        const auto rhs = moment_curve(cfg, R * t);
        for (std::size_t k = 0; k < lhs.size(); ++k)
            REQUIRE(std::fabs(lhs[k] - rhs[k]) <= 1e-12 * std::max(1.0, std::fabs(rhs[k])));
    }
}

TEST_CASE("alternating sums") {
    const CurveConfig c2(2);
    check_point(phi_k(c2, std::vector<double>{0.4}), {0.4, 0.16});
    check_point(phi_k(c2, std::vector<double>{0.4, 0.4}), {0, 0});
    check_point(phi_k(CurveConfig(3), std::vector<double>{1, 0, -1}), {0, 2, 0});
    CHECK_THROWS_AS(phi_k(c2, std::vector<double>{}), PreconditionError);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> param(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> t;
        for (int i = 0; i < 1 + trial % 4; ++i) {
            const double v = param(rng);
            t.push_back(v);
            t.push_back(v);
        }
        for (double v : phi_k(CurveConfig(4), t)) REQUIRE(std::fabs(v) <= 1e-15);
    }
}

TEST_CASE("vandermonde jacobian against the Leibniz oracle") {
    const CurveConfig c2(2);
    CHECK(vandermonde_jacobian(c2, std::vector<double>{0.3, 0.3}) == doctest::Approx(0.0));
    CHECK(vandermonde_jacobian(c2, std::vector<double>{0.0, 1.0}) == doctest::Approx(2.0));

    // a_n frozen from the oracle at one configuration, then compared on many.
    for (int n = 2; n <= 6; ++n) {
        const std::vector<double> probe = [n] {
            std::vector<double> t;
            for (int i = 0; i < n; ++i) t.push_back(-0.9 + 1.7 * i / n + 0.01 * i * i);
            return t;
        }();
        const double oracle_a =
            std::fabs(oracle::leibniz_determinant(oracle::derivative_rows(probe))) / oracle::gap_product(probe);
        CHECK(oracle_a == doctest::Approx(oracle::factorial(n)).epsilon(1e-9));
        CHECK(vandermonde_constant(n) == doctest::Approx(oracle_a).epsilon(1e-10));
    }

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> param(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> t{param(rng), param(rng), param(rng)};
        const double want = std::fabs(oracle::leibniz_determinant(oracle::derivative_rows(t)));
        CHECK(vandermonde_jacobian(CurveConfig(3), t) == doctest::Approx(want).epsilon(1e-9));
        CHECK(vandermonde_jacobian(CurveConfig(3), t) ==
              doctest::Approx(vandermonde_constant(3) * oracle::gap_product(t)).epsilon(1e-10));
    }
}

TEST_CASE("determinant and product forms agree on random configurations") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> param(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + trial % 5;
        std::vector<double> t(static_cast<std::size_t>(n));
        for (auto& v : t) v = param(rng);
        const double det = derivative_matrix_determinant(CurveConfig(n), t);
        const double prod = vandermonde_constant(n) * vandermonde_product(t);
        REQUIRE(std::fabs(det - prod) <= 1e-10 * prod);
    }
}

TEST_CASE("sliced jacobian") {
    const CurveConfig cfg(3);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> param(-1.0, 1.0);

    SUBCASE("all free reproduces the plain jacobian") {
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> tau{param(rng), param(rng), param(rng)};
            const double got = jacobian_sliced(cfg, {}, all_free(3), tau, {});
            CHECK(got == vandermonde_jacobian(cfg, tau));
        }
    }

    // Positions 0..4 of a length-5 configuration: 0 dropped, band {1,2,3}
    // with 2 and 3 bound to 1, then 4 free and an extra quasi-free slot.
    SliceLayout layout{{IndexRole::dropped, IndexRole::free, IndexRole::bound, IndexRole::bound, IndexRole::free,
                        IndexRole::quasi_free},
                       {-1, -1, 1, 1, -1, 4}};

    SUBCASE("finite-difference oracle with zero offsets") {
        const std::vector<double> t0{0.2};
        const std::vector<double> tau{-0.6, 0.1, 0.7};
        const std::vector<double> s{0.0, 0.0};
        const double got = jacobian_sliced(cfg, t0, layout, tau, s);
        // Independent oracle: central differences of Phi_m in each tau direction.
        const double h = 1e-5;
        std::vector<std::vector<double>> jac(3, std::vector<double>(3));
        for (int c = 0; c < 3; ++c) {
            auto plus = tau;
            auto minus = tau;
            plus[static_cast<std::size_t>(c)] += h;
            minus[static_cast<std::size_t>(c)] -= h;
            const auto fp = phi_k(cfg, reconstruct_configuration(layout, t0, plus, s));
            const auto fm = phi_k(cfg, reconstruct_configuration(layout, t0, minus, s));
            for (int k = 0; k < 3; ++k)
                jac[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)] =
                    (fp[static_cast<std::size_t>(k)] - fm[static_cast<std::size_t>(k)]) / (2 * h);
        }
        CHECK(got == doctest::Approx(std::fabs(oracle::leibniz_determinant(jac))).epsilon(1e-6));
    }

    SUBCASE("tiny offsets stay near the product form") {
        std::uniform_real_distribution<double> tiny(-1e-6, 1e-6);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> tau{param(rng), param(rng), param(rng)};
            const std::vector<double> s{tiny(rng), tiny(rng)};
            const double got = jacobian_sliced(cfg, std::vector<double>{param(rng)}, layout, tau, s);
            const double want = vandermonde_constant(3) * vandermonde_product(tau);
            if (want < 1e-3) continue;
            CHECK(std::fabs(got - want) <= 0.01 * want);
        }
    }

    SUBCASE("round trip and dimension checks") {
        const std::vector<double> t0{0.5};
        const std::vector<double> tau{0.1, 0.2, 0.3};
        const std::vector<double> s{0.01, -0.02};
        const auto t = reconstruct_configuration(layout, t0, tau, s);
        CHECK(t == std::vector<double>{0.5, 0.1, 0.1 + 0.01, 0.1 - 0.02, 0.2, 0.3});
        CHECK_THROWS_AS(jacobian_sliced(cfg, t0, layout, tau, std::vector<double>{0.1}), PreconditionError);
        CHECK_THROWS_AS(jacobian_sliced(cfg, {}, layout, tau, s), PreconditionError);
    }
}
