#include "mclab/error.hpp"
#include "mclab/extremals.hpp"

#include <doctest.h>

#include <cmath>

using namespace mclab;

namespace {

// One constant for every "~" in the families.
constexpr double kC = 16.0;

bool within(double x, double c = kC) { return x >= 1.0 / c && x <= c; }

FamilySpec spec_of(FamilyKind kind, int n, int M) {
    FamilySpec s;
    s.kind = kind;
    s.n = n;
    s.M = M;
    return s;
}

}  // namespace

TEST_CASE("schedules by direct substitution") {
    const auto qn = family_schedule(FamilyKind::u_le_qn, 2, 3);
    REQUIRE(qn.size() == 3);
    CHECK(qn[0].j == 1);
    CHECK(qn[0].eps == doctest::Approx(0.125));
    CHECK(qn[0].r == doctest::Approx(0.5));

    const auto pn = family_schedule(FamilyKind::v_ge_pn, 2, 2);
    CHECK(pn[0].j == -1);
    CHECK(pn[0].eps == doctest::Approx(std::pow(2.0, -1.5)));
    CHECK(pn[0].r == doctest::Approx(std::pow(2.0, -0.5)));
    CHECK(pn[1].j == -2);
    CHECK(pn[1].eps == doctest::Approx(1.0));

    const auto uv = family_schedule(FamilyKind::u_le_v, 3, 2);
    CHECK(uv[1].eps == doctest::Approx(std::pow(2.0, -8)));
    CHECK(uv[1].r == 1.0);

    const auto scaled = family_schedule(FamilyKind::u_le_qn, 2, 3, 0.125);
    CHECK(scaled[0].eps == doctest::Approx(0.125 * 0.125));
    CHECK_THROWS_AS(family_schedule(FamilyKind::u_le_qn, 2, 3, 2.0), PreconditionError);
    CHECK_THROWS_AS(family_schedule(FamilyKind::u_le_v, 2, 0), PreconditionError);
}

TEST_CASE("schedule parameters stay in (0,1]") {
    for (auto kind : {FamilyKind::u_le_v, FamilyKind::u_le_qn, FamilyKind::v_ge_pn})
        for (int n = 2; n <= 5; ++n)
            for (int M = 1; M <= 10; ++M)
                for (const auto& s : family_schedule(kind, n, M)) {
                    CHECK(s.eps > 0.0);
                    CHECK(s.eps <= 1.0);
                    CHECK(s.r > 0.0);
                    CHECK(s.r <= 1.0);
                }
}

TEST_CASE("members are pairwise disjoint") {
    for (auto kind : {FamilyKind::u_le_v, FamilyKind::u_le_qn, FamilyKind::v_ge_pn}) {
        const auto fam = build_family(spec_of(kind, 2, 3));
        REQUIRE(fam.members.size() == 3);
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = a + 1; b < 3; ++b) {
                CHECK(regions_disjoint(fam.members[a].tube, fam.members[b].tube));
                CHECK(regions_disjoint(fam.members[a].ball, fam.members[b].ball));
            }
    }
}

TEST_CASE("u <= v family norms grow like powers of M") {
    const LorentzIndex fidx(1.5, 2.0);
    const LorentzIndex gidx(1.5, 3.0);  // q_2' = 3/2, v' = 3
    for (int M : {1, 2, 4}) {
        auto [f, g] = build_u_le_v(2, M, 2.0, 1.5);
        CHECK(static_cast<int>(f.levels().size()) == M);
        CHECK(within(lorentz_norm_rearrangement(f, fidx) / std::pow(M, 1.0 / 2.0)));
        CHECK(within(lorentz_norm_rearrangement(g, gidx) / std::pow(M, 1.0 / 3.0)));
    }
    // M = 1 is a single quasi-extremal pair: <T chi_N, chi_B> ~ r |B| with r = 1.
    const auto fam = build_family(spec_of(FamilyKind::u_le_v, 2, 1));
    const auto& m = fam.members.front();
    CHECK(within(pairing(m.tube, m.ball, QuadratureSpec::automatic()) / m.ball.measure()));
}

TEST_CASE("capacity errors surface") {
    auto spec = spec_of(FamilyKind::u_le_v, 2, 3);
    spec.budget = 100'000;
    CHECK_THROWS_AS(build_family(spec), CapacityError);
}

TEST_CASE("u <= q_n family normalizations") {
    const auto q = QuadratureSpec::automatic();
    const double p = 1.5;
    const double qd = 1.5;
    for (int M : {1, 2, 3}) {
        const auto spec = spec_of(FamilyKind::u_le_qn, 2, M);
        const auto fam = build_family(spec);
        for (std::size_t k = 0; k < fam.members.size(); ++k) {
            const int j = fam.members[k].param.j;
            CHECK(within(std::pow(2.0, j * p) * fam.members[k].tube.measure() / fam.c));
            CHECK(within(fam.members[k].ball.measure() / fam.eta));
        }
        const double total = weighted_pairing(fam.left, fam.right, q);
        CHECK(within(total / (M * std::pow(fam.c, 1.0 / p) * std::pow(fam.eta, 1.0 / qd))));

        // The public builder gives the same sets.
        auto [f, F] = build_u_le_qn(2, M);
        CHECK(f.levels().size() == static_cast<std::size_t>(M));
        CHECK(F.size() == static_cast<std::size_t>(M));
    }
}

TEST_CASE("v >= p_n family normalizations") {
    const double qd = 1.5;
    for (int M : {1, 2, 3}) {
        const auto fam = build_family(spec_of(FamilyKind::v_ge_pn, 2, M));
        for (const auto& m : fam.members) {
            CHECK(within(m.tube.measure() / fam.eta));
            CHECK(within(std::pow(2.0, m.param.j * qd) * m.ball.measure() / fam.c));
        }
        auto [E, g] = build_v_ge_pn(2, M);
        CHECK(E.size() == static_cast<std::size_t>(M));
        CHECK(g.levels().front().j == -M);
    }
}

TEST_CASE("predicted slopes") {
    CHECK(predicted_slope(FamilyKind::u_le_v, 2, 2.0, 2.0) == doctest::Approx(0.0));
    CHECK(predicted_slope(FamilyKind::u_le_v, 2, 4.0, 2.0) == doctest::Approx(0.25));
    CHECK(predicted_slope(FamilyKind::u_le_qn, 2, 3.0, 2.0) == doctest::Approx(0.0));
    CHECK(predicted_slope(FamilyKind::u_le_qn, 2, 6.0, 2.0) == doctest::Approx(1.0 / 6.0));
    CHECK(predicted_slope(FamilyKind::u_le_qn, 3, 6.0, 2.0) == doctest::Approx(1.0 / 6.0));
    CHECK(predicted_slope(FamilyKind::v_ge_pn, 2, 1.5, 1.5) == doctest::Approx(0.0));
    CHECK(predicted_slope(FamilyKind::v_ge_pn, 2, 1.5, 3.0) == doctest::Approx(-1.0 / 3.0));
    CHECK(predicted_slope(FamilyKind::v_ge_pn, 3, 2.0, 4.0) == doctest::Approx(-0.25));
    CHECK_THROWS_AS(predicted_slope(FamilyKind::u_le_v, 2, 2.0, 1.0), PreconditionError);
}

TEST_CASE("least squares slope") {
    CHECK(least_squares_slope({0, 1, 2}, {1, 3, 5}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(least_squares_slope({1, 1}, {0, 1}), PreconditionError);
}

TEST_CASE("fitted slopes") {
    const auto q = QuadratureSpec::automatic();
    const auto uv = fit_scaling(FamilyKind::u_le_v, 2, 2.0, 2.0, {1, 2, 3}, q);
    CHECK(std::fabs(uv.deviation()) <= 0.15);
    CHECK(uv.ratios.size() == 3);

    const auto qn = fit_scaling(FamilyKind::u_le_qn, 2, 6.0, 2.0, {1, 2, 3, 4}, q);
    CHECK(qn.predicted_slope == doctest::Approx(1.0 / 6.0));
    CHECK(std::fabs(qn.deviation()) <= 0.1);

    const auto pn = fit_scaling(FamilyKind::v_ge_pn, 2, 1.5, 3.0, {1, 2, 3, 4}, q);
    CHECK(std::fabs(pn.deviation()) <= 0.15);

    CHECK_THROWS_AS(fit_scaling(FamilyKind::u_le_v, 2, 2.0, 2.0, {1, 2, 2}, q), PreconditionError);
}

TEST_CASE("both norm forms agree up to a constant") {
    FamilySpec spec = spec_of(FamilyKind::u_le_qn, 2, 3);
    const auto m = measure_family(spec, QuadratureSpec::automatic());
    for (double u : {1.0, 3.0, 6.0}) {
        const LorentzIndex idx(1.5, u);
        CHECK(within(family_norm(m.left_levels, idx, NormForm::dyadic) /
                     family_norm(m.left_levels, idx, NormForm::rearrangement)));
    }
    CHECK(norm_form_from_string(to_string(NormForm::rearrangement)) == NormForm::rearrangement);
    CHECK(family_kind_from_string(to_string(FamilyKind::v_ge_pn)) == FamilyKind::v_ge_pn);
    CHECK_THROWS_AS(family_kind_from_string("nope"), PreconditionError);
}

TEST_CASE("pairing is independent of the thread count") {
    const auto fam = build_family(spec_of(FamilyKind::v_ge_pn, 2, 3));
    CHECK(weighted_pairing(fam.left, fam.right, QuadratureSpec::automatic(1.0, 1)) ==
          weighted_pairing(fam.left, fam.right, QuadratureSpec::automatic(1.0, 3)));
}
