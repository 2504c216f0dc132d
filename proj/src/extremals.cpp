#include "mclab/extremals.hpp"

#include "mclab/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mclab {

namespace {

double dual(double x) { return x / (x - 1.0); }

// Can <T chi_A, chi_B> be nonzero at all? x in B needs x1 - t in A's x1 range.
bool may_interact(const LatticeSet& a, const LatticeSet& b, double R) {
    if (a.empty() || b.empty()) return false;
    return b.coverage_max(0) >= a.coverage_min(0) - R && b.coverage_min(0) <= a.coverage_max(0) + R;
}

}  // namespace

std::string to_string(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::u_le_v: return "u_le_v";
        case FamilyKind::u_le_qn: return "u_le_qn";
        case FamilyKind::v_ge_pn: return "v_ge_pn";
    }
    return "unknown";
}

FamilyKind family_kind_from_string(const std::string& name) {
    if (name == "u_le_v") return FamilyKind::u_le_v;
    if (name == "u_le_qn") return FamilyKind::u_le_qn;
    if (name == "v_ge_pn") return FamilyKind::v_ge_pn;
    throw PreconditionError("unknown family kind: " + name);
}

double DeltaRule::operator()(double eps, double r, int n) const {
    require(divisor >= 4.0, "DeltaRule: divisor below 4 breaks the tube resolution bound");
    return eps * std::pow(r, n) / divisor;
}

std::vector<ScheduleEntry> family_schedule(FamilyKind kind, int n, int M, double eps_scale) {
    require(eps_scale > 0.0 && eps_scale <= 1.0, "family_schedule: eps_scale must lie in (0,1]");
    require(n >= 2, "family_schedule: need n >= 2");
    require(M >= 1, "family_schedule: need M >= 1");
    const ExponentProfile e(n);
    const double p = e.p_value();
    const double qd = e.q_dual_value();
    const double q = e.q_value();
    std::vector<ScheduleEntry> out;
    for (int k = 1; k <= M; ++k) {
        ScheduleEntry s;
        switch (kind) {
            case FamilyKind::u_le_v:
                s = {k, std::ldexp(1.0, -(n + 1) * k), 1.0};
                break;
            case FamilyKind::u_le_qn:
                s = {k, eps_scale * std::exp2((k - M) * p), std::ldexp(1.0, -k)};
                break;
            case FamilyKind::v_ge_pn:
                s = {-k, eps_scale * std::exp2(-(M - k) * qd), std::exp2(-k * qd / q)};
                break;
        }
        require(s.eps > 0.0 && s.eps <= 1.0 && s.r > 0.0 && s.r <= 1.0,
                "family_schedule: parameters left (0,1]");
        out.push_back(s);
    }
    return out;
}

BuiltFamily build_family(const FamilySpec& spec) {
    require(spec.R > 0.0, "build_family: need R > 0");
    const auto schedule = family_schedule(spec.kind, spec.n, spec.M, spec.eps_scale);
    const CurveConfig cfg(spec.n);
    BuiltFamily fam;
    fam.spec = spec;
    std::size_t used = 0;
    auto builder = [&](int k, const Point& center) {
        const auto& s = schedule[static_cast<std::size_t>(k)];
        const double delta = spec.delta_rule(s.eps, s.r, spec.n);
        require(used <= spec.budget, "build_family: budget exhausted");
        auto tube = tube_set(cfg, s.eps, s.r, center, delta, spec.budget - used);
        used += tube.size();
        if (used > spec.budget) throw CapacityError("build_family: cell budget exceeded");
        auto ball = ball_set(cfg, s.eps, s.r, center, delta, spec.budget - used);
        used += ball.size();
        if (used > spec.budget) throw CapacityError("build_family: cell budget exceeded");
        fam.members.push_back({s, delta, center, tube, ball});
        return PackMember{{std::move(tube), std::move(ball)}};
    };
    auto half_width = [&](int k) {
        const auto& s = schedule[static_cast<std::size_t>(k)];
        return s.r * (1.0 + s.eps);
    };
    pack_translates(spec.n, spec.M, builder, half_width, PackRule{4.0, 2.0 * spec.R});
    fam.cells = used;

    const ExponentProfile e(spec.n);
    const double p = e.p_value();
    const double qd = e.q_dual_value();
    const int n = spec.n;
    const int M = spec.M;
    for (const auto& m : fam.members) {
        const int j = m.param.j;
        switch (spec.kind) {
            case FamilyKind::u_le_v:
                fam.left.push_back({2 * (n - 1) * j, m.tube});
                fam.right.push_back({(n * n - n + 2) * j, m.ball});
                break;
            case FamilyKind::u_le_qn:
                fam.left.push_back({j, m.tube});
                fam.right.push_back({0, m.ball});
                break;
            case FamilyKind::v_ge_pn:
                fam.left.push_back({0, m.tube});
                fam.right.push_back({j, m.ball});
                break;
        }
    }
    // |N| ~ eps^{n-1} and |B| ~ eps^n at fixed r, so the scale enters as a power.
    const double k = spec.eps_scale;
    if (spec.kind == FamilyKind::u_le_qn) {
        fam.c = std::pow(k, n - 1) * std::exp2(-M * p * (n - 1));
        fam.eta = std::pow(k, n) * std::exp2(-M * p * n);
    } else if (spec.kind == FamilyKind::v_ge_pn) {
        fam.c = std::pow(k, n) * std::exp2(-M * qd * n);
        fam.eta = std::pow(k, n - 1) * std::exp2(-M * qd * (n - 1));
    }
    return fam;
}

std::pair<StepFunction, StepFunction> build_u_le_v(int n, int M, double u, double v, const DeltaRule& rule) {
    require(u >= 1.0 && v > 1.0, "build_u_le_v: need u >= 1 and v > 1");
    FamilySpec spec;
    spec.kind = FamilyKind::u_le_v;
    spec.n = n;
    spec.M = M;
    spec.delta_rule = rule;
    auto fam = build_family(spec);
    return {StepFunction(fam.left), StepFunction(fam.right)};
}

std::pair<StepFunction, std::vector<LatticeSet>> build_u_le_qn(int n, int M, const DeltaRule& rule) {
    FamilySpec spec;
    spec.kind = FamilyKind::u_le_qn;
    spec.n = n;
    spec.M = M;
    spec.delta_rule = rule;
    auto fam = build_family(spec);
    std::vector<LatticeSet> F;
    for (auto& level : fam.right) F.push_back(std::move(level.set));
    return {StepFunction(fam.left), std::move(F)};
}

std::pair<std::vector<LatticeSet>, StepFunction> build_v_ge_pn(int n, int M, const DeltaRule& rule) {
    FamilySpec spec;
    spec.kind = FamilyKind::v_ge_pn;
    spec.n = n;
    spec.M = M;
    spec.delta_rule = rule;
    auto fam = build_family(spec);
    std::vector<LatticeSet> E;
    for (auto& level : fam.left) E.push_back(std::move(level.set));
    return {std::move(E), StepFunction(fam.right)};
}

double weighted_pairing(const WeightedSets& left, const WeightedSets& right, const QuadratureSpec& quad) {
    double total = 0.0;
    for (const auto& a : left)
        for (const auto& b : right)
            if (may_interact(a.set, b.set, quad.R))
                total += std::ldexp(pairing(a.set, b.set, quad), a.j + b.j);
    return total;
}

FamilyMeasurement measure_family(const FamilySpec& spec, const QuadratureSpec& quad) {
    const auto fam = build_family(spec);
    FamilyMeasurement out;
    out.M = spec.M;
    out.cells = fam.cells;
    out.pairing = weighted_pairing(fam.left, fam.right, quad);
    for (const auto& a : fam.left) out.left_levels.push_back({a.j, a.set.measure()});
    for (const auto& b : fam.right) out.right_levels.push_back({b.j, b.set.measure()});

    const ExponentProfile e(spec.n);
    const double p = e.p_value();
    const double qd = e.q_dual_value();
    for (std::size_t k = 0; k < fam.members.size(); ++k) {
        const int j = fam.members[k].param.j;
        const double E = fam.left[k].set.measure();
        const double F = fam.right[k].set.measure();
        switch (spec.kind) {
            case FamilyKind::u_le_v:
                // The dyadic terms of both norms, each of order one.
                out.normalization.emplace_back(std::ldexp(std::pow(E, 1.0 / p), fam.left[k].j),
                                               std::ldexp(std::pow(F, 1.0 / qd), fam.right[k].j));
                break;
            case FamilyKind::u_le_qn:
                out.normalization.emplace_back(std::exp2(j * p) * E / fam.c, F / fam.eta);
                break;
            case FamilyKind::v_ge_pn:
                out.normalization.emplace_back(E / fam.eta, std::exp2(j * qd) * F / fam.c);
                break;
        }
    }
    return out;
}

std::string to_string(NormForm form) { return form == NormForm::dyadic ? "dyadic" : "rearrangement"; }

NormForm norm_form_from_string(const std::string& name) {
    if (name == "dyadic") return NormForm::dyadic;
    if (name == "rearrangement") return NormForm::rearrangement;
    throw PreconditionError("unknown norm form: " + name);
}

double family_norm(const std::vector<DyadicLevel>& levels, const LorentzIndex& idx, NormForm form) {
    std::map<int, double> merged;
    for (const auto& l : levels) merged[l.j] += l.measure;
    if (form == NormForm::dyadic) {
        std::vector<DyadicLevel> out;
        for (const auto& [j, m] : merged) out.push_back({j, m});
        return dyadic_norm(out, idx);
    }
    std::vector<Plateau> plateaus;
    for (const auto& [j, m] : merged) plateaus.push_back({std::ldexp(1.0, j), m});
    return rearrangement_norm(std::move(plateaus), idx);
}

double predicted_slope(FamilyKind kind, int n, double u, double v) {
    require(u >= 1.0 && v > 1.0, "predicted_slope: need u >= 1 and v > 1");
    const ExponentProfile e(n);
    const double vd = dual(v);
    switch (kind) {
        case FamilyKind::u_le_v: return 1.0 - 1.0 / u - 1.0 / vd;
        case FamilyKind::u_le_qn: return 1.0 / e.q_value() - 1.0 / u;
        case FamilyKind::v_ge_pn: return 1.0 / e.p_dual_value() - 1.0 / vd;
    }
    return 0.0;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, "least_squares_slope: need two or more points");
    const double k = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= k;
    my /= k;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    require(sxx > 0.0, "least_squares_slope: abscissae coincide");
    return sxy / sxx;
}

ScalingReport fit_from_measurements(FamilyKind kind, int n, double u, double v,
                                    const std::vector<FamilyMeasurement>& runs, NormForm form) {
    const ExponentProfile e(n);
    const LorentzIndex left_idx(e.p_value(), u);
    const LorentzIndex right_idx(e.q_dual_value(), dual(v));
    ScalingReport rep;
    rep.kind = kind;
    rep.norm_form = form;
    rep.n = n;
    rep.u = u;
    rep.v = v;
    rep.predicted_slope = predicted_slope(kind, n, u, v);
    std::vector<double> lx, ly;
    for (const auto& run : runs) {
        const double nl = family_norm(run.left_levels, left_idx, form);
        const double nr = family_norm(run.right_levels, right_idx, form);
        require(nl > 0.0 && nr > 0.0 && run.pairing > 0.0, "fit_scaling: degenerate family instance");
        rep.M_values.push_back(run.M);
        rep.pairings.push_back(run.pairing);
        rep.left_norms.push_back(nl);
        rep.right_norms.push_back(nr);
        rep.ratios.push_back(run.pairing / (nl * nr));
        lx.push_back(std::log(static_cast<double>(run.M)));
        ly.push_back(std::log(rep.ratios.back()));
    }
    rep.fitted_slope = least_squares_slope(lx, ly);
    return rep;
}

ScalingReport fit_scaling(FamilyKind kind, int n, double u, double v, const std::vector<int>& M_list,
                          const QuadratureSpec& quad, const DeltaRule& rule, std::size_t budget,
                          double eps_scale, NormForm form) {
    std::vector<int> distinct(M_list);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    require(distinct.size() >= 3, "fit_scaling: need at least three distinct M values");
    std::vector<FamilyMeasurement> runs;
    for (int M : M_list) {
        FamilySpec spec;
        spec.kind = kind;
        spec.n = n;
        spec.M = M;
        spec.delta_rule = rule;
        spec.R = quad.R;
        spec.budget = budget;
        spec.eps_scale = eps_scale;
        runs.push_back(measure_family(spec, quad));
    }
    return fit_from_measurements(kind, n, u, v, runs, form);
}

}  // namespace mclab
