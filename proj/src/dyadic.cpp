#include "mclab/dyadic.hpp"

#include "mclab/error.hpp"
#include "mclab/lorentz.hpp"

#include <algorithm>
#include <cmath>

namespace mclab {

double pieces_measure(const SetPieces& F) {
    double m = 0.0;
    for (const auto& p : F) m += p.measure();
    return m;
}

double InteractionClassKey::eps() const { return std::ldexp(1.0, eps_exp); }
double InteractionClassKey::eta() const { return std::ldexp(1.0, eta_exp); }

int Classification::spacing(double A, int eps_exp) {
    require(A > 0, "spacing: A must be positive");
    const double raw = std::ceil(A * static_cast<double>(-eps_exp));
    return raw < 1.0 ? 1 : static_cast<int>(raw);
}

int dyadic_ceiling_exponent(double x) {
    require(x > 0 && std::isfinite(x), "dyadic_ceiling_exponent: x must be positive and finite");
    int e = 0;
    const double m = std::frexp(x, &e);  // x = m 2^e, m in [1/2, 1)
    return m == 0.5 ? e - 1 : e;
}

double default_separation_constant(const ExponentProfile& profile, double B_est) {
    require(B_est > 0, "default_separation_constant: B must be positive");
    return 8.0 * B_est / (profile.p_value() * std::log(2.0));
}

namespace {

void check_pieces(const StepFunction& f, const SetPieces& F) {
    require(!f.empty(), "dyadic: f has no levels");
    require(!F.empty(), "dyadic: F has no pieces");
    for (const auto& p : F) require(p.dimension() == f.dimension(), "dyadic: F and f differ in dimension");
    require(pieces_measure(F) > 0, "dyadic: F must have positive measure");
}

double interaction(const LatticeSet& E, const SetPieces& F, const QuadratureSpec& quad) {
    double s = 0.0;
    for (const auto& p : F) s += pairing(E, p, quad);
    return s;
}

}  // namespace

Classification classify(const StepFunction& f, const SetPieces& F, const ExponentProfile& profile, double A,
                        const QuadratureSpec& quad) {
    check_pieces(f, F);
    require(A > 0, "classify: A must be positive");
    Classification out;
    out.A = A;
    out.measure_F = pieces_measure(F);
    const double r = profile.p_value();
    const double F_factor = std::pow(out.measure_F, 1.0 / profile.q_dual_value());

    std::vector<StepLevel> levels = f.levels();
    std::sort(levels.begin(), levels.end(), [](const auto& a, const auto& b) { return a.j < b.j; });
    for (const auto& lv : levels) {
        const double S = interaction(lv.set, F, quad);
        if (!(S > 0)) {
            out.zero.push_back(lv.j);
            continue;
        }
        LevelInteraction li;
        li.j = lv.j;
        li.measure = lv.set.measure();
        li.S = S;
        li.eps_exp = dyadic_ceiling_exponent(S / (std::pow(li.measure, 1.0 / r) * F_factor));
        li.eta_exp = dyadic_ceiling_exponent(std::exp2(lv.j * r) * li.measure);
        const int L = Classification::spacing(A, li.eps_exp);
        const int i = ((lv.j % L) + L) % L + 1;
        out.classes[{li.eps_exp, li.eta_exp, i}].push_back(lv.j);
        out.levels.push_back(li);
    }
    return out;
}

std::vector<HalfLevelSet> half_level_sets(const StepFunction& f, const SetPieces& F, const QuadratureSpec& quad,
                                          HalfLevelSide side) {
    check_pieces(f, F);
    const double mF = pieces_measure(F);
    std::vector<HalfLevelSet> out;
    for (const auto& lv : f.levels()) {
        HalfLevelSet h;
        h.j = lv.j;
        if (side == HalfLevelSide::G) {
            std::vector<std::vector<double>> values;
            for (const auto& p : F) {
                values.push_back(apply_T_on_cells(lv.set, p, quad));
                double s = 0.0;
                for (double v : values.back()) s += v;
                h.full += s * p.cell_volume();
            }
            if (!(h.full > 0)) continue;
            const double threshold = h.full / (2.0 * mF);
            for (std::size_t k = 0; k < F.size(); ++k) {
                const auto& v = values[k];
                auto piece = F[k].filter([&](std::size_t c) { return v[c] >= threshold; });
                for (std::size_t c = 0; c < v.size(); ++c)
                    if (v[c] >= threshold) h.kept += v[c] * F[k].cell_volume();
                h.measure += piece.measure();
                h.pieces.push_back(std::move(piece));
            }
        } else {
            std::vector<double> v(lv.set.size(), 0.0);
            for (const auto& p : F) {
                const auto part = apply_T_star_on_cells(p, lv.set, quad);
                for (std::size_t c = 0; c < v.size(); ++c) v[c] += part[c];
            }
            for (double x : v) h.full += x * lv.set.cell_volume();
            if (!(h.full > 0)) continue;
            const double threshold = h.full / (2.0 * lv.set.measure());
            auto piece = lv.set.filter([&](std::size_t c) { return v[c] >= threshold; });
            for (std::size_t c = 0; c < v.size(); ++c)
                if (v[c] >= threshold) h.kept += v[c] * lv.set.cell_volume();
            h.measure = piece.measure();
            h.pieces.push_back(std::move(piece));
        }
        ensure(h.kept >= 0.5 * h.full * (1.0 - 1e-12),
               "half_level_sets: kept interaction below half at level " + std::to_string(lv.j));
        out.push_back(std::move(h));
    }
    return out;
}

OverlapReport overlap_audit(const std::vector<HalfLevelSet>& G, double measure_F, double C_audit) {
    require(measure_F > 0, "overlap_audit: |F| must be positive");
    require(C_audit > 0, "overlap_audit: C_audit must be positive");
    OverlapReport rep;
    rep.measure_F = measure_F;
    rep.C_audit = C_audit;
    for (const auto& g : G) {
        require(g.pieces.size() == G.front().pieces.size(), "overlap_audit: sets are not aligned piecewise");
        rep.sum += g.measure;
    }
    for (std::size_t a = 0; a < G.size(); ++a)
        for (std::size_t b = a + 1; b < G.size(); ++b) {
            double ov = 0.0;
            for (std::size_t k = 0; k < G[a].pieces.size(); ++k)
                ov += static_cast<double>(G[a].pieces[k].intersection_count(G[b].pieces[k])) *
                      G[a].pieces[k].cell_volume();
            if (ov <= 0) continue;
            const OverlapPair pr{static_cast<int>(a), static_cast<int>(b), ov};
            rep.pairs.push_back(pr);
            if (ov > rep.worst.overlap) rep.worst = pr;
        }
    rep.ratio = rep.sum / measure_F;
    rep.pass = rep.sum <= C_audit * measure_F;
    return rep;
}

TwoBoundReport two_bound_check(const InteractionClassKey& key, const Classification& cls, const StepFunction& f,
                               const ExponentProfile& profile, double u) {
    const double r = profile.p_value();
    const double s = profile.q_value();
    require(u >= 1 && u < s, "two_bound_check: need 1 <= u < q_n");
    const auto it = cls.classes.find(key);
    require(it != cls.classes.end() && !it->second.empty(), "two_bound_check: class is empty");

    TwoBoundReport rep;
    rep.key = key;
    rep.count = static_cast<int>(it->second.size());
    rep.lambda = lorentz_norm_dyadic(f, LorentzIndex(r, u));
    double eta_max = 0.0;
    for (int j : it->second) {
        const auto li = std::find_if(cls.levels.begin(), cls.levels.end(), [&](const auto& l) { return l.j == j; });
        ensure(li != cls.levels.end(), "two_bound_check: class lists an unknown level");
        rep.measured += std::exp2(j) * li->S;
        eta_max = std::max(eta_max, std::exp2(j * r) * li->measure / std::pow(rep.lambda, r));
    }
    rep.measured /= rep.lambda;
    rep.eta_exp = dyadic_ceiling_exponent(eta_max);
    const double eta = std::ldexp(1.0, rep.eta_exp);
    const double F_factor = std::pow(cls.measure_F, 1.0 / profile.q_dual_value());
    rep.bound1 = key.eps() * std::pow(eta, (1.0 - u) / r) * F_factor;
    rep.bound2 = std::pow(eta, (s - u) / (r * s)) * F_factor;
    rep.ratio1 = rep.measured / rep.bound1;
    rep.ratio2 = rep.measured / rep.bound2;
    rep.first_binding = rep.bound1 <= rep.bound2;
    rep.ratio_min = rep.measured / std::min(rep.bound1, rep.bound2);
    return rep;
}

}  // namespace mclab
