#include "mclab/lorentz.hpp"

#include "mclab/error.hpp"

#include <algorithm>
#include <cmath>

namespace mclab {

namespace {

double log_sum_exp(const std::vector<double>& logs) {
    if (logs.empty()) return -std::numeric_limits<double>::infinity();
    const double top = *std::max_element(logs.begin(), logs.end());
    if (!std::isfinite(top)) return top;
    double sum = 0.0;
    for (double v : logs) sum += std::exp(v - top);
    return top + std::log(sum);
}

Rational cross(const RationalPoint& o, const RationalPoint& a, const RationalPoint& b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
}

}  // namespace

LorentzIndex::LorentzIndex(double p_index, double w_index) : p(p_index), w(w_index) {
    require(p_index >= 1.0 && std::isfinite(p_index), "LorentzIndex: need finite p >= 1");
    require(w_index >= 1.0, "LorentzIndex: need w >= 1");
}

double rearrangement_norm(std::vector<Plateau> plateaus, const LorentzIndex& idx) {
    std::erase_if(plateaus, [](const Plateau& pl) { return pl.value <= 0.0 || pl.measure <= 0.0; });
    for (const auto& pl : plateaus) require(std::isfinite(pl.value) && std::isfinite(pl.measure), "norm: non-finite plateau");
    if (plateaus.empty()) return 0.0;
    std::sort(plateaus.begin(), plateaus.end(), [](const Plateau& a, const Plateau& b) { return a.value > b.value; });
    double cumulative = 0.0;
    if (idx.weak()) {
        double best = 0.0;
        for (const auto& pl : plateaus) {
            cumulative += pl.measure;
            best = std::max(best, pl.value * std::pow(cumulative, 1.0 / idx.p));
        }
        return best;
    }
    // Each plateau contributes v^w (p/w) (T_i^{w/p} - T_{i-1}^{w/p}); summed in
    // log space so wide dynamic ranges of values and measures stay finite.
    const double a = idx.w / idx.p;
    std::vector<double> logs;
    logs.reserve(plateaus.size());
    for (const auto& pl : plateaus) {
        const double previous = cumulative;
        cumulative += pl.measure;
        const double shape = previous > 0.0 ? -std::expm1(a * std::log(previous / cumulative)) : 1.0;
        logs.push_back(idx.w * std::log(pl.value) + std::log(idx.p / idx.w) + a * std::log(cumulative) +
                       std::log(shape));
    }
    return std::exp(log_sum_exp(logs) / idx.w);
}

double rearrangement_norm_normalized(std::vector<Plateau> plateaus, const LorentzIndex& idx) {
    const double raw = rearrangement_norm(std::move(plateaus), idx);
    return idx.weak() ? raw : raw * std::pow(idx.w / idx.p, 1.0 / idx.w);
}

double dyadic_norm(const std::vector<DyadicLevel>& levels, const LorentzIndex& idx) {
    std::vector<double> logs;
    double best = 0.0;
    for (const auto& level : levels) {
        if (level.measure <= 0.0) continue;
        const double log_term = level.j * std::log(2.0) + std::log(level.measure) / idx.p;
        if (idx.weak()) best = std::max(best, std::exp(log_term));
        else logs.push_back(idx.w * log_term);
    }
    if (idx.weak()) return best;
    if (logs.empty()) return 0.0;
    return std::exp(log_sum_exp(logs) / idx.w);
}

double lorentz_norm_rearrangement(const StepFunction& f, const LorentzIndex& idx) {
    std::vector<Plateau> plateaus;
    for (const auto& level : f.levels()) plateaus.push_back({std::ldexp(1.0, level.j), level.set.measure()});
    return rearrangement_norm(std::move(plateaus), idx);
}

double lorentz_norm_dyadic(const StepFunction& f, const LorentzIndex& idx) {
    std::vector<DyadicLevel> levels;
    for (const auto& level : f.levels()) levels.push_back({level.j, level.set.measure()});
    return dyadic_norm(levels, idx);
}

bool ExponentRegion::contains(const Rational& inv_p, const Rational& inv_q) const {
    const RationalPoint x{inv_p, inv_q};
    if (vertices.size() == 1) return x == vertices.front();
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const auto& a = vertices[i];
        const auto& b = vertices[(i + 1) % vertices.size()];
        if (cross(a, b, x) < 0) return false;
    }
    return true;
}

ExponentRegion region_Rn(const CurveConfig& cfg) {
    const ExponentProfile e(cfg.n);
    const Rational one(1);
    std::vector<RationalPoint> pts{{Rational(0), Rational(0)},
                                   {one / e.p, one / e.q},
                                   {one - one / e.q, one - one / e.p},
                                   {one, one}};
    ExponentRegion region;
    for (const auto& pt : pts)
        if (std::find(region.vertices.begin(), region.vertices.end(), pt) == region.vertices.end())
            region.vertices.push_back(pt);
    for (std::size_t i = 0; i < region.vertices.size(); ++i)
        ensure(cross(region.vertices[i], region.vertices[(i + 1) % region.vertices.size()],
                     region.vertices[(i + 2) % region.vertices.size()]) > 0,
               "region_Rn: vertex list is not strictly convex and counter-clockwise");
    return region;
}

}  // namespace mclab
