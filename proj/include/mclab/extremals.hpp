#pragma once

// The three counterexample families showing u <= v, u <= q_n and v >= p_n are
// necessary, and a log-log fitter for their pairing-to-norm ratios.

#include "mclab/lattice.hpp"
#include "mclab/lorentz.hpp"
#include "mclab/operator.hpp"

#include <string>
#include <utility>
#include <vector>

namespace mclab {

enum class FamilyKind { u_le_v, u_le_qn, v_ge_pn };

std::string to_string(FamilyKind kind);
FamilyKind family_kind_from_string(const std::string& name);

// delta_j = eps_j r_j^n / divisor.
struct DeltaRule {
    double divisor = 8.0;

    double operator()(double eps, double r, int n) const;
};

struct FamilySpec {
    FamilyKind kind = FamilyKind::u_le_v;
    int n = 2;
    int M = 1;
    DeltaRule delta_rule{};
    double R = 1.0;  // truncation radius; translates keep 2R of extra clearance
    // Constant factor on eps_j for u_le_qn and v_ge_pn. Their top member otherwise
    // sits at eps = 1, far from the thin-tube regime, which biases short slope fits.
    // u_le_v already has eps_j <= 2^{-(n+1)} and ignores it.
    double eps_scale = 0.125;
    std::size_t budget = default_cell_budget();
};

struct ScheduleEntry {
    int j = 0;
    double eps = 1.0;
    double r = 1.0;
};

// (j, eps_j, r_j) for the family; every eps_j and r_j is checked to lie in (0,1].
std::vector<ScheduleEntry> family_schedule(FamilyKind kind, int n, int M, double eps_scale = 1.0);

struct FamilyMember {
    ScheduleEntry param;
    double delta = 0.0;
    Point center;
    LatticeSet tube;  // N_{eps,r}(x_j)
    LatticeSet ball;  // B_{eps,r}(x_j)
};

// Weighted sets a_k 2^{j_k} chi_{A_k}. Unlike StepFunction, j may repeat (a
// plain characteristic function of a union uses j = 0 on every piece).
using WeightedSets = std::vector<StepLevel>;

struct BuiltFamily {
    FamilySpec spec;
    std::vector<FamilyMember> members;
    WeightedSets left;   // the function on the L^{p_n,u} side
    WeightedSets right;  // the function on the L^{q_n',v'} side
    double c = 0.0;      // per-index normalization constants where the family defines them
    double eta = 0.0;
    std::size_t cells = 0;
};

BuiltFamily build_family(const FamilySpec& spec);

// f = sum 2^{2(n-1)j} chi_{E_j}, g = sum 2^{(n^2-n+2)j} chi_{G_j},
// E_j = N_{2^{-(n+1)j}, 1}(x_j), G_j = B_{2^{-(n+1)j}, 1}(x_j), j = 1..M.
std::pair<StepFunction, StepFunction> build_u_le_v(int n, int M, double u, double v, const DeltaRule& rule = {});

// f = sum 2^j chi_{E_j}, F = union F_j for j = 1..M. F is returned piecewise
// since its pieces live on different lattices.
std::pair<StepFunction, std::vector<LatticeSet>> build_u_le_qn(int n, int M, const DeltaRule& rule = {});

// E = union E_j (piecewise), g = sum 2^j chi_{F_j} for j = -1..-M.
std::pair<std::vector<LatticeSet>, StepFunction> build_v_ge_pn(int n, int M, const DeltaRule& rule = {});

// Everything the fitter needs from one family instance; independent of u, v.
struct FamilyMeasurement {
    int M = 0;
    double pairing = 0.0;  // <T left, right>
    // One entry per member; the same j may repeat.
    std::vector<DyadicLevel> left_levels;
    std::vector<DyadicLevel> right_levels;
    // Per-member normalization ratios, e.g. 2^{j p_n}|E_j| / c and |F_j| / eta.
    std::vector<std::pair<double, double>> normalization;
    std::size_t cells = 0;
};

double weighted_pairing(const WeightedSets& left, const WeightedSets& right, const QuadratureSpec& quad);
FamilyMeasurement measure_family(const FamilySpec& spec, const QuadratureSpec& quad);

// 1 - 1/u - 1/v' (u<=v), 1/q_n - 1/u (u<=q_n), 1/p_n' - 1/v' (v>=p_n).
double predicted_slope(FamilyKind kind, int n, double u, double v);

// Which equivalent quasi-norm the fitter divides by. The dyadic sum is what
// the M-power counts are made of; the rearrangement integral carries a top-level
// edge effect of relative size about 1/M that bends short fits.
enum class NormForm { dyadic, rearrangement };

std::string to_string(NormForm form);
NormForm norm_form_from_string(const std::string& name);

// Level measures merged by j, then the requested norm.
double family_norm(const std::vector<DyadicLevel>& levels, const LorentzIndex& idx, NormForm form);

struct ScalingReport {
    FamilyKind kind = FamilyKind::u_le_v;
    NormForm norm_form = NormForm::dyadic;
    int n = 2;
    double u = 0.0;
    double v = 0.0;
    std::vector<int> M_values;
    std::vector<double> ratios;
    std::vector<double> pairings;
    std::vector<double> left_norms;
    std::vector<double> right_norms;
    double fitted_slope = 0.0;
    double predicted_slope = 0.0;

    double deviation() const { return fitted_slope - predicted_slope; }
};

// Ratio <T left, right> / (||left||_{p_n,u} ||right||_{q_n',v'}) per M and the
// least-squares slope of log ratio against log M.
ScalingReport fit_from_measurements(FamilyKind kind, int n, double u, double v,
                                    const std::vector<FamilyMeasurement>& runs,
                                    NormForm form = NormForm::dyadic);

ScalingReport fit_scaling(FamilyKind kind, int n, double u, double v, const std::vector<int>& M_list,
                          const QuadratureSpec& quad, const DeltaRule& rule = {},
                          std::size_t budget = default_cell_budget(), double eps_scale = 0.125,
                          NormForm form = NormForm::dyadic);

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mclab
