#include "mclab/operator.hpp"

#include "mclab/error.hpp"
#include "mclab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace mclab {

namespace {

struct Nodes {
    double step = 0.0;
    double R = 1.0;
    std::int64_t count = 0;

    double t(std::int64_t m) const { return -R + (static_cast<double>(m) + 0.5) * step; }

    // Node indices whose t may fall in [lo, hi], padded by one node.
    std::pair<std::int64_t, std::int64_t> range(double lo, double hi) const {
        const double a = std::floor((lo + R) / step - 0.5) - 1.0;
        const double b = std::ceil((hi + R) / step - 0.5) + 1.0;
        const auto first = static_cast<std::int64_t>(std::max(0.0, a));
        const auto last = static_cast<std::int64_t>(std::min(static_cast<double>(count - 1), b));
        return {first, last};
    }
};

Nodes make_nodes(const QuadratureSpec& quad, double finest_delta) {
    require(quad.R > 0.0 && std::isfinite(quad.R), "quadrature: truncation radius must be positive and finite");
    Nodes nodes;
    nodes.step = effective_step(quad, finest_delta);
    nodes.R = quad.R;
    nodes.count = static_cast<std::int64_t>(std::ceil(2.0 * quad.R / nodes.step));
    return nodes;
}

// c(t_m) = round(h(t_m) / delta) coordinate-wise, run-length compressed over m.
// With this offset x - h(t) lands in cell i - c(t) when x is the center of
// cell i, and x + h(t) in cell i + c(t), so direct and adjoint sums count the
// same (cell, cell, node) triples.
struct OffsetRuns {
    int n = 0;
    std::vector<CellIndex> code;
    std::vector<std::int64_t> start;

    std::size_t runs() const { return start.size() - 1; }
};

OffsetRuns build_runs(int n, double delta, const Nodes& nodes) {
    OffsetRuns runs;
    runs.n = n;
    const auto un = static_cast<std::size_t>(n);
    std::vector<CellIndex> current(un);
    for (std::int64_t m = 0; m < nodes.count; ++m) {
        const double t = nodes.t(m);
        double power = 1.0;
        for (std::size_t k = 0; k < un; ++k) {
            power *= t;
            current[k] = static_cast<CellIndex>(std::floor(power / delta + 0.5));
        }
        const bool repeat = !runs.start.empty() &&
                            std::equal(current.begin(), current.end(), runs.code.end() - static_cast<std::ptrdiff_t>(un));
        if (!repeat) {
            runs.code.insert(runs.code.end(), current.begin(), current.end());
            runs.start.push_back(m);
        }
    }
    runs.start.push_back(nodes.count);
    return runs;
}

// Integer node counts for every cell b of B: #{m : b + sigma*c(t_m) in S}.
// Requires S and B on the same lattice.
void sweep_same_lattice(const LatticeSet& S, const LatticeSet& B, int sigma, const Nodes& nodes, int jobs,
                        std::vector<std::uint64_t>* per_cell, std::uint64_t& total) {
    const int n = S.dimension();
    const auto un = static_cast<std::size_t>(n);
    const double delta = S.delta();
    const OffsetRuns runs = build_runs(n, delta, nodes);
    const CellIndex lo1 = S.lower()[0];
    const CellIndex hi1 = S.upper()[0];
    if (per_cell) per_cell->assign(B.size(), 0);
    std::vector<std::uint64_t> partial(static_cast<std::size_t>(std::max(jobs, 1)), 0);
    parallel_chunks(B.size(), jobs, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        std::vector<CellIndex> target(un);
        std::uint64_t sum = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const auto base = B.cell(i);
            // Admissible first offsets, then the t-window they allow.
            const CellIndex c_lo = sigma > 0 ? lo1 - base[0] : base[0] - hi1;
            const CellIndex c_hi = sigma > 0 ? hi1 - base[0] : base[0] - lo1;
            const auto [m_lo, m_hi] = nodes.range((static_cast<double>(c_lo) - 0.5) * delta,
                                                  (static_cast<double>(c_hi) + 0.5) * delta);
            std::uint64_t count = 0;
            if (m_lo <= m_hi) {
                auto it = std::upper_bound(runs.start.begin(), runs.start.end() - 1, m_lo);
                std::size_t r = static_cast<std::size_t>(it - runs.start.begin()) - 1;
                for (; r < runs.runs() && runs.start[r] <= m_hi; ++r) {
                    const std::int64_t a = std::max(runs.start[r], m_lo);
                    const std::int64_t b = std::min(runs.start[r + 1] - 1, m_hi);
                    if (a > b) continue;
                    const CellIndex* code = runs.code.data() + r * un;
                    for (std::size_t k = 0; k < un; ++k) target[k] = base[k] + sigma * code[k];
                    if (S.contains_cell(target)) count += static_cast<std::uint64_t>(b - a + 1);
                }
            }
            if (per_cell) (*per_cell)[i] = count;
            sum += count;
        }
        partial[chunk] = sum;
    });
    total = 0;
    for (auto v : partial) total += v;
}

// Node count at one arbitrary point: #{m : x + sigma*h(t_m) in S}.
std::uint64_t count_at_point(const LatticeSet& S, std::span<const double> x, int sigma, const Nodes& nodes) {
    const int n = S.dimension();
    const auto un = static_cast<std::size_t>(n);
    const double delta = S.delta();
    // x_1 + sigma t must land in S's first-coordinate coverage.
    double lo = sigma > 0 ? S.coverage_min(0) - x[0] : x[0] - S.coverage_max(0);
    double hi = sigma > 0 ? S.coverage_max(0) - x[0] : x[0] - S.coverage_min(0);
    const auto [m_lo, m_hi] = nodes.range(lo, hi);
    std::vector<CellIndex> target(un);
    std::vector<CellIndex> previous(un);
    bool have_previous = false;
    bool previous_hit = false;
    std::uint64_t count = 0;
    for (std::int64_t m = m_lo; m <= m_hi; ++m) {
        const double t = nodes.t(m);
        double power = 1.0;
        for (std::size_t k = 0; k < un; ++k) {
            power *= t;
            target[k] = static_cast<CellIndex>(std::floor((x[k] + sigma * power) / delta));
        }
        if (!have_previous || target != previous) {
            previous_hit = S.contains_cell(target);
            previous = target;
            have_previous = true;
        }
        if (previous_hit) ++count;
    }
    return count;
}

void sweep_points(const LatticeSet& S, const LatticeSet& B, int sigma, const Nodes& nodes, int jobs,
                  std::vector<std::uint64_t>* per_cell, std::uint64_t& total) {
    if (per_cell) per_cell->assign(B.size(), 0);
    std::vector<std::uint64_t> partial(static_cast<std::size_t>(std::max(jobs, 1)), 0);
    parallel_chunks(B.size(), jobs, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        std::uint64_t sum = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const auto c = count_at_point(S, B.cell_center(i), sigma, nodes);
            if (per_cell) (*per_cell)[i] = c;
            sum += c;
        }
        partial[chunk] = sum;
    });
    total = 0;
    for (auto v : partial) total += v;
}

// Counts for T (sigma = -1, S = E, B = F) or T* (sigma = +1, S = F, B = E).
double sweep(const LatticeSet& S, const LatticeSet& B, int sigma, const QuadratureSpec& quad,
             std::vector<std::uint64_t>* per_cell) {
    require(S.dimension() == B.dimension(), "operator: dimension mismatch");
    const Nodes nodes = make_nodes(quad, std::min(S.delta(), B.delta()));
    std::uint64_t total = 0;
    if (S.empty() || B.empty()) {
        if (per_cell) per_cell->assign(B.size(), 0);
        return 0.0;
    }
    if (S.same_lattice(B)) sweep_same_lattice(S, B, sigma, nodes, quad.jobs, per_cell, total);
    else sweep_points(S, B, sigma, nodes, quad.jobs, per_cell, total);
    return static_cast<double>(total) * nodes.step;
}

std::vector<double> to_lengths(const std::vector<std::uint64_t>& counts, double step) {
    std::vector<double> out(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = static_cast<double>(counts[i]) * step;
    return out;
}

}  // namespace

double effective_step(const QuadratureSpec& quad, double finest_delta) {
    require(finest_delta > 0.0, "quadrature: resolution must be positive");
    if (quad.t_step == 0.0) return finest_delta / 2.0;
    require(quad.t_step > 0.0, "quadrature: t_step must be positive");
    require(quad.t_step <= finest_delta / 2.0 * (1.0 + 1e-12),
            "quadrature: t_step " + std::to_string(quad.t_step) + " exceeds half the finest resolution " +
                std::to_string(finest_delta / 2.0));
    return quad.t_step;
}

double apply_T(const LatticeSet& E, std::span<const double> x, const QuadratureSpec& quad) {
    require(static_cast<int>(x.size()) == E.dimension(), "apply_T: point dimension mismatch");
    const Nodes nodes = make_nodes(quad, E.delta());
    if (E.empty()) return 0.0;
    return static_cast<double>(count_at_point(E, x, -1, nodes)) * nodes.step;
}

double apply_T_star(const LatticeSet& F, std::span<const double> x, const QuadratureSpec& quad) {
    require(static_cast<int>(x.size()) == F.dimension(), "apply_T_star: point dimension mismatch");
    const Nodes nodes = make_nodes(quad, F.delta());
    if (F.empty()) return 0.0;
    return static_cast<double>(count_at_point(F, x, +1, nodes)) * nodes.step;
}

std::vector<double> apply_T_on_cells(const LatticeSet& E, const LatticeSet& F, const QuadratureSpec& quad) {
    std::vector<std::uint64_t> counts;
    sweep(E, F, -1, quad, &counts);
    return to_lengths(counts, effective_step(quad, std::min(E.delta(), F.delta())));
}

std::vector<double> apply_T_star_on_cells(const LatticeSet& F, const LatticeSet& E, const QuadratureSpec& quad) {
    std::vector<std::uint64_t> counts;
    sweep(F, E, +1, quad, &counts);
    return to_lengths(counts, effective_step(quad, std::min(E.delta(), F.delta())));
}

double pairing(const LatticeSet& E, const LatticeSet& F, const QuadratureSpec& quad) {
    return sweep(E, F, -1, quad, nullptr) * F.cell_volume();
}

double pairing_adjoint(const LatticeSet& E, const LatticeSet& F, const QuadratureSpec& quad) {
    return sweep(F, E, +1, quad, nullptr) * E.cell_volume();
}

double apply_T_step(const StepFunction& f, const LatticeSet& F, const QuadratureSpec& quad) {
    double total = 0.0;
    for (const auto& level : f.levels()) total += std::ldexp(pairing(level.set, F, quad), level.j);
    return total;
}

double bilinear(const StepFunction& f, const StepFunction& g, const QuadratureSpec& quad) {
    double total = 0.0;
    for (const auto& level : g.levels()) total += std::ldexp(apply_T_step(f, level.set, quad), level.j);
    return total;
}

}  // namespace mclab
