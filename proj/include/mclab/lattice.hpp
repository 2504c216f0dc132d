#pragma once

// Finite sets of cells of the lattice delta*Z^n standing in for Borel sets.
// Cell i covers [i*delta, (i+1)*delta) coordinate-wise; its center is
// (i + 1/2)*delta.

#include "mclab/geometry.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace mclab {

using CellIndex = std::int64_t;

// Default total cell cap, overridable through MCLAB_CELL_BUDGET.
std::size_t default_cell_budget();

class LatticeSet {
public:
    LatticeSet(int n, double delta);

    // Takes cells as a flat array with stride n; sorts and removes duplicates.
    static LatticeSet from_cells(int n, double delta, std::vector<CellIndex> flat);

    int dimension() const { return n_; }
    double delta() const { return delta_; }
    std::size_t size() const { return n_ == 0 ? 0 : cells_.size() / static_cast<std::size_t>(n_); }
    bool empty() const { return cells_.empty(); }
    double cell_volume() const;
    double measure() const { return static_cast<double>(size()) * cell_volume(); }

    std::span<const CellIndex> cell(std::size_t i) const {
        return {cells_.data() + i * static_cast<std::size_t>(n_), static_cast<std::size_t>(n_)};
    }
    const std::vector<CellIndex>& flat() const { return cells_; }
    Point cell_center(std::size_t i) const;

    // Inclusive bounding box of the cell indices. Undefined for empty sets.
    std::span<const CellIndex> lower() const { return lower_; }
    std::span<const CellIndex> upper() const { return upper_; }
    // Closed interval covered in coordinate k (0-based).
    double coverage_min(int k) const { return static_cast<double>(lower_[static_cast<std::size_t>(k)]) * delta_; }
    double coverage_max(int k) const { return static_cast<double>(upper_[static_cast<std::size_t>(k)] + 1) * delta_; }

    bool contains_cell(std::span<const CellIndex> idx) const;
    bool contains_point(std::span<const double> x) const;

    LatticeSet unite(const LatticeSet& other) const;
    LatticeSet intersect(const LatticeSet& other) const;
    LatticeSet difference(const LatticeSet& other) const;
    std::size_t intersection_count(const LatticeSet& other) const;

    // Shift by a whole number of cells; measure is preserved exactly.
    LatticeSet translated_cells(std::span<const CellIndex> shift) const;
    // Keep the cells whose ordinal passes the predicate.
    LatticeSet filter(const std::function<bool(std::size_t)>& keep) const;

    bool same_lattice(const LatticeSet& other) const { return n_ == other.n_ && delta_ == other.delta_; }
    // True when the coverage boxes cannot meet.
    bool boxes_disjoint(const LatticeSet& other) const;

private:
    struct IndexHolder;

    void finalize();
    const IndexHolder& index() const;
    void require_compatible(const LatticeSet& other, const char* op) const;

    int n_;
    double delta_;
    std::vector<CellIndex> cells_;
    std::vector<CellIndex> lower_;
    std::vector<CellIndex> upper_;
    std::shared_ptr<IndexHolder> holder_;
};

// Certified emptiness of the intersection of the two covered regions. Works
// for equal resolutions and for resolutions differing by a power of two;
// otherwise relies on box separation and throws PreconditionError when that
// is not enough.
bool regions_disjoint(const LatticeSet& a, const LatticeSet& b);

// Value 2^j on E_j, zero elsewhere. Levels keep their own resolution.
struct StepLevel {
    int j = 0;
    LatticeSet set;
};

class StepFunction {
public:
    StepFunction() = default;
    // Throws PreconditionError on overlapping levels, repeated j, or mixed n.
    explicit StepFunction(std::vector<StepLevel> levels);

    const std::vector<StepLevel>& levels() const { return levels_; }
    bool empty() const { return levels_.empty(); }
    int dimension() const { return levels_.empty() ? 0 : levels_.front().set.dimension(); }
    double value_at(std::span<const double> x) const;
    // Same sets, every j shifted by dj.
    StepFunction shifted(int dj) const;

private:
    std::vector<StepLevel> levels_;
};

// Cells whose centers lie in D_r(N_eps) + center, N_eps the closed Euclidean
// eps-neighborhood of -h([-1,1]). eps and r are taken from (0,1].
// Requires delta <= eps r^n / 4; throws CapacityError past the budget.
LatticeSet tube_set(const CurveConfig& cfg, double eps, double r, std::span<const double> center,
                    double delta, std::size_t budget = default_cell_budget());

// Cells whose centers lie in D_r(B_eps) + center, B_eps the closed Euclidean
// ball. Same preconditions as tube_set; an empty result is an error.
LatticeSet ball_set(const CurveConfig& cfg, double eps, double r, std::span<const double> center,
                    double delta, std::size_t budget = default_cell_budget());

// Cells whose centers lie in the closed box [lo, hi].
LatticeSet box_set(int n, double delta, std::span<const double> lo, std::span<const double> hi,
                   std::size_t budget = default_cell_budget());

// One member of a packed family: the sets sharing a translate, for example a
// tube and its ball.
struct PackMember {
    std::vector<LatticeSet> sets;
};

struct PackRule {
    double gap_factor = 4.0;  // gap between neighbours, in units of the larger diameter
    double clearance = 0.0;   // extra x1 clearance added to every gap
};

// Places count translates along e1. builder(j, center) builds member j;
// half_width(j) bounds the x1-extent of member j about its center. Sets in the
// same slot of different members are verified pairwise disjoint, otherwise
// InvariantError.
std::vector<PackMember> pack_translates(int n, int count,
                                        const std::function<PackMember(int, const Point&)>& builder,
                                        const std::function<double(int)>& half_width, const PackRule& rule);

}  // namespace mclab
