#include "mclab/lattice.hpp"

#include "mclab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>

namespace mclab {

namespace {

constexpr double kDenseBitsFloor = 67108864.0;  // 2^26 bits, 8 MiB
constexpr std::uint32_t kEmptySlot = 0xFFFFFFFFu;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t hash_cell(std::span<const CellIndex> c) {
    std::uint64_t h = 0x243F6A8885A308D3ull;
    for (CellIndex v : c) h = splitmix(h ^ static_cast<std::uint64_t>(v));
    return h;
}

int compare_rows(const CellIndex* a, const CellIndex* b, int n) {
    for (int k = 0; k < n; ++k) {
        if (a[k] < b[k]) return -1;
        if (a[k] > b[k]) return 1;
    }
    return 0;
}

CellIndex floor_div(CellIndex a, CellIndex b) {
    CellIndex q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Cell indices whose centers lie in [lo, hi].
std::pair<CellIndex, CellIndex> center_range(double lo, double hi, double delta) {
    const auto first = static_cast<CellIndex>(std::ceil(lo / delta - 0.5));
    const auto last = static_cast<CellIndex>(std::floor(hi / delta - 0.5));
    return {first, last};
}

double center_of(CellIndex i, double delta) { return (static_cast<double>(i) + 0.5) * delta; }

void check_budget(std::size_t cells, std::size_t budget, const char* what) {
    if (cells > budget)
        throw CapacityError(std::string(what) + ": cell budget of " + std::to_string(budget) + " exceeded");
}

// Hull of {t in [a, b] : t^p in [lo, hi]}; false when empty.
bool power_preimage(int p, double lo, double hi, double& a, double& b) {
    if (p == 1) {
        a = std::max(a, lo);
        b = std::min(b, hi);
        return a <= b;
    }
    const double inv = 1.0 / p;
    if (p % 2 == 1) {
        auto root = [inv](double v) { return std::copysign(std::pow(std::fabs(v), inv), v); };
        a = std::max(a, root(lo));
        b = std::min(b, root(hi));
        return a <= b;
    }
    if (hi < 0.0) return false;
    const double outer = std::pow(hi, inv);
    const double inner = lo > 0.0 ? std::pow(lo, inv) : 0.0;
    double na = std::numeric_limits<double>::infinity();
    double nb = -std::numeric_limits<double>::infinity();
    // Negative branch [-outer, -inner] and positive branch [inner, outer].
    for (auto [pa, pb] : {std::pair{-outer, -inner}, std::pair{inner, outer}}) {
        const double ia = std::max(a, pa);
        const double ib = std::min(b, pb);
        if (ia <= ib) {
            na = std::min(na, ia);
            nb = std::max(nb, ib);
        }
    }
    if (na > nb) return false;
    a = na;
    b = nb;
    return true;
}

// Range of -t^p over [a, b].
std::pair<double, double> negated_power_range(int p, double a, double b) {
    const double fa = -std::pow(a, p);
    const double fb = -std::pow(b, p);
    double lo = std::min(fa, fb);
    double hi = std::max(fa, fb);
    if (p % 2 == 0 && a < 0.0 && b > 0.0) hi = 0.0;
    return {lo, hi};
}

void validate_scale(const CurveConfig& cfg, double eps, double r, std::span<const double> center, double delta,
                    const char* what) {
    require(eps > 0.0 && eps <= 1.0, std::string(what) + ": eps must lie in (0,1]");
    require(r > 0.0 && r <= 1.0, std::string(what) + ": r must lie in (0,1]");
    require(static_cast<int>(center.size()) == cfg.n, std::string(what) + ": center dimension mismatch");
    require(delta > 0.0, std::string(what) + ": delta must be positive");
    const double finest = eps * std::pow(r, cfg.n) / 4.0;
    require(delta <= finest * (1.0 + 1e-12),
            std::string(what) + ": delta too coarse, need delta <= eps r^n / 4 = " + std::to_string(finest));
}

class TubeBuilder {
public:
    TubeBuilder(const CurveConfig& cfg, double eps, double r, std::span<const double> center, double delta,
                std::size_t budget)
        : n_(cfg.n), eps_(eps), delta_(delta), budget_(budget), center_(center.begin(), center.end()),
          scale_(static_cast<std::size_t>(cfg.n)), idx_(static_cast<std::size_t>(cfg.n)),
          y_(static_cast<std::size_t>(cfg.n)) {
        double s = 1.0;
        double lip2 = 0.0;
        for (int k = 0; k < n_; ++k) {
            s *= r;
            scale_[static_cast<std::size_t>(k)] = s;
            lip2 += static_cast<double>((k + 1) * (k + 1));
        }
        lipschitz_ = std::sqrt(lip2);
    }

    std::vector<CellIndex> run() {
        descend(0, -1.0, 1.0);
        return std::move(out_);
    }

private:
    void descend(int k, double ta, double tb) {
        if (k == n_) {
            if (close_to_curve(ta, tb)) {
                out_.insert(out_.end(), idx_.begin(), idx_.end());
                check_budget(out_.size() / static_cast<std::size_t>(n_), budget_, "tube_set");
            }
            return;
        }
        const auto uk = static_cast<std::size_t>(k);
        const auto [glo, ghi] = negated_power_range(k + 1, ta, tb);
        const double lo = center_[uk] + scale_[uk] * (glo - eps_);
        const double hi = center_[uk] + scale_[uk] * (ghi + eps_);
        const auto [first, last] = center_range(lo, hi, delta_);
        for (CellIndex i = first; i <= last; ++i) {
            const double yk = (center_of(i, delta_) - center_[uk]) / scale_[uk];
            double a = ta;
            double b = tb;
            if (!power_preimage(k + 1, -yk - eps_, -yk + eps_, a, b)) continue;
            idx_[uk] = i;
            y_[uk] = yk;
            descend(k + 1, a, b);
        }
    }

    double dist2(double t) const {
        double d = 0.0;
        double power = 1.0;
        for (int k = 0; k < n_; ++k) {
            power *= t;
            const double c = y_[static_cast<std::size_t>(k)] + power;
            d += c * c;
        }
        return d;
    }

    // Grid of step eps/4 over the admissible window, then a local golden
    // section search when the grid cannot decide.
    bool close_to_curve(double ta, double tb) const {
        const double eps2 = eps_ * eps_;
        const double step = eps_ / 4.0;
        const int count = std::max(1, static_cast<int>(std::ceil((tb - ta) / step)));
        const double h = (tb - ta) / count;
        double best = std::numeric_limits<double>::infinity();
        double best_t = ta;
        for (int m = 0; m <= count; ++m) {
            const double t = ta + m * h;
            const double d = dist2(t);
            if (d <= eps2) return true;
            if (d < best) {
                best = d;
                best_t = t;
            }
        }
        const double slack = lipschitz_ * h / 2.0;
        if (std::sqrt(best) - slack > eps_) return false;
        double a = std::max(ta, best_t - h);
        double b = std::min(tb, best_t + h);
        const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - ratio * (b - a);
        double d = a + ratio * (b - a);
        double fc = dist2(c);
        double fd = dist2(d);
        for (int it = 0; it < 60 && b - a > 1e-15; ++it) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = dist2(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = dist2(d);
            }
            if (std::min(fc, fd) <= eps2) return true;
        }
        return std::min(fc, fd) <= eps2;
    }

    int n_;
    double eps_;
    double delta_;
    std::size_t budget_;
    double lipschitz_ = 0.0;
    std::vector<double> center_;
    std::vector<double> scale_;
    std::vector<CellIndex> idx_;
    std::vector<double> y_;
    std::vector<CellIndex> out_;
};

}  // namespace

std::size_t default_cell_budget() {
    static const std::size_t budget = [] {
        std::size_t value = 10'000'000;
        if (const char* env = std::getenv("MCLAB_CELL_BUDGET")) {
            char* end = nullptr;
            const unsigned long long parsed = std::strtoull(env, &end, 10);
            if (end != env && *end == '\0' && parsed > 0) value = static_cast<std::size_t>(parsed);
        }
        return value;
    }();
    return budget;
}

struct LatticeSet::IndexHolder {
    std::once_flag once;
    bool dense = false;
    std::vector<std::uint64_t> bits;
    std::vector<CellIndex> stride;
    std::vector<std::uint32_t> slots;
    std::uint64_t mask = 0;
};

LatticeSet::LatticeSet(int n, double delta) : n_(n), delta_(delta), holder_(std::make_shared<IndexHolder>()) {
    require(n >= 1, "LatticeSet: dimension must be positive");
    require(delta > 0.0 && std::isfinite(delta), "LatticeSet: delta must be positive and finite");
}

LatticeSet LatticeSet::from_cells(int n, double delta, std::vector<CellIndex> flat) {
    LatticeSet s(n, delta);
    require(flat.size() % static_cast<std::size_t>(n) == 0, "LatticeSet: flat cell array not a multiple of n");
    s.cells_ = std::move(flat);
    s.finalize();
    return s;
}

void LatticeSet::finalize() {
    const std::size_t count = size();
    const auto un = static_cast<std::size_t>(n_);
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const CellIndex* base = cells_.data();
    const int n = n_;
    bool sorted = true;
    for (std::size_t i = 1; i < count && sorted; ++i)
        sorted = compare_rows(base + (i - 1) * un, base + i * un, n) < 0;
    if (!sorted) {
        std::sort(order.begin(), order.end(), [base, un, n](std::size_t a, std::size_t b) {
            return compare_rows(base + a * un, base + b * un, n) < 0;
        });
        std::vector<CellIndex> out;
        out.reserve(cells_.size());
        for (std::size_t i = 0; i < count; ++i) {
            const CellIndex* row = base + order[i] * un;
            if (!out.empty() && compare_rows(out.data() + out.size() - un, row, n) == 0) continue;
            out.insert(out.end(), row, row + un);
        }
        cells_ = std::move(out);
    }
    lower_.assign(un, 0);
    upper_.assign(un, 0);
    if (cells_.empty()) return;
    for (std::size_t k = 0; k < un; ++k) lower_[k] = upper_[k] = cells_[k];
    for (std::size_t i = 1; i < size(); ++i) {
        for (std::size_t k = 0; k < un; ++k) {
            const CellIndex v = cells_[i * un + k];
            lower_[k] = std::min(lower_[k], v);
            upper_[k] = std::max(upper_[k], v);
        }
    }
}

const LatticeSet::IndexHolder& LatticeSet::index() const {
    IndexHolder& h = *holder_;
    std::call_once(h.once, [this, &h] {
        const auto un = static_cast<std::size_t>(n_);
        const std::size_t count = size();
        double volume = 1.0;
        for (std::size_t k = 0; k < un; ++k) volume *= static_cast<double>(upper_[k] - lower_[k] + 1);
        if (count == 0) return;
        if (volume <= std::max(kDenseBitsFloor, 16.0 * static_cast<double>(count))) {
            h.dense = true;
            h.stride.assign(un, 1);
            for (std::size_t k = un - 1; k > 0; --k) h.stride[k - 1] = h.stride[k] * (upper_[k] - lower_[k] + 1);
            const auto total = static_cast<std::size_t>(volume);
            h.bits.assign((total + 63) / 64, 0);
            for (std::size_t i = 0; i < count; ++i) {
                std::size_t lin = 0;
                for (std::size_t k = 0; k < un; ++k)
                    lin += static_cast<std::size_t>((cells_[i * un + k] - lower_[k]) * h.stride[k]);
                h.bits[lin >> 6] |= (std::uint64_t{1} << (lin & 63));
            }
            return;
        }
        std::size_t cap = 16;
        while (cap < 2 * count) cap <<= 1;
        h.slots.assign(cap, kEmptySlot);
        h.mask = cap - 1;
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t pos = hash_cell(cell(i)) & h.mask;
            while (h.slots[pos] != kEmptySlot) pos = (pos + 1) & h.mask;
            h.slots[pos] = static_cast<std::uint32_t>(i);
        }
    });
    return h;
}

double LatticeSet::cell_volume() const { return std::pow(delta_, n_); }

Point LatticeSet::cell_center(std::size_t i) const {
    Point c(static_cast<std::size_t>(n_));
    const auto row = cell(i);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = center_of(row[k], delta_);
    return c;
}

bool LatticeSet::contains_cell(std::span<const CellIndex> idx) const {
    if (cells_.empty()) return false;
    const auto un = static_cast<std::size_t>(n_);
    for (std::size_t k = 0; k < un; ++k)
        if (idx[k] < lower_[k] || idx[k] > upper_[k]) return false;
    const IndexHolder& h = index();
    if (h.dense) {
        std::size_t lin = 0;
        for (std::size_t k = 0; k < un; ++k) lin += static_cast<std::size_t>((idx[k] - lower_[k]) * h.stride[k]);
        return (h.bits[lin >> 6] >> (lin & 63)) & 1u;
    }
    std::uint64_t pos = hash_cell(idx) & h.mask;
    while (h.slots[pos] != kEmptySlot) {
        if (compare_rows(cells_.data() + h.slots[pos] * un, idx.data(), n_) == 0) return true;
        pos = (pos + 1) & h.mask;
    }
    return false;
}

bool LatticeSet::contains_point(std::span<const double> x) const {
    require(static_cast<int>(x.size()) == n_, "LatticeSet: point dimension mismatch");
    CellIndex buf[16];
    std::vector<CellIndex> heap;
    CellIndex* idx = buf;
    if (n_ > 16) {
        heap.resize(static_cast<std::size_t>(n_));
        idx = heap.data();
    }
    for (int k = 0; k < n_; ++k) idx[k] = static_cast<CellIndex>(std::floor(x[static_cast<std::size_t>(k)] / delta_));
    return contains_cell({idx, static_cast<std::size_t>(n_)});
}

void LatticeSet::require_compatible(const LatticeSet& other, const char* op) const {
    require(same_lattice(other), std::string("LatticeSet::") + op + ": sets must share n and delta");
}

LatticeSet LatticeSet::unite(const LatticeSet& other) const {
    require_compatible(other, "unite");
    const auto un = static_cast<std::size_t>(n_);
    std::vector<CellIndex> out;
    out.reserve(cells_.size() + other.cells_.size());
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < size() || j < other.size()) {
        int c;
        if (i == size()) c = 1;
        else if (j == other.size()) c = -1;
        else c = compare_rows(cells_.data() + i * un, other.cells_.data() + j * un, n_);
        const CellIndex* row = c <= 0 ? cells_.data() + i * un : other.cells_.data() + j * un;
        out.insert(out.end(), row, row + un);
        if (c <= 0) ++i;
        if (c >= 0) ++j;
    }
    return from_cells(n_, delta_, std::move(out));
}

LatticeSet LatticeSet::intersect(const LatticeSet& other) const {
    require_compatible(other, "intersect");
    const auto un = static_cast<std::size_t>(n_);
    std::vector<CellIndex> out;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < size() && j < other.size()) {
        const int c = compare_rows(cells_.data() + i * un, other.cells_.data() + j * un, n_);
        if (c == 0) out.insert(out.end(), cells_.data() + i * un, cells_.data() + (i + 1) * un);
        if (c <= 0) ++i;
        if (c >= 0) ++j;
    }
    return from_cells(n_, delta_, std::move(out));
}

LatticeSet LatticeSet::difference(const LatticeSet& other) const {
    require_compatible(other, "difference");
    const auto un = static_cast<std::size_t>(n_);
    std::vector<CellIndex> out;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < size()) {
        const int c = j < other.size() ? compare_rows(cells_.data() + i * un, other.cells_.data() + j * un, n_) : -1;
        if (c < 0) out.insert(out.end(), cells_.data() + i * un, cells_.data() + (i + 1) * un);
        if (c <= 0) ++i;
        if (c >= 0) ++j;
    }
    return from_cells(n_, delta_, std::move(out));
}

std::size_t LatticeSet::intersection_count(const LatticeSet& other) const {
    require_compatible(other, "intersection_count");
    if (boxes_disjoint(other)) return 0;
    const auto un = static_cast<std::size_t>(n_);
    const LatticeSet& small = size() <= other.size() ? *this : other;
    const LatticeSet& large = size() <= other.size() ? other : *this;
    std::size_t count = 0;
    for (std::size_t i = 0; i < small.size(); ++i)
        if (large.contains_cell({small.cells_.data() + i * un, un})) ++count;
    return count;
}

LatticeSet LatticeSet::translated_cells(std::span<const CellIndex> shift) const {
    require(static_cast<int>(shift.size()) == n_, "LatticeSet: shift dimension mismatch");
    std::vector<CellIndex> out = cells_;
    const auto un = static_cast<std::size_t>(n_);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += shift[i % un];
    return from_cells(n_, delta_, std::move(out));
}

LatticeSet LatticeSet::filter(const std::function<bool(std::size_t)>& keep) const {
    const auto un = static_cast<std::size_t>(n_);
    std::vector<CellIndex> out;
    for (std::size_t i = 0; i < size(); ++i)
        if (keep(i)) out.insert(out.end(), cells_.data() + i * un, cells_.data() + (i + 1) * un);
    return from_cells(n_, delta_, std::move(out));
}

bool LatticeSet::boxes_disjoint(const LatticeSet& other) const {
    if (empty() || other.empty()) return true;
    require(n_ == other.n_, "LatticeSet: dimension mismatch");
    for (int k = 0; k < n_; ++k)
        if (coverage_max(k) <= other.coverage_min(k) || other.coverage_max(k) <= coverage_min(k)) return true;
    return false;
}

bool regions_disjoint(const LatticeSet& a, const LatticeSet& b) {
    if (a.boxes_disjoint(b)) return true;
    if (a.same_lattice(b)) return a.intersection_count(b) == 0;
    const LatticeSet& fine = a.delta() < b.delta() ? a : b;
    const LatticeSet& coarse = a.delta() < b.delta() ? b : a;
    const double ratio = coarse.delta() / fine.delta();
    const double level = std::round(std::log2(ratio));
    require(level < 62 && std::fabs(ratio - std::exp2(level)) <= 1e-12 * ratio,
            "regions_disjoint: cannot certify sets whose resolutions are not dyadic multiples");
    const auto factor = static_cast<CellIndex>(std::llround(std::exp2(level)));
    const auto n = static_cast<std::size_t>(fine.dimension());
    std::vector<CellIndex> parent(n);
    for (std::size_t i = 0; i < fine.size(); ++i) {
        const auto row = fine.cell(i);
        for (std::size_t k = 0; k < n; ++k) parent[k] = floor_div(row[k], factor);
        if (coarse.contains_cell(parent)) return false;
    }
    return true;
}

StepFunction::StepFunction(std::vector<StepLevel> levels) : levels_(std::move(levels)) {
    std::sort(levels_.begin(), levels_.end(), [](const StepLevel& a, const StepLevel& b) { return a.j < b.j; });
    for (std::size_t a = 0; a < levels_.size(); ++a) {
        require(levels_[a].set.dimension() == levels_.front().set.dimension(), "StepFunction: mixed dimensions");
        if (a > 0) require(levels_[a].j != levels_[a - 1].j, "StepFunction: repeated level index");
        for (std::size_t b = a + 1; b < levels_.size(); ++b)
            require(regions_disjoint(levels_[a].set, levels_[b].set),
                    "StepFunction: levels " + std::to_string(levels_[a].j) + " and " + std::to_string(levels_[b].j) +
                        " overlap");
    }
}

double StepFunction::value_at(std::span<const double> x) const {
    for (const auto& level : levels_)
        if (level.set.contains_point(x)) return std::ldexp(1.0, level.j);
    return 0.0;
}

StepFunction StepFunction::shifted(int dj) const {
    StepFunction out;
    out.levels_ = levels_;
    for (auto& level : out.levels_) level.j += dj;
    return out;
}

LatticeSet tube_set(const CurveConfig& cfg, double eps, double r, std::span<const double> center, double delta,
                    std::size_t budget) {
    validate_scale(cfg, eps, r, center, delta, "tube_set");
    TubeBuilder builder(cfg, eps, r, center, delta, budget);
    return LatticeSet::from_cells(cfg.n, delta, builder.run());
}

LatticeSet ball_set(const CurveConfig& cfg, double eps, double r, std::span<const double> center, double delta,
                    std::size_t budget) {
    validate_scale(cfg, eps, r, center, delta, "ball_set");
    const int n = cfg.n;
    std::vector<double> scale(static_cast<std::size_t>(n));
    double s = 1.0;
    for (auto& v : scale) {
        s *= r;
        v = s;
    }
    std::vector<CellIndex> out;
    std::vector<CellIndex> idx(static_cast<std::size_t>(n));
    std::function<void(int, double)> descend = [&](int k, double used) {
        if (k == n) {
            out.insert(out.end(), idx.begin(), idx.end());
            check_budget(out.size() / static_cast<std::size_t>(n), budget, "ball_set");
            return;
        }
        const auto uk = static_cast<std::size_t>(k);
        const double room = std::sqrt(std::max(0.0, eps * eps - used));
        const auto [first, last] =
            center_range(center[uk] - scale[uk] * room, center[uk] + scale[uk] * room, delta);
        for (CellIndex i = first; i <= last; ++i) {
            const double y = (center_of(i, delta) - center[uk]) / scale[uk];
            const double next = used + y * y;
            if (next > eps * eps) continue;
            idx[uk] = i;
            descend(k + 1, next);
        }
    };
    descend(0, 0.0);
    require(!out.empty(), "ball_set: resolution too coarse, no cell center inside the ball");
    return LatticeSet::from_cells(n, delta, std::move(out));
}

LatticeSet box_set(int n, double delta, std::span<const double> lo, std::span<const double> hi,
                   std::size_t budget) {
    require(static_cast<int>(lo.size()) == n && static_cast<int>(hi.size()) == n, "box_set: dimension mismatch");
    require(delta > 0.0, "box_set: delta must be positive");
    std::vector<std::pair<CellIndex, CellIndex>> ranges;
    double total = 1.0;
    for (int k = 0; k < n; ++k) {
        const auto range = center_range(lo[static_cast<std::size_t>(k)], hi[static_cast<std::size_t>(k)], delta);
        ranges.push_back(range);
        total *= static_cast<double>(std::max<CellIndex>(0, range.second - range.first + 1));
    }
    if (total > static_cast<double>(budget))
        throw CapacityError("box_set: cell budget of " + std::to_string(budget) + " exceeded");
    std::vector<CellIndex> out;
    if (total == 0.0) return LatticeSet::from_cells(n, delta, {});
    out.reserve(static_cast<std::size_t>(total) * static_cast<std::size_t>(n));
    std::vector<CellIndex> idx(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) idx[static_cast<std::size_t>(k)] = ranges[static_cast<std::size_t>(k)].first;
    while (true) {
        out.insert(out.end(), idx.begin(), idx.end());
        int k = n - 1;
        while (k >= 0) {
            auto& v = idx[static_cast<std::size_t>(k)];
            if (v < ranges[static_cast<std::size_t>(k)].second) {
                ++v;
                break;
            }
            v = ranges[static_cast<std::size_t>(k)].first;
            --k;
        }
        if (k < 0) break;
    }
    return LatticeSet::from_cells(n, delta, std::move(out));
}

std::vector<PackMember> pack_translates(int n, int count, const std::function<PackMember(int, const Point&)>& builder,
                                        const std::function<double(int)>& half_width, const PackRule& rule) {
    require(count >= 1, "pack_translates: need at least one member");
    require(rule.gap_factor >= 0.0 && rule.clearance >= 0.0, "pack_translates: negative spacing");
    std::vector<PackMember> members;
    members.reserve(static_cast<std::size_t>(count));
    double x1 = 0.0;
    for (int j = 0; j < count; ++j) {
        if (j > 0) {
            const double prev = half_width(j - 1);
            const double cur = half_width(j);
            x1 += prev + rule.gap_factor * 2.0 * std::max(prev, cur) + rule.clearance + cur;
        }
        Point center(static_cast<std::size_t>(n), 0.0);
        center[0] = x1;
        members.push_back(builder(j, center));
    }
    for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
            const std::size_t slots = std::min(members[a].sets.size(), members[b].sets.size());
            for (std::size_t s = 0; s < slots; ++s)
                ensure(regions_disjoint(members[a].sets[s], members[b].sets[s]),
                       "pack_translates: members " + std::to_string(a) + " and " + std::to_string(b) +
                           " overlap in slot " + std::to_string(s));
        }
    }
    return members;
}

}  // namespace mclab
