#include "mclab/geometry.hpp"

#include "mclab/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace mclab {

namespace {

using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

constexpr int kMaxCachedDimension = 16;

long double determinant(const MatrixL& m) {
    if (m.rows() == 0) return 1.0L;
    return m.partialPivLu().determinant();
}

MatrixL derivative_rows(int n, std::span<const double> t) {
    MatrixL m(n, n);
    for (int i = 0; i < n; ++i) {
        long double power = 1.0L;
        for (int k = 0; k < n; ++k) {
            m(i, k) = static_cast<long double>(k + 1) * power;
            power *= static_cast<long double>(t[i]);
        }
    }
    return m;
}

long double product_of_gaps(std::span<const double> t) {
    long double prod = 1.0L;
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = i + 1; j < t.size(); ++j)
            prod *= std::fabs(static_cast<long double>(t[j]) - static_cast<long double>(t[i]));
    return prod;
}

double compute_vandermonde_constant(int n) {
    std::vector<double> nodes(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        nodes[static_cast<std::size_t>(i)] = std::cos(std::numbers::pi * (2.0 * i + 1.0) / (2.0 * n));
    const long double det = std::fabs(determinant(derivative_rows(n, nodes)));
    return static_cast<double>(det / product_of_gaps(nodes));
}

int sign_of_position(int position) { return position % 2 == 0 ? 1 : -1; }

std::vector<long double> phi_long(int n, std::span<const long double> t) {
    std::vector<long double> out(static_cast<std::size_t>(n), 0.0L);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const long double sign = (i % 2 == 0) ? 1.0L : -1.0L;
        long double power = 1.0L;
        for (int k = 0; k < n; ++k) {
            power *= t[i];
            out[static_cast<std::size_t>(k)] += sign * power;
        }
    }
    return out;
}

}  // namespace

CurveConfig::CurveConfig(int dim) : n(dim) {
    require(dim >= 2, "CurveConfig: dimension must be >= 2, got " + std::to_string(dim));
}

ExponentProfile::ExponentProfile(int dim)
    : n(dim),
      p(Rational(dim + 1, 2)),
      q(Rational(static_cast<std::int64_t>(dim) * (dim + 1), 2 * (dim - 1))),
      p_dual(dual(p)),
      q_dual(dual(q)) {
    require(dim >= 2, "ExponentProfile: dimension must be >= 2");
}

ExponentProfile::ExponentProfile(int dim, double u_index, double v_index) : ExponentProfile(dim) {
    require(u_index < q_value(), "ExponentProfile: need u < q_n");
    require(v_index > p_value(), "ExponentProfile: need v > p_n");
    require(u_index < v_index, "ExponentProfile: need u < v");
    u = u_index;
    v = v_index;
}

Point moment_curve(const CurveConfig& cfg, double t) {
    Point x(static_cast<std::size_t>(cfg.n));
    double power = 1.0;
    for (auto& coord : x) {
        power *= t;
        coord = power;
    }
    return x;
}

Point moment_curve_derivative(const CurveConfig& cfg, double t) {
    Point d(static_cast<std::size_t>(cfg.n));
    double power = 1.0;
    for (int k = 0; k < cfg.n; ++k) {
        d[static_cast<std::size_t>(k)] = (k + 1) * power;
        power *= t;
    }
    return d;
}

Point dilate(const CurveConfig& cfg, double R, std::span<const double> x) {
    require(R > 0.0, "dilate: R must be positive");
    require(static_cast<int>(x.size()) == cfg.n, "dilate: point dimension mismatch");
    Point out(x.begin(), x.end());
    double scale = 1.0;
    for (auto& coord : out) {
        scale *= R;
        coord *= scale;
    }
    return out;
}

Point phi_k(const CurveConfig& cfg, std::span<const double> t) {
    require(!t.empty(), "phi_k: need at least one parameter");
    Point out(static_cast<std::size_t>(cfg.n), 0.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        double power = 1.0;
        for (auto& coord : out) {
            power *= t[i];
            coord += sign * power;
        }
    }
    return out;
}

double vandermonde_constant(int n) {
    require(n >= 1, "vandermonde_constant: n must be positive");
    static const std::array<double, kMaxCachedDimension + 1> cache = [] {
        std::array<double, kMaxCachedDimension + 1> c{};
        for (int k = 1; k <= kMaxCachedDimension; ++k) c[static_cast<std::size_t>(k)] = compute_vandermonde_constant(k);
        return c;
    }();
    if (n <= kMaxCachedDimension) return cache[static_cast<std::size_t>(n)];
    return compute_vandermonde_constant(n);
}

double vandermonde_product(std::span<const double> t) { return static_cast<double>(product_of_gaps(t)); }

double derivative_matrix_determinant(const CurveConfig& cfg, std::span<const double> t) {
    require(static_cast<int>(t.size()) == cfg.n, "vandermonde_jacobian: need exactly n nodes");
    return static_cast<double>(std::fabs(determinant(derivative_rows(cfg.n, t))));
}

double vandermonde_jacobian(const CurveConfig& cfg, std::span<const double> t) {
    const double det = derivative_matrix_determinant(cfg, t);
    const double closed = vandermonde_constant(cfg.n) * vandermonde_product(t);
    const double scale = std::max(std::fabs(det), std::fabs(closed));
    // Entries are O(n) on [-1,1]; the absolute floor covers repeated nodes.
    ensure(std::fabs(det - closed) <= 1e-9 * scale + 1e-13,
           "vandermonde_jacobian: determinant and product forms disagree");
    return det;
}

int SliceLayout::prefix_length() const {
    return static_cast<int>(std::count(role.begin(), role.end(), IndexRole::dropped));
}

int SliceLayout::tau_count() const {
    return static_cast<int>(std::count_if(role.begin(), role.end(), [](IndexRole r) {
        return r == IndexRole::free || r == IndexRole::quasi_free;
    }));
}

int SliceLayout::offset_count() const {
    return static_cast<int>(std::count(role.begin(), role.end(), IndexRole::bound));
}

std::vector<int> SliceLayout::tau_positions() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (role[static_cast<std::size_t>(i)] == IndexRole::free ||
            role[static_cast<std::size_t>(i)] == IndexRole::quasi_free)
            out.push_back(i);
    return out;
}

std::vector<int> SliceLayout::bound_positions() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (role[static_cast<std::size_t>(i)] == IndexRole::bound) out.push_back(i);
    return out;
}

std::vector<double> reconstruct_configuration(const SliceLayout& layout, std::span<const double> t0,
                                              std::span<const double> tau, std::span<const double> s) {
    const auto taus = layout.tau_positions();
    const auto bounds = layout.bound_positions();
    require(static_cast<int>(t0.size()) == layout.prefix_length(), "slice: prefix length mismatch");
    require(tau.size() == taus.size(), "slice: tau dimension mismatch");
    require(s.size() == bounds.size(), "slice: offset dimension mismatch");
    std::vector<double> t(static_cast<std::size_t>(layout.size()));
    std::size_t prefix = 0;
    for (int i = 0; i < layout.size(); ++i)
        if (layout.role[static_cast<std::size_t>(i)] == IndexRole::dropped) t[static_cast<std::size_t>(i)] = t0[prefix++];
    for (std::size_t c = 0; c < taus.size(); ++c) t[static_cast<std::size_t>(taus[c])] = tau[c];
    for (std::size_t b = 0; b < bounds.size(); ++b) {
        const int pos = bounds[b];
        const int anchor = layout.anchor[static_cast<std::size_t>(pos)];
        require(anchor >= 0 && anchor < layout.size() &&
                    layout.role[static_cast<std::size_t>(anchor)] == IndexRole::free,
                "slice: bound index must be anchored to a free index");
        t[static_cast<std::size_t>(pos)] = t[static_cast<std::size_t>(anchor)] + s[b];
    }
    return t;
}

SlicedJacobian jacobian_sliced_both(const CurveConfig& cfg, std::span<const double> t0,
                                    const SliceLayout& layout, std::span<const double> tau,
                                    std::span<const double> s) {
    const int n = cfg.n;
    require(layout.tau_count() == n, "jacobian_sliced: layout must have exactly n free/quasi-free indices");
    const auto t = reconstruct_configuration(layout, t0, tau, s);
    const auto taus = layout.tau_positions();

    MatrixL exact = MatrixL::Zero(n, n);
    for (int c = 0; c < n; ++c) {
        const int head = taus[static_cast<std::size_t>(c)];
        for (int i = 0; i < layout.size(); ++i) {
            const bool carried = (i == head) || (layout.role[static_cast<std::size_t>(i)] == IndexRole::bound &&
                                                 layout.anchor[static_cast<std::size_t>(i)] == head);
            if (!carried) continue;
            const auto row = moment_curve_derivative(cfg, t[static_cast<std::size_t>(i)]);
            for (int k = 0; k < n; ++k)
                exact(k, c) += static_cast<long double>(sign_of_position(i)) * row[static_cast<std::size_t>(k)];
        }
    }

    // Nine-point central stencil: exact on polynomials of degree <= 8.
    static constexpr std::array<long double, 4> weights{4.0L / 5.0L, -1.0L / 5.0L, 4.0L / 105.0L, -1.0L / 280.0L};
    const long double h = 1.0L / 64.0L;
    std::vector<long double> base(t.begin(), t.end());
    MatrixL fd = MatrixL::Zero(n, n);
    for (int c = 0; c < n; ++c) {
        const int head = taus[static_cast<std::size_t>(c)];
        for (int step = 1; step <= 4; ++step) {
            for (int dir : {1, -1}) {
                auto shifted = base;
                const long double delta = dir * step * h;
                for (int i = 0; i < layout.size(); ++i) {
                    const bool carried = (i == head) || (layout.role[static_cast<std::size_t>(i)] == IndexRole::bound &&
                                                         layout.anchor[static_cast<std::size_t>(i)] == head);
                    if (carried) shifted[static_cast<std::size_t>(i)] += delta;
                }
                const auto value = phi_long(n, shifted);
                for (int k = 0; k < n; ++k)
                    fd(k, c) += dir * weights[static_cast<std::size_t>(step - 1)] * value[static_cast<std::size_t>(k)] / h;
            }
        }
    }

    // Without bound indices the columns are signed rows h'(tau_c); reuse the
    // plain derivative determinant so both paths agree bit for bit.
    const long double det_exact = layout.offset_count() == 0
                                      ? static_cast<long double>(derivative_matrix_determinant(cfg, tau))
                                      : std::fabs(determinant(exact));
    const long double det_fd = std::fabs(determinant(fd));
    long double hadamard = 1.0L;
    for (int c = 0; c < n; ++c) hadamard *= std::max(exact.col(c).norm(), 1e-300L);
    const long double tolerance = 1e-8L * std::max(det_exact, 1e-12L * hadamard);
    ensure(std::fabs(det_exact - det_fd) <= tolerance,
           "jacobian_sliced: finite-difference and exact Jacobians disagree");
    return {static_cast<double>(det_exact), static_cast<double>(det_fd)};
}

double jacobian_sliced(const CurveConfig& cfg, std::span<const double> t0, const SliceLayout& layout,
                       std::span<const double> tau, std::span<const double> s) {
    return jacobian_sliced_both(cfg, t0, layout, tau, s).exact;
}

}  // namespace mclab
