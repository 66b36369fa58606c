#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "splinetool/error.hpp"
#include "splinetool/pwl/grid.hpp"

namespace splinetool {

/// Absolute tolerance used for "equal" comparisons between reals that are
/// meant to coincide exactly (slope heads, zero ReLU weights, ...).
inline constexpr double kExactTol = 1e-12;

/// Linear spline stored by its values at the grid nodes.
class NodalSpline {
public:
    NodalSpline(Grid grid, std::vector<double> values) : grid_(std::move(grid)), f_(std::move(values)) {
        if (f_.size() != grid_.size()) {
            fail(ErrorCode::LengthMismatch, "spline has " + std::to_string(f_.size()) + " values for " +
                                                std::to_string(grid_.size()) + " grid nodes");
        }
    }

    static NodalSpline make(std::vector<double> t, std::vector<double> f) {
        return NodalSpline(Grid::make(std::move(t)), std::move(f));
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return f_; }
    [[nodiscard]] std::size_t size() const noexcept { return f_.size(); }
    [[nodiscard]] double value(std::size_t n) const noexcept { return f_[n]; }

    /// Evaluates sum_n f_n phi_n(x); touches only the two active basis functions.
    [[nodiscard]] double operator()(double x) const noexcept {
        const std::size_t k = grid_.interval(x);
        const auto [w0, w1] = grid_.weights(k, x);
        return f_[k] * w0 + f_[k + 1] * w1;
    }

    /// Local slope at x (right-continuous at interior nodes).
    [[nodiscard]] double slope_at(double x) const noexcept {
        const std::size_t k = grid_.interval(x);
        return (f_[k + 1] - f_[k]) / grid_.spacing(k);
    }

    std::map<std::string, std::string> meta;

    friend bool operator==(const NodalSpline& a, const NodalSpline& b) {
        return a.grid_ == b.grid_ && a.f_ == b.f_;
    }

private:
    Grid grid_;
    std::vector<double> f_;
};

inline double eval_spline(const NodalSpline& spline, double x) noexcept { return spline(x); }

/// Slopes of a spline with the head duplicated: s_0 == s_1.
struct SlopeVector {
    std::vector<double> s;

    [[nodiscard]] std::size_t size() const noexcept { return s.size(); }
    [[nodiscard]] double operator[](std::size_t n) const noexcept { return s[n]; }
};

namespace detail {

inline void divided_difference(std::span<const double> t, std::span<const double> f, std::span<double> out) {
    const std::size_t n_nodes = t.size();
    for (std::size_t n = 1; n < n_nodes; ++n) out[n] = (f[n] - f[n - 1]) / (t[n] - t[n - 1]);
    out[0] = out[1];
}

inline void check_slope_head(const SlopeVector& s) {
    if (s.size() < 2) fail(ErrorCode::TooShort, "slope vector needs at least 2 entries");
    if (std::abs(s[0] - s[1]) > kExactTol) {
        fail(ErrorCode::InconsistentSlopeHead, "s_1 must equal s_2 (got " + std::to_string(s[0]) + " vs " +
                                                   std::to_string(s[1]) + ")");
    }
}

} // namespace detail

inline SlopeVector slopes(const NodalSpline& spline) {
    SlopeVector out{std::vector<double>(spline.size())};
    detail::divided_difference(spline.grid().nodes(), spline.values(), out.s);
    return out;
}

/// Inverse of slopes() up to the constant: f_0 = f1, f_n = f_{n-1} + s_n (t_n - t_{n-1}).
inline NodalSpline from_slopes(const Grid& grid, const SlopeVector& s, double f1) {
    detail::check_slope_head(s);
    if (s.size() != grid.size()) {
        fail(ErrorCode::LengthMismatch, "slope vector length does not match the grid");
    }
    std::vector<double> f(grid.size());
    f[0] = f1;
    for (std::size_t n = 1; n < f.size(); ++n) f[n] = f[n - 1] + s[n] * grid.spacing(n - 1);
    return NodalSpline(grid, std::move(f));
}

/// Second-order total variation: sum of absolute slope jumps.
inline double tv2(const SlopeVector& s) noexcept {
    double total = 0.0;
    for (std::size_t n = 1; n < s.size(); ++n) total += std::abs(s[n] - s[n - 1]);
    return total;
}

inline double tv2(const NodalSpline& spline) { return tv2(slopes(spline)); }

struct SlopeRange {
    double s_min;
    double s_max;

    [[nodiscard]] double lipschitz() const noexcept { return std::max(std::abs(s_min), std::abs(s_max)); }
};

inline SlopeRange slope_range(const SlopeVector& s) noexcept {
    const auto [lo, hi] = std::minmax_element(s.s.begin(), s.s.end());
    return {*lo, *hi};
}

inline SlopeRange slope_range(const NodalSpline& spline) { return slope_range(slopes(spline)); }

inline double lipschitz(const NodalSpline& spline) { return slope_range(spline).lipschitz(); }

/// Smallest absolute slope (the essential infimum of |f'|).
inline double min_abs_slope(const NodalSpline& spline) {
    const SlopeVector s = slopes(spline);
    double best = std::abs(s[0]);
    for (double v : s.s) best = std::min(best, std::abs(v));
    return best;
}

/// b0 + b1 x + sum_k a_k (x - tau_k)_+
struct ReluForm {
    double b0 = 0.0;
    double b1 = 0.0;
    std::vector<double> knots;
    std::vector<double> weights;

    [[nodiscard]] double operator()(double x) const noexcept {
        double v = b0 + b1 * x;
        for (std::size_t k = 0; k < knots.size(); ++k) v += weights[k] * std::max(0.0, x - knots[k]);
        return v;
    }

    [[nodiscard]] double l1_norm() const noexcept {
        double total = 0.0;
        for (double a : weights) total += std::abs(a);
        return total;
    }
};

/// ReLU expansion of a nodal spline. Knots whose weight is below kExactTol in
/// magnitude are dropped.
inline ReluForm to_relu_form(const NodalSpline& spline) {
    const SlopeVector s = slopes(spline);
    const Grid& grid = spline.grid();
    ReluForm r;
    r.b1 = s[1];
    r.b0 = spline.value(0) - r.b1 * grid[0];
    for (std::size_t n = 1; n + 1 < grid.size(); ++n) {
        const double a = s[n + 1] - s[n];
        if (std::abs(a) < kExactTol) continue;
        r.knots.push_back(grid[n]);
        r.weights.push_back(a);
    }
    return r;
}

/// Nodal spline on the grid (tau_1 - pad, tau_1, ..., tau_K, tau_K + pad).
inline NodalSpline from_relu_form(const ReluForm& r, double pad = 1.0) {
    if (!(pad > 0.0)) fail(ErrorCode::InvalidArgument, "pad must be positive");
    if (r.knots.size() != r.weights.size()) {
        fail(ErrorCode::LengthMismatch, "ReLU form has mismatched knots and weights");
    }
    std::vector<double> t;
    if (r.knots.empty()) {
        t = {-pad, pad};
    } else {
        t.reserve(r.knots.size() + 2);
        t.push_back(r.knots.front() - pad);
        t.insert(t.end(), r.knots.begin(), r.knots.end());
        t.push_back(r.knots.back() + pad);
    }
    Grid grid = Grid::make(std::move(t));
    std::vector<double> f(grid.size());
    for (std::size_t n = 0; n < f.size(); ++n) f[n] = r(grid[n]);
    return NodalSpline(std::move(grid), std::move(f));
}

} // namespace splinetool
