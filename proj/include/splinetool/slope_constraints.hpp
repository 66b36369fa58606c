#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splinetool/error.hpp"
#include "splinetool/pwl/spline.hpp"

namespace splinetool {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Box [s_min, s_max] on the slopes of a spline; either side may be infinite.
class SlopeBounds {
public:
    SlopeBounds() = default;

    SlopeBounds(double s_min, double s_max) : lo_(s_min), hi_(s_max) {
        if (std::isnan(s_min) || std::isnan(s_max) || !(s_min < s_max) || s_min == kInf || s_max == -kInf) {
            fail(ErrorCode::InvalidBounds, "slope bounds require s_min < s_max (got [" + std::to_string(s_min) +
                                               ", " + std::to_string(s_max) + "])");
        }
    }

    static SlopeBounds unbounded() { return {}; }
    static SlopeBounds monotone() { return {0.0, kInf}; }
    static SlopeBounds firmly_nonexpansive() { return {0.0, 1.0}; }
    static SlopeBounds one_lipschitz() { return {-1.0, 1.0}; }

    [[nodiscard]] double lower() const noexcept { return lo_; }
    [[nodiscard]] double upper() const noexcept { return hi_; }
    [[nodiscard]] bool has_lower() const noexcept { return std::isfinite(lo_); }
    [[nodiscard]] bool has_upper() const noexcept { return std::isfinite(hi_); }
    [[nodiscard]] double clip(double s) const noexcept { return std::clamp(s, lo_, hi_); }
    [[nodiscard]] bool contains(double s) const noexcept { return lo_ <= s && s <= hi_; }

    /// Amount by which s lies outside the box (0 when inside).
    [[nodiscard]] double violation(double s) const noexcept {
        return std::max({0.0, lo_ - s, s - hi_});
    }

    friend bool operator==(const SlopeBounds&, const SlopeBounds&) = default;

private:
    double lo_ = -kInf;
    double hi_ = kInf;
};

/// Matrix-free divided-difference operator D_t: nodal values -> slopes, with
/// the head slope duplicated.
inline SlopeVector apply_divided_difference(const Grid& grid, std::span<const double> f) {
    if (f.size() != grid.size()) {
        fail(ErrorCode::LengthMismatch, "expected " + std::to_string(grid.size()) + " nodal values, got " +
                                            std::to_string(f.size()));
    }
    SlopeVector out{std::vector<double>(grid.size())};
    detail::divided_difference(grid.nodes(), f, out.s);
    return out;
}

/// Right inverse of D_t with zero-sum output: cumulative recursion followed by
/// mean removal. O(N).
inline std::vector<double> apply_right_inverse(const Grid& grid, const SlopeVector& s) {
    detail::check_slope_head(s);
    if (s.size() != grid.size()) fail(ErrorCode::LengthMismatch, "slope vector length does not match the grid");
    std::vector<double> f(grid.size());
    f[0] = 0.0;
    double sum = 0.0;
    for (std::size_t n = 1; n < f.size(); ++n) {
        f[n] = f[n - 1] + s[n] * grid.spacing(n - 1);
        sum += f[n];
    }
    const double mean = sum / static_cast<double>(f.size());
    for (double& v : f) v -= mean;
    return f;
}

inline double mean(std::span<const double> v) noexcept {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

/// Clips the slopes into the box while preserving the mean of the nodal
/// values. Feasible inputs are returned unchanged (bit for bit).
inline NodalSpline project_slopes(const NodalSpline& spline, const SlopeBounds& bounds) {
    SlopeVector s = slopes(spline);
    bool feasible = true;
    for (double v : s.s) feasible = feasible && bounds.contains(v);
    if (feasible) return spline;
    for (double& v : s.s) v = bounds.clip(v);
    std::vector<double> f = apply_right_inverse(spline.grid(), s);
    const double m = mean(spline.values());
    for (double& v : f) v += m;
    NodalSpline out(spline.grid(), std::move(f));
    out.meta = spline.meta;
    return out;
}

inline double max_slope_violation(const NodalSpline& spline, const SlopeBounds& bounds) {
    double worst = 0.0;
    for (double v : slopes(spline).s) worst = std::max(worst, bounds.violation(v));
    return worst;
}

/// Monotonicity categories of a scalar map, read off its slope range.
struct MonotonicityClass {
    bool nondecreasing = false;
    bool firmly_nonexpansive = false;
    bool one_lipschitz = false;
    std::optional<double> rho_strong; ///< set when s_min > 0
    std::optional<double> rho_weak;   ///< set when s_min < 0
};

inline MonotonicityClass classify(const SlopeRange& r) {
    MonotonicityClass c;
    c.nondecreasing = r.s_min >= 0.0;
    c.firmly_nonexpansive = r.s_min >= 0.0 && r.s_max <= 1.0;
    c.one_lipschitz = r.s_min >= -1.0 && r.s_max <= 1.0;
    if (r.s_min > 0.0) c.rho_strong = r.s_min;
    if (r.s_min < 0.0) c.rho_weak = -r.s_min;
    return c;
}

inline MonotonicityClass classify(const NodalSpline& spline) { return classify(slope_range(spline)); }

} // namespace splinetool
