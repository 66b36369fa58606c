#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "splinetool/error.hpp"
#include "splinetool/pwl/spline.hpp"

namespace splinetool {

struct Point {
    double x;
    double y;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Ordered point set describing a piecewise-linear map, possibly with jumps
/// (consecutive points sharing an abscissa). The graph joins successive points
/// and extends the two boundary segments linearly.
///
/// Invariants: x nondecreasing; consecutive points distinct; the first and last
/// segments are not vertical (otherwise extrapolation is undefined).
class PwlCurve {
public:
    PwlCurve() = default;

    static PwlCurve make(std::vector<Point> points) {
        if (points.size() < 2) fail(ErrorCode::TooFewPoints, "a curve needs at least 2 points");
        for (std::size_t n = 0; n < points.size(); ++n) {
            if (!std::isfinite(points[n].x) || !std::isfinite(points[n].y)) {
                fail(ErrorCode::InvalidCurve, "point " + std::to_string(n) + " is not finite");
            }
            if (n == 0) continue;
            const Point& a = points[n - 1];
            const Point& b = points[n];
            if (b.x < a.x) fail(ErrorCode::InvalidCurve, "abscissas must be nondecreasing (point " + std::to_string(n) + ")");
            if (b.x == a.x && b.y == a.y) fail(ErrorCode::InvalidCurve, "duplicate point " + std::to_string(n));
        }
        if (points[0].x == points[1].x || points[points.size() - 2].x == points.back().x) {
            fail(ErrorCode::DegenerateBoundary, "boundary segment of a curve cannot be vertical");
        }
        return PwlCurve(std::move(points));
    }

    [[nodiscard]] std::span<const Point> points() const noexcept { return p_; }
    [[nodiscard]] std::size_t size() const noexcept { return p_.size(); }
    [[nodiscard]] const Point& operator[](std::size_t n) const noexcept { return p_[n]; }

    [[nodiscard]] bool has_jumps() const noexcept {
        for (std::size_t n = 1; n < p_.size(); ++n)
            if (p_[n].x == p_[n - 1].x) return true;
        return false;
    }

    /// Linear interpolation between bracketing points, linear extrapolation
    /// outside. At a jump abscissa the later point's value y_{n+1} is returned.
    [[nodiscard]] double operator()(double x) const noexcept {
        const auto it = std::upper_bound(p_.begin(), p_.end(), x, [](double v, const Point& p) { return v < p.x; });
        std::size_t hi = static_cast<std::size_t>(it - p_.begin());
        hi = std::clamp<std::size_t>(hi, 1, p_.size() - 1);
        const Point& a = p_[hi - 1];
        const Point& b = p_[hi];
        const double h = b.x - a.x;
        return a.y * ((b.x - x) / h) + b.y * ((x - a.x) / h);
    }

    friend bool operator==(const PwlCurve&, const PwlCurve&) = default;

private:
    explicit PwlCurve(std::vector<Point> p) : p_(std::move(p)) {}

    std::vector<Point> p_;
};

inline double eval_curve(const PwlCurve& curve, double x) noexcept { return curve(x); }

/// Nodes of a spline as a point set.
inline PwlCurve to_curve(const NodalSpline& spline) {
    std::vector<Point> pts(spline.size());
    for (std::size_t n = 0; n < pts.size(); ++n) pts[n] = {spline.grid()[n], spline.value(n)};
    return PwlCurve::make(std::move(pts));
}

inline NodalSpline canonical_interpolant(const PwlCurve& curve) {
    if (curve.size() < 2) fail(ErrorCode::TooFewPoints, "need at least 2 points");
    if (curve.has_jumps()) fail(ErrorCode::JumpNotAllowed, "canonical interpolant requires distinct abscissas");
    std::vector<double> t(curve.size());
    std::vector<double> f(curve.size());
    for (std::size_t n = 0; n < curve.size(); ++n) {
        t[n] = curve[n].x;
        f[n] = curve[n].y;
    }
    return NodalSpline::make(std::move(t), std::move(f));
}

inline NodalSpline canonical_interpolant(std::vector<Point> points) {
    return canonical_interpolant(PwlCurve::make(std::move(points)));
}

/// Set-theoretic inverse of a nondecreasing curve: swaps coordinates, so flat
/// segments become jumps and jumps become flat segments.
inline PwlCurve invert_monotone(const PwlCurve& curve) {
    std::vector<Point> out(curve.size());
    for (std::size_t n = 0; n < curve.size(); ++n) {
        if (n > 0 && curve[n].y < curve[n - 1].y) {
            fail(ErrorCode::NotMonotone, "curve decreases between points " + std::to_string(n - 1) + " and " +
                                             std::to_string(n));
        }
        out[n] = {curve[n].y, curve[n].x};
    }
    return PwlCurve::make(std::move(out));
}

namespace detail {

// Whether interior point n must be kept in a minimal description.
inline bool is_essential(std::span<const Point> p, std::size_t n, double tol) {
    const Point& a = p[n - 1];
    const Point& b = p[n];
    const Point& c = p[n + 1];
    if (b.x == c.x) return a.x != b.x; // jump point unless inside a vertical run
    if (a.x == b.x) return true;       // right end of a jump
    const double s_left = (b.y - a.y) / (b.x - a.x);
    const double s_right = (c.y - b.y) / (c.x - b.x);
    return std::abs(s_right - s_left) > tol;
}

} // namespace detail

/// Drops interior points that are neither knot points nor jump points.
inline PwlCurve minimize(const PwlCurve& curve, double tol = kExactTol) {
    std::vector<Point> kept;
    kept.reserve(curve.size());
    kept.push_back(curve[0]);
    for (std::size_t n = 1; n + 1 < curve.size(); ++n) {
        // Compare against the last kept point so that chains of nearly
        // collinear points cannot drift.
        const Point window[3] = {kept.back(), curve[n], curve[n + 1]};
        if (detail::is_essential(window, 1, tol)) kept.push_back(curve[n]);
    }
    kept.push_back(curve[curve.size() - 1]);
    return PwlCurve::make(std::move(kept));
}

inline bool is_minimal(const PwlCurve& curve, double tol = kExactTol) {
    for (std::size_t n = 1; n + 1 < curve.size(); ++n)
        if (!detail::is_essential(curve.points(), n, tol)) return false;
    return true;
}

} // namespace splinetool
