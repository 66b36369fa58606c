#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "splinetool/error.hpp"
#include "splinetool/pwl/curve.hpp"
#include "splinetool/pwl/spline.hpp"
#include "splinetool/slope_constraints.hpp"

namespace splinetool {

/// c + b*y + (a/2)*y^2
struct QuadPiece {
    double c = 0.0;
    double b = 0.0;
    double a = 0.0;

    [[nodiscard]] double operator()(double y) const noexcept { return c + y * (b + 0.5 * a * y); }
    [[nodiscard]] double derivative(double y) const noexcept { return b + a * y; }

    friend bool operator==(const QuadPiece&, const QuadPiece&) = default;
};

enum class ConvexityKind { Convex, Weak, Strong };

struct Convexity {
    ConvexityKind kind = ConvexityKind::Convex;
    double rho = 0.0;

    /// Modulus of weak convexity (0 unless kind == Weak).
    [[nodiscard]] double rho_weak() const noexcept { return kind == ConvexityKind::Weak ? rho : 0.0; }

    /// Classifies a potential whose second derivative is bounded below by
    /// curvature_min almost everywhere.
    static Convexity from_min_curvature(double curvature_min) noexcept {
        if (curvature_min > 0.0) return {ConvexityKind::Strong, curvature_min};
        if (curvature_min < 0.0) return {ConvexityKind::Weak, -curvature_min};
        return {ConvexityKind::Convex, 0.0};
    }

    friend bool operator==(const Convexity&, const Convexity&) = default;
};

/// Continuous piecewise-quadratic scalar potential normalized to phi(0) = 0.
///
/// Piece j lives on [breakpoints[j-1], breakpoints[j]) with the conventions
/// breakpoints[-1] = -inf and breakpoints[K] = +inf. The derivative is kept
/// as a point set so that jumps of phi' (kinks of phi) are represented
/// exactly.
class PwQuadPotential {
public:
    PwQuadPotential(std::vector<double> breakpoints, std::vector<QuadPiece> pieces, PwlCurve derivative_curve,
                    Convexity convexity)
        : breaks_(std::move(breakpoints)), pieces_(std::move(pieces)), derivative_(std::move(derivative_curve)),
          convexity_(convexity) {
        if (pieces_.size() != breaks_.size() + 1) {
            fail(ErrorCode::LengthMismatch, "potential needs one more piece than breakpoints");
        }
        for (std::size_t k = 1; k < breaks_.size(); ++k) {
            if (!(breaks_[k - 1] < breaks_[k])) fail(ErrorCode::InvalidArgument, "breakpoints must increase strictly");
        }
        for (std::size_t k = 0; k < breaks_.size(); ++k) {
            const double left = pieces_[k](breaks_[k]);
            const double right = pieces_[k + 1](breaks_[k]);
            if (std::abs(left - right) > 1e-10 * (1.0 + std::abs(left))) {
                fail(ErrorCode::InvalidArgument, "potential is discontinuous at breakpoint " + std::to_string(k));
            }
        }
    }

    /// Builds a potential from its pieces alone; the derivative point set is
    /// rebuilt from the one-sided limits at each breakpoint.
    static PwQuadPotential from_pieces(std::vector<double> breakpoints, std::vector<QuadPiece> pieces,
                                       Convexity convexity) {
        if (pieces.size() != breakpoints.size() + 1 || pieces.empty()) {
            fail(ErrorCode::LengthMismatch, "potential needs one more piece than breakpoints");
        }
        std::vector<Point> pts;
        if (breakpoints.empty()) {
            pts = {{-1.0, pieces[0].derivative(-1.0)}, {1.0, pieces[0].derivative(1.0)}};
        } else {
            const double first = breakpoints.front() - 1.0;
            pts.push_back({first, pieces[0].derivative(first)});
            for (std::size_t k = 0; k < breakpoints.size(); ++k) {
                const double tau = breakpoints[k];
                const double left = pieces[k].derivative(tau);
                const double right = pieces[k + 1].derivative(tau);
                pts.push_back({tau, left});
                if (right != left) pts.push_back({tau, right});
            }
            const double last = breakpoints.back() + 1.0;
            pts.push_back({last, pieces.back().derivative(last)});
        }
        PwlCurve curve = PwlCurve::make(std::move(pts));
        return {std::move(breakpoints), std::move(pieces), std::move(curve), convexity};
    }

    [[nodiscard]] const std::vector<double>& breakpoints() const noexcept { return breaks_; }
    [[nodiscard]] const std::vector<QuadPiece>& pieces() const noexcept { return pieces_; }
    [[nodiscard]] const PwlCurve& derivative_curve() const noexcept { return derivative_; }
    [[nodiscard]] const Convexity& convexity() const noexcept { return convexity_; }

    [[nodiscard]] std::size_t piece_index(double y) const noexcept {
        return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), y) - breaks_.begin());
    }

    [[nodiscard]] double operator()(double y) const noexcept { return pieces_[piece_index(y)](y); }

    [[nodiscard]] double derivative(double y) const noexcept { return derivative_(y); }

private:
    std::vector<double> breaks_;
    std::vector<QuadPiece> pieces_;
    PwlCurve derivative_;
    Convexity convexity_;
};

inline double eval_potential(const PwQuadPotential& potential, double y) noexcept { return potential(y); }

inline double eval_potential_derivative(const PwQuadPotential& potential, double y) noexcept {
    return potential.derivative(y);
}

/// Primitive of a piecewise-linear derivative given as a point set (jumps
/// allowed), anchored so that phi(0) = 0.
inline PwQuadPotential integrate_derivative(const PwlCurve& derivative, Convexity convexity) {
    std::vector<double> breaks;
    std::vector<QuadPiece> pieces;
    for (std::size_t i = 0; i + 1 < derivative.size(); ++i) {
        const Point& p = derivative[i];
        const Point& q = derivative[i + 1];
        if (p.x == q.x) continue; // jump: no area
        const double slope = (q.y - p.y) / (q.x - p.x);
        if (!pieces.empty()) breaks.push_back(p.x);
        pieces.push_back({0.0, p.y - slope * p.x, slope});
    }

    // Continuity fixes the constants once the piece holding 0 is pinned.
    const std::size_t origin =
        static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), 0.0) - breaks.begin());
    pieces[origin].c = 0.0;
    for (std::size_t j = origin; j-- > 0;) {
        const double tau = breaks[j];
        const QuadPiece& r = pieces[j + 1];
        QuadPiece& l = pieces[j];
        l.c = r.c + (r.b - l.b) * tau + 0.5 * (r.a - l.a) * tau * tau;
    }
    for (std::size_t j = origin; j + 1 < pieces.size(); ++j) {
        const double tau = breaks[j];
        const QuadPiece& l = pieces[j];
        QuadPiece& r = pieces[j + 1];
        r.c = l.c + (l.b - r.b) * tau + 0.5 * (l.a - r.a) * tau * tau;
    }
    return {std::move(breaks), std::move(pieces), derivative, convexity};
}

/// Quadratic-spline potential whose derivative is the given spline. Its
/// convexity modulus is s_min of the spline (strong if positive, weak if
/// negative).
inline PwQuadPotential potential_from_derivative(const NodalSpline& spline) {
    const SlopeRange r = slope_range(spline);
    return integrate_derivative(to_curve(spline), Convexity::from_min_curvature(r.s_min));
}

/// Potential phi with prox_phi equal to the given nondecreasing curve (no
/// jumps). phi' is the point set {(y_n, x_n - y_n)} of the minimal
/// description of the curve.
inline PwQuadPotential potential_from_prox(const PwlCurve& prox) {
    if (prox.has_jumps()) fail(ErrorCode::JumpNotAllowed, "a proximal map cannot have jumps");
    const PwlCurve minimal = minimize(prox);
    double s_max = 0.0;
    for (std::size_t n = 1; n < minimal.size(); ++n) {
        const double s = (minimal[n].y - minimal[n - 1].y) / (minimal[n].x - minimal[n - 1].x);
        if (s < 0.0) fail(ErrorCode::NotNondecreasing, "proximal map must be nondecreasing");
        s_max = std::max(s_max, s);
    }
    const std::size_t last = minimal.size() - 1;
    if (minimal[1].y == minimal[0].y || minimal[last].y == minimal[last - 1].y) {
        fail(ErrorCode::DegenerateBoundary,
             "proximal map is flat on an unbounded end; its potential is not finite everywhere");
    }
    std::vector<Point> pts(minimal.size());
    for (std::size_t n = 0; n < minimal.size(); ++n) pts[n] = {minimal[n].y, minimal[n].x - minimal[n].y};

    // phi'' >= 1/s_max - 1 almost everywhere.
    Convexity convexity;
    if (s_max < 1.0) {
        convexity = {ConvexityKind::Strong, 1.0 / s_max - 1.0};
    } else if (s_max > 1.0) {
        convexity = {ConvexityKind::Weak, 1.0 - 1.0 / s_max};
    }
    return integrate_derivative(PwlCurve::make(std::move(pts)), convexity);
}

inline PwQuadPotential potential_from_prox(const NodalSpline& spline) {
    if (!classify(spline).nondecreasing) fail(ErrorCode::NotNondecreasing, "proximal map must be nondecreasing");
    return potential_from_prox(to_curve(spline));
}

/// lambda * phi
inline PwQuadPotential scale(const PwQuadPotential& potential, double lambda) {
    if (!(lambda > 0.0)) fail(ErrorCode::InvalidArgument, "potential scale must be positive");
    std::vector<QuadPiece> pieces = potential.pieces();
    for (QuadPiece& p : pieces) {
        p.c *= lambda;
        p.b *= lambda;
        p.a *= lambda;
    }
    std::vector<Point> pts(potential.derivative_curve().points().begin(), potential.derivative_curve().points().end());
    for (Point& p : pts) p.y *= lambda;
    Convexity c = potential.convexity();
    c.rho *= lambda;
    return {potential.breakpoints(), std::move(pieces), PwlCurve::make(std::move(pts)), c};
}

/// Proximal map of lambda * phi where prox_phi is the given nondecreasing
/// curve: points (lambda x_n + (1 - lambda) y_n, y_n).
///
/// Requires s_n + lambda (1 - s_n) > 0 on every segment, i.e. lambda <
/// s_max / (s_max - 1) when s_max > 1. The boundary value is rejected because
/// it collapses a segment into a jump.
inline PwlCurve reweight_prox(const PwlCurve& prox, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        fail(ErrorCode::LambdaOutOfRange, "lambda must be positive and finite");
    }
    double s_max = 0.0;
    for (std::size_t n = 1; n < prox.size(); ++n) {
        const Point& a = prox[n - 1];
        const Point& b = prox[n];
        if (b.y < a.y) fail(ErrorCode::NotNondecreasing, "proximal map must be nondecreasing");
        s_max = std::max(s_max, a.x == b.x ? kInf : (b.y - a.y) / (b.x - a.x));
    }
    if (s_max > 1.0) {
        const double limit = std::isinf(s_max) ? 1.0 : s_max / (s_max - 1.0);
        if (!(lambda < limit)) {
            fail(ErrorCode::LambdaOutOfRange, "lambda = " + std::to_string(lambda) + " must be below s_max/(s_max-1) = " +
                                                  std::to_string(limit) +
                                                  "; at or above it a segment collapses into a jump");
        }
    }
    std::vector<Point> pts(prox.size());
    for (std::size_t n = 0; n < prox.size(); ++n) {
        pts[n] = {lambda * prox[n].x + (1.0 - lambda) * prox[n].y, prox[n].y};
        if (n > 0 && !(pts[n - 1].x < pts[n].x)) {
            fail(ErrorCode::LambdaOutOfRange, "reweighted abscissas are not strictly increasing");
        }
    }
    return PwlCurve::make(std::move(pts));
}

/// Default search half-width: |x - prox(x)| <= |phi'(x)| / (1 - rho_weak),
/// since z + phi'(z) has slope at least 1 - rho_weak.
inline double default_prox_halfwidth(const PwQuadPotential& potential, double x) {
    const std::size_t j = potential.piece_index(x);
    double grad = std::abs(potential.pieces()[j].derivative(x));
    if (j > 0 && potential.breakpoints()[j - 1] == x) {
        grad = std::max(grad, std::abs(potential.pieces()[j - 1].derivative(x)));
    }
    return grad / (1.0 - potential.convexity().rho_weak()) + 1.0;
}

inline constexpr double kDefaultProxGridStep = 1e-4;

/// Brute-force prox: argmin of 0.5 (x - z)^2 + phi(z) over the grid
/// x + k * grid_step, |k * grid_step| <= search_halfwidth, refined by the
/// closed-form minimizer of the active quadratic pieces and nearby breakpoints.
inline double numeric_prox_oracle(const PwQuadPotential& potential, double x, double search_halfwidth,
                                  double grid_step = kDefaultProxGridStep) {
    if (potential.convexity().rho_weak() >= 1.0) {
        fail(ErrorCode::WeakConvexityTooLarge, "prox is not unique for weak convexity modulus >= 1");
    }
    if (!(grid_step > 0.0) || !(search_halfwidth >= 0.0)) {
        fail(ErrorCode::InvalidArgument, "grid_step must be positive and search_halfwidth nonnegative");
    }
    const auto& breaks = potential.breakpoints();
    const auto& pieces = potential.pieces();
    const auto cost = [&](double z, std::size_t j) { return 0.5 * (x - z) * (x - z) + pieces[j](z); };

    const auto half = static_cast<long long>(std::ceil(search_halfwidth / grid_step));
    double best_z = x;
    double best = kInf;
    std::size_t j = potential.piece_index(x - static_cast<double>(half) * grid_step);
    for (long long k = -half; k <= half; ++k) {
        const double z = x + static_cast<double>(k) * grid_step;
        while (j < breaks.size() && z >= breaks[j]) ++j;
        const double v = cost(z, j);
        if (v < best) {
            best = v;
            best_z = z;
        }
    }

    // Polish inside [best_z - step, best_z + step], where the exact minimizer lies.
    const double lo = best_z - grid_step;
    const double hi = best_z + grid_step;
    const std::size_t first = potential.piece_index(lo);
    const std::size_t last = potential.piece_index(hi);
    const auto consider = [&](double z) {
        const double v = cost(z, potential.piece_index(z));
        if (v < best) {
            best = v;
            best_z = z;
        }
    };
    for (std::size_t p = first; p <= last; ++p) {
        const double curvature = 1.0 + pieces[p].a;
        if (curvature > 0.0) {
            const double z = (x - pieces[p].b) / curvature;
            const double left = p == 0 ? -kInf : breaks[p - 1];
            const double right = p == breaks.size() ? kInf : breaks[p];
            if (z >= std::max(left, lo) && z <= std::min(right, hi)) consider(z);
        }
        if (p > first) consider(breaks[p - 1]);
    }
    return best_z;
}

inline double numeric_prox_oracle(const PwQuadPotential& potential, double x) {
    return numeric_prox_oracle(potential, x, default_prox_halfwidth(potential, x), kDefaultProxGridStep);
}

} // namespace splinetool
