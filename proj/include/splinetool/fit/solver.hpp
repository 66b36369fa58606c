#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "splinetool/fit/problem.hpp"
#include "splinetool/fit/tv1d.hpp"
#include "splinetool/pwl/spline.hpp"
#include "splinetool/slope_constraints.hpp"

namespace splinetool {

namespace detail {

/// Symmetric positive-definite tridiagonal system, factored once (LDL^T).
class Tridiagonal {
public:
    Tridiagonal(std::vector<double> diag, std::vector<double> off) : d_(std::move(diag)), e_(std::move(off)) {
        const std::size_t n = d_.size();
        l_.assign(n > 0 ? n - 1 : 0, 0.0);
        for (std::size_t i = 1; i < n; ++i) {
            l_[i - 1] = e_[i - 1] / d_[i - 1];
            d_[i] -= l_[i - 1] * e_[i - 1];
        }
    }

    void solve(std::span<double> x) const {
        const std::size_t n = d_.size();
        for (std::size_t i = 1; i < n; ++i) x[i] -= l_[i - 1] * x[i - 1];
        for (std::size_t i = 0; i < n; ++i) x[i] /= d_[i];
        for (std::size_t i = n - 1; i-- > 0;) x[i] -= l_[i] * x[i + 1];
    }

private:
    std::vector<double> d_;
    std::vector<double> e_;
    std::vector<double> l_;
};

inline double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Segment slopes (without the duplicated head): out[j] = (f[j+1] - f[j]) / h[j].
inline void segment_slopes(std::span<const double> h, std::span<const double> f, std::span<double> out) {
    for (std::size_t j = 0; j < h.size(); ++j) out[j] = (f[j + 1] - f[j]) / h[j];
}

// Adjoint of segment_slopes.
inline void segment_slopes_adjoint(std::span<const double> h, std::span<const double> u, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < h.size(); ++j) {
        out[j] -= u[j] / h[j];
        out[j + 1] += u[j] / h[j];
    }
}

} // namespace detail

/// Solves the slope-constrained TV2 fitting problem by consensus splitting on
/// the slope variable u = G f (G: segment slopes):
///
///   f-step: (2 S^T S + rho G^T G) f = 2 S^T y + rho G^T (u - w)   (tridiagonal)
///   u-step: u = clip(tv_prox(G f + w, lambda / rho))               (exact)
///   w-step: w += G f - u
///
/// rho is rebalanced deterministically from the residual ratio. The returned
/// spline is rebuilt from the last u (hence exactly slope-feasible) with the
/// optimal constant offset. Throws DidNotConverge with that spline when
/// config.max_iters is exhausted.
inline FitResult fit(const FitProblem& problem, const SolverConfig& config = {}) {
    const Grid& grid = problem.grid;
    const std::size_t n_nodes = grid.size();
    const std::size_t n_seg = n_nodes - 1;
    const SamplingOperator sampling(grid, problem.xs());
    const std::vector<double> y = problem.ys();
    const std::size_t n_data = y.size();

    std::vector<double> h(n_seg);
    double mean_h2 = 0.0;
    for (std::size_t j = 0; j < n_seg; ++j) {
        h[j] = grid.spacing(j);
        mean_h2 += h[j] * h[j];
    }
    mean_h2 /= static_cast<double>(n_seg);

    // 2 S^T S is fixed; G^T G is added with the current rho.
    std::vector<double> sts_diag(n_nodes, 0.0), sts_off(n_seg, 0.0);
    for (std::size_t m = 0; m < n_data; ++m) {
        const std::size_t k = sampling.column(m);
        const auto [w0, w1] = sampling.row_weights(m);
        sts_diag[k] += 2.0 * w0 * w0;
        sts_diag[k + 1] += 2.0 * w1 * w1;
        sts_off[k] += 2.0 * w0 * w1;
    }
    const auto factor = [&](double rho) {
        std::vector<double> d = sts_diag;
        std::vector<double> e = sts_off;
        for (std::size_t j = 0; j < n_seg; ++j) {
            const double g = rho / (h[j] * h[j]);
            d[j] += g;
            d[j + 1] += g;
            e[j] -= g;
        }
        return detail::Tridiagonal(std::move(d), std::move(e));
    };

    std::vector<double> sty = sampling.adjoint(y);
    for (double& v : sty) v *= 2.0;

    double rho = std::max(1e-8, static_cast<double>(n_data) / static_cast<double>(n_nodes) * mean_h2);
    detail::Tridiagonal system = factor(rho);

    std::vector<double> f(n_nodes, 0.0), gf(n_seg, 0.0), u(n_seg, 0.0), u_prev(n_seg), w(n_seg, 0.0);
    std::vector<double> rhs(n_nodes), tmp_seg(n_seg), tmp_nodes(n_nodes);
    double residual = kInf;
    std::size_t iter = 0;
    bool converged = false;

    while (iter < config.max_iters) {
        ++iter;
        for (std::size_t j = 0; j < n_seg; ++j) tmp_seg[j] = u[j] - w[j];
        detail::segment_slopes_adjoint(h, tmp_seg, rhs);
        for (std::size_t n = 0; n < n_nodes; ++n) rhs[n] = sty[n] + rho * rhs[n];
        system.solve(rhs);
        f = rhs;

        detail::segment_slopes(h, f, gf);
        for (std::size_t j = 0; j < n_seg; ++j) tmp_seg[j] = gf[j] + w[j];
        u_prev = u;
        tv1d_denoise(tmp_seg, problem.lambda / rho, u);
        for (double& v : u) v = problem.bounds.clip(v);

        double r2 = 0.0;
        for (std::size_t j = 0; j < n_seg; ++j) {
            const double r = gf[j] - u[j];
            w[j] += r;
            r2 += r * r;
        }
        for (std::size_t j = 0; j < n_seg; ++j) tmp_seg[j] = u[j] - u_prev[j];
        detail::segment_slopes_adjoint(h, tmp_seg, tmp_nodes);
        const double primal = std::sqrt(r2);
        const double dual = rho * detail::norm2(tmp_nodes);
        detail::segment_slopes_adjoint(h, w, tmp_nodes);
        const double primal_scale = 1.0 + std::max(detail::norm2(gf), detail::norm2(u));
        const double dual_scale = 1.0 + rho * detail::norm2(tmp_nodes);
        residual = std::max(primal / primal_scale, dual / dual_scale);
        if (residual <= config.tol) {
            converged = true;
            break;
        }

        if (iter % 10 == 0) {
            const double pr = primal / primal_scale;
            const double du = dual / dual_scale;
            double factor_rho = 1.0;
            if (pr > 10.0 * du) factor_rho = 2.0;
            else if (du > 10.0 * pr) factor_rho = 0.5;
            if (factor_rho != 1.0 && rho * factor_rho > 1e-12 && rho * factor_rho < 1e12) {
                rho *= factor_rho;
                for (double& v : w) v /= factor_rho;
                system = factor(rho);
            }
        }
    }

    // Rebuild from the feasible slopes: f = c + cumsum(u h), c = mean residual (S 1 = 1).
    std::vector<double> fv(n_nodes);
    fv[0] = 0.0;
    for (std::size_t j = 0; j < n_seg; ++j) fv[j + 1] = fv[j] + u[j] * h[j];
    const std::vector<double> sampled = sampling.apply(fv);
    double offset = 0.0;
    for (std::size_t m = 0; m < n_data; ++m) offset += y[m] - sampled[m];
    offset /= static_cast<double>(n_data);
    for (double& v : fv) v += offset;

    FitResult result = make_result(problem, NodalSpline(grid, std::move(fv)), residual, iter, converged);
    if (!converged) throw DidNotConverge(std::move(result));
    return result;
}

/// Removes interior nodes whose slope jump is at most tol; the kept nodes keep
/// their values.
inline NodalSpline prune_knots(const NodalSpline& spline, double tol) {
    if (!(tol >= 0.0)) fail(ErrorCode::InvalidArgument, "prune tolerance must be nonnegative");
    const SlopeVector s = slopes(spline);
    const Grid& grid = spline.grid();
    std::vector<double> t{grid.front()};
    std::vector<double> f{spline.value(0)};
    for (std::size_t n = 1; n + 1 < grid.size(); ++n) {
        if (std::abs(s[n + 1] - s[n]) <= tol) continue;
        t.push_back(grid[n]);
        f.push_back(spline.value(n));
    }
    t.push_back(grid.back());
    f.push_back(spline.value(grid.size() - 1));
    NodalSpline out = NodalSpline::make(std::move(t), std::move(f));
    out.meta = spline.meta;
    return out;
}

} // namespace splinetool
