#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "splinetool/error.hpp"
#include "splinetool/pwl/curve.hpp"
#include "splinetool/pwl/grid.hpp"
#include "splinetool/pwl/spline.hpp"
#include "splinetool/slope_constraints.hpp"

namespace splinetool {

/// Sparse sampling matrix [S]_{m,n} = phi_n(x_m); every row has the two
/// weights of the interval holding x_m.
class SamplingOperator {
public:
    SamplingOperator(Grid grid, std::vector<double> xs) : grid_(std::move(grid)), xs_(std::move(xs)) {
        col_.resize(xs_.size());
        w0_.resize(xs_.size());
        w1_.resize(xs_.size());
        for (std::size_t m = 0; m < xs_.size(); ++m) {
            if (!std::isfinite(xs_[m])) fail(ErrorCode::InvalidArgument, "sample location must be finite");
            col_[m] = grid_.interval(xs_[m]);
            std::tie(w0_[m], w1_[m]) = grid_.weights(col_[m], xs_[m]);
        }
    }

    [[nodiscard]] std::size_t rows() const noexcept { return xs_.size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return grid_.size(); }
    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> sample_locations() const noexcept { return xs_; }

    /// Column of the first nonzero in row m and the two weights.
    [[nodiscard]] std::size_t column(std::size_t m) const noexcept { return col_[m]; }
    [[nodiscard]] std::pair<double, double> row_weights(std::size_t m) const noexcept { return {w0_[m], w1_[m]}; }

    [[nodiscard]] std::vector<double> apply(std::span<const double> f) const {
        if (f.size() != cols()) fail(ErrorCode::LengthMismatch, "sampling operator input has wrong length");
        std::vector<double> out(rows());
        for (std::size_t m = 0; m < rows(); ++m) out[m] = w0_[m] * f[col_[m]] + w1_[m] * f[col_[m] + 1];
        return out;
    }

    [[nodiscard]] std::vector<double> adjoint(std::span<const double> u) const {
        if (u.size() != rows()) fail(ErrorCode::LengthMismatch, "sampling adjoint input has wrong length");
        std::vector<double> out(cols(), 0.0);
        for (std::size_t m = 0; m < rows(); ++m) {
            out[col_[m]] += w0_[m] * u[m];
            out[col_[m] + 1] += w1_[m] * u[m];
        }
        return out;
    }

private:
    Grid grid_;
    std::vector<double> xs_;
    std::vector<std::size_t> col_;
    std::vector<double> w0_;
    std::vector<double> w1_;
};

inline SamplingOperator build_sampling(const Grid& grid, std::vector<double> xs) {
    return SamplingOperator(grid, std::move(xs));
}

/// Data abscissas padded by one node on each side.
inline Grid default_grid(std::span<const Point> data) {
    if (data.empty()) fail(ErrorCode::InvalidProblem, "no data points");
    std::vector<double> t;
    t.reserve(data.size() + 2);
    t.push_back(data.front().x - 1.0);
    for (const Point& p : data) t.push_back(p.x);
    t.push_back(data.back().x + 1.0);
    return Grid::make(std::move(t));
}

/// min ||y - S f||^2 + lambda * TV2(f)  s.t. bounds on every slope of f.
struct FitProblem {
    std::vector<Point> data;
    Grid grid;
    double lambda;
    SlopeBounds bounds;

    static FitProblem make(std::vector<Point> data, std::optional<Grid> grid, double lambda, SlopeBounds bounds) {
        if (data.empty()) fail(ErrorCode::InvalidProblem, "no data points");
        for (std::size_t m = 0; m < data.size(); ++m) {
            if (!std::isfinite(data[m].x) || !std::isfinite(data[m].y)) {
                fail(ErrorCode::InvalidProblem, "data point " + std::to_string(m) + " is not finite");
            }
            if (m > 0 && !(data[m - 1].x < data[m].x)) {
                fail(ErrorCode::InvalidProblem, "data abscissas must be strictly increasing (point " +
                                                    std::to_string(m) + ")");
            }
        }
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorCode::InvalidProblem, "lambda must be >= 0");
        Grid g = grid ? std::move(*grid) : default_grid(data);
        if (g.front() > data.front().x || g.back() < data.back().x) {
            fail(ErrorCode::InvalidProblem, "grid must span the data range");
        }
        return FitProblem{std::move(data), std::move(g), lambda, bounds};
    }

    [[nodiscard]] std::vector<double> xs() const {
        std::vector<double> out(data.size());
        for (std::size_t m = 0; m < data.size(); ++m) out[m] = data[m].x;
        return out;
    }

    [[nodiscard]] std::vector<double> ys() const {
        std::vector<double> out(data.size());
        for (std::size_t m = 0; m < data.size(); ++m) out[m] = data[m].y;
        return out;
    }
};

struct ObjectiveValue {
    double total;
    double data_term;
    double reg_term;
};

inline ObjectiveValue objective(const FitProblem& problem, const NodalSpline& spline) {
    if (!(spline.grid() == problem.grid)) fail(ErrorCode::GridMismatch, "spline is not defined on the problem grid");
    double data = 0.0;
    for (const Point& p : problem.data) {
        const double r = p.y - spline(p.x);
        data += r * r;
    }
    const double reg = tv2(spline);
    return {data + problem.lambda * reg, data, reg};
}

struct SolverConfig {
    double tol = 1e-10;
    std::size_t max_iters = 200000;
};

struct FitResult {
    NodalSpline spline;
    double objective;
    double data_term;
    double reg_term;
    double max_slope_violation;
    double optimality_residual;
    std::size_t iterations;
    bool converged;
};

inline FitResult make_result(const FitProblem& problem, NodalSpline spline, double residual, std::size_t iterations,
                             bool converged) {
    const ObjectiveValue v = objective(problem, spline);
    const double violation = max_slope_violation(spline, problem.bounds);
    return FitResult{std::move(spline), v.total, v.data_term, v.reg_term, violation, residual, iterations, converged};
}

/// Raised by fit() when the iteration budget runs out; carries the last
/// (slope-feasible) iterate.
class DidNotConverge : public Error {
public:
    explicit DidNotConverge(FitResult result)
        : Error(ErrorCode::DidNotConverge, "solver stopped after " + std::to_string(result.iterations) +
                                               " iterations with residual " +
                                               std::to_string(result.optimality_residual)),
          result_(std::move(result)) {}

    [[nodiscard]] const FitResult& result() const noexcept { return result_; }

private:
    FitResult result_;
};

} // namespace splinetool
