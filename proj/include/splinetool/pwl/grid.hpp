#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "splinetool/error.hpp"

namespace splinetool {

/// Strictly increasing node locations t_0 < t_1 < ... < t_{N-1} (N >= 2) of a
/// nonuniform linear-spline mesh.
class Grid {
public:
    static Grid make(std::vector<double> locations) {
        if (locations.size() < 2) {
            fail(ErrorCode::TooShort, "grid needs at least 2 nodes, got " +
                                          std::to_string(locations.size()));
        }
        for (std::size_t n = 0; n < locations.size(); ++n) {
            if (!std::isfinite(locations[n])) {
                fail(ErrorCode::NonMonotoneGrid, "grid node " + std::to_string(n) + " is not finite");
            }
            if (n > 0 && !(locations[n - 1] < locations[n])) {
                fail(ErrorCode::NonMonotoneGrid, "grid nodes must be strictly increasing (node " +
                                                     std::to_string(n) + ")");
            }
        }
        return Grid(std::move(locations));
    }

    [[nodiscard]] std::size_t size() const noexcept { return t_.size(); }
    [[nodiscard]] double operator[](std::size_t n) const noexcept { return t_[n]; }
    [[nodiscard]] std::span<const double> nodes() const noexcept { return t_; }
    [[nodiscard]] double front() const noexcept { return t_.front(); }
    [[nodiscard]] double back() const noexcept { return t_.back(); }
    [[nodiscard]] double spacing(std::size_t k) const noexcept { return t_[k + 1] - t_[k]; }

    /// Index k of the interval I_k = [t_k, t_{k+1}) holding x. The first interval
    /// extends to -inf and the last one to +inf, so the result is in [0, N-2].
    [[nodiscard]] std::size_t interval(double x) const noexcept {
        const auto it = std::upper_bound(t_.begin() + 1, t_.end() - 1, x);
        return static_cast<std::size_t>(it - t_.begin()) - 1;
    }

    /// Weights of the two basis functions active on interval k at x:
    /// (phi_k(x), phi_{k+1}(x)). Exact at the interval endpoints.
    [[nodiscard]] std::pair<double, double> weights(std::size_t k, double x) const noexcept {
        const double h = t_[k + 1] - t_[k];
        return {(t_[k + 1] - x) / h, (x - t_[k]) / h};
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    explicit Grid(std::vector<double> t) : t_(std::move(t)) {}

    std::vector<double> t_;
};

/// Value of the n-th interpolating basis function (0-based) at x. Interior
/// functions are nonuniform hats; the two functions at each end extend linearly
/// to infinity.
inline double eval_basis(const Grid& grid, std::size_t n, double x) {
    if (n >= grid.size()) {
        fail(ErrorCode::IndexOutOfRange,
             "basis index " + std::to_string(n) + " out of range for " + std::to_string(grid.size()) + " nodes");
    }
    const std::size_t k = grid.interval(x);
    if (n != k && n != k + 1) return 0.0;
    const auto [w0, w1] = grid.weights(k, x);
    return n == k ? w0 : w1;
}

} // namespace splinetool
