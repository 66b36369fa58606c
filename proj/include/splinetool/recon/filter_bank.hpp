#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "splinetool/error.hpp"
#include "splinetool/recon/signal.hpp"

namespace splinetool::recon {

enum class Boundary { Circular, Reflective };

inline const char* to_string(Boundary b) noexcept { return b == Boundary::Circular ? "circular" : "reflective"; }

/// Small correlation kernel, row-major, anchored at ((rows-1)/2, (cols-1)/2):
///   (k * x)[r, c] = sum_{a,b} taps[a, b] * x[r + a - ar, c + b - ac]
struct Kernel {
    std::size_t rows = 1;
    std::size_t cols = 1;
    std::vector<double> taps{1.0};

    [[nodiscard]] std::ptrdiff_t row_offset(std::size_t a) const noexcept {
        return static_cast<std::ptrdiff_t>(a) - static_cast<std::ptrdiff_t>((rows - 1) / 2);
    }
    [[nodiscard]] std::ptrdiff_t col_offset(std::size_t b) const noexcept {
        return static_cast<std::ptrdiff_t>(b) - static_cast<std::ptrdiff_t>((cols - 1) / 2);
    }

    friend bool operator==(const Kernel&, const Kernel&) = default;
};

namespace detail {

inline std::size_t wrap_index(std::ptrdiff_t i, std::size_t n, Boundary boundary) noexcept {
    const auto len = static_cast<std::ptrdiff_t>(n);
    if (boundary == Boundary::Circular) {
        i %= len;
        if (i < 0) i += len;
        return static_cast<std::size_t>(i);
    }
    // Half-sample symmetric reflection: -1 -> 0, n -> n-1, period 2n.
    const std::ptrdiff_t period = 2 * len;
    i %= period;
    if (i < 0) i += period;
    if (i >= len) i = period - 1 - i;
    return static_cast<std::size_t>(i);
}

} // namespace detail

/// Bank of I correlation filters W_i bound to one signal shape, with a norm
/// bound on the stacked analysis operator W = [W_1; ...; W_I].
///
/// The bound is exact for circular boundaries (maximum over DFT frequencies
/// of sqrt(sum_i |K_i|^2)) and a Schur-test bound for reflective ones. A
/// caller-declared bound is accepted only if power iteration does not exceed
/// it by more than 1e-6.
class FilterBank {
public:
    FilterBank(std::vector<Kernel> kernels, Boundary boundary, std::size_t rows, std::size_t cols,
               std::optional<double> declared_bound = std::nullopt)
        : kernels_(std::move(kernels)), boundary_(boundary), rows_(rows), cols_(cols) {
        if (kernels_.empty()) fail(ErrorCode::InvalidArgument, "filter bank needs at least one kernel");
        if (rows_ == 0 || cols_ == 0) fail(ErrorCode::InvalidArgument, "filter bank shape must be nonempty");
        for (const Kernel& k : kernels_) {
            if (k.rows == 0 || k.cols == 0 || k.taps.size() != k.rows * k.cols) {
                fail(ErrorCode::InvalidArgument, "kernel taps do not match its shape");
            }
            for (double v : k.taps)
                if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "kernel taps must be finite");
        }
        build_index_maps();
        bound_ = boundary_ == Boundary::Circular ? circular_norm() : schur_bound();
        estimate_ = power_iteration(200);
        if (declared_bound) {
            if (!(*declared_bound >= estimate_ - 1e-6)) {
                fail(ErrorCode::InvalidArgument, "declared norm bound " + std::to_string(*declared_bound) +
                                                     " is below the measured operator norm " +
                                                     std::to_string(estimate_));
            }
            bound_ = *declared_bound;
        }
    }

    [[nodiscard]] std::size_t channels() const noexcept { return kernels_.size(); }
    [[nodiscard]] const std::vector<Kernel>& kernels() const noexcept { return kernels_; }
    [[nodiscard]] Boundary boundary() const noexcept { return boundary_; }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    /// Upper bound on ||W||.
    [[nodiscard]] double norm_bound() const noexcept { return bound_; }
    /// Power-iteration estimate of ||W|| made at construction.
    [[nodiscard]] double norm_estimate() const noexcept { return estimate_; }

    [[nodiscard]] Signal apply(std::size_t i, const Signal& x) const {
        check_shape(x);
        const Kernel& k = kernels_[i];
        Signal out(rows_, cols_);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                double s = 0.0;
                for (std::size_t a = 0; a < k.rows; ++a) {
                    const std::size_t rr = row_map_[i][a][r];
                    for (std::size_t b = 0; b < k.cols; ++b) s += k.taps[a * k.cols + b] * x(rr, col_map_[i][b][c]);
                }
                out(r, c) = s;
            }
        }
        return out;
    }

    [[nodiscard]] Signal adjoint(std::size_t i, const Signal& u) const {
        check_shape(u);
        const Kernel& k = kernels_[i];
        Signal out(rows_, cols_);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                const double v = u(r, c);
                for (std::size_t a = 0; a < k.rows; ++a) {
                    const std::size_t rr = row_map_[i][a][r];
                    for (std::size_t b = 0; b < k.cols; ++b) out(rr, col_map_[i][b][c]) += k.taps[a * k.cols + b] * v;
                }
            }
        }
        return out;
    }

    /// d/d taps of <g, W_i x>: entry (a, b) is sum_p g[p] x[map(p, a, b)]. The
    /// same contraction gives d/d taps of <W_i^T v, h> as correlate(i, v, h).
    [[nodiscard]] std::vector<double> correlate(std::size_t i, const Signal& g, const Signal& x) const {
        check_shape(g);
        check_shape(x);
        const Kernel& k = kernels_[i];
        std::vector<double> out(k.taps.size(), 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                const double v = g(r, c);
                if (v == 0.0) continue;
                for (std::size_t a = 0; a < k.rows; ++a) {
                    const std::size_t rr = row_map_[i][a][r];
                    for (std::size_t b = 0; b < k.cols; ++b) out[a * k.cols + b] += v * x(rr, col_map_[i][b][c]);
                }
            }
        }
        return out;
    }

    [[nodiscard]] std::vector<Signal> analysis(const Signal& x) const {
        std::vector<Signal> out;
        out.reserve(channels());
        for (std::size_t i = 0; i < channels(); ++i) out.push_back(apply(i, x));
        return out;
    }

    /// sum_i W_i^T z_i
    [[nodiscard]] Signal synthesis(const std::vector<Signal>& z) const {
        if (z.size() != channels()) fail(ErrorCode::ShapeMismatch, "channel count does not match the bank");
        Signal out(rows_, cols_);
        for (std::size_t i = 0; i < channels(); ++i) axpy(out, 1.0, adjoint(i, z[i]));
        return out;
    }

    /// Same filters scaled so that norm_bound() == 1.
    [[nodiscard]] FilterBank normalized() const {
        std::vector<Kernel> k = kernels_;
        if (bound_ > 0.0)
            for (Kernel& kk : k)
                for (double& v : kk.taps) v /= bound_;
        return {std::move(k), boundary_, rows_, cols_};
    }

    [[nodiscard]] FilterBank with_kernels(std::vector<Kernel> kernels) const {
        return {std::move(kernels), boundary_, rows_, cols_};
    }

private:
    void check_shape(const Signal& x) const {
        if (x.rows != rows_ || x.cols != cols_) {
            fail(ErrorCode::ShapeMismatch, "signal shape " + std::to_string(x.rows) + "x" + std::to_string(x.cols) +
                                               " does not match the bank shape " + std::to_string(rows_) + "x" +
                                               std::to_string(cols_));
        }
    }

    void build_index_maps() {
        row_map_.resize(kernels_.size());
        col_map_.resize(kernels_.size());
        for (std::size_t i = 0; i < kernels_.size(); ++i) {
            const Kernel& k = kernels_[i];
            row_map_[i].assign(k.rows, std::vector<std::size_t>(rows_));
            col_map_[i].assign(k.cols, std::vector<std::size_t>(cols_));
            for (std::size_t a = 0; a < k.rows; ++a)
                for (std::size_t r = 0; r < rows_; ++r)
                    row_map_[i][a][r] = detail::wrap_index(static_cast<std::ptrdiff_t>(r) + k.row_offset(a), rows_, boundary_);
            for (std::size_t b = 0; b < k.cols; ++b)
                for (std::size_t c = 0; c < cols_; ++c)
                    col_map_[i][b][c] = detail::wrap_index(static_cast<std::ptrdiff_t>(c) + k.col_offset(b), cols_, boundary_);
        }
    }

    [[nodiscard]] double circular_norm() const {
        double best = 0.0;
        for (std::size_t u = 0; u < rows_; ++u) {
            for (std::size_t v = 0; v < cols_; ++v) {
                double total = 0.0;
                for (const Kernel& k : kernels_) {
                    std::complex<double> h = 0.0;
                    for (std::size_t a = 0; a < k.rows; ++a) {
                        for (std::size_t b = 0; b < k.cols; ++b) {
                            const double phase = 2.0 * std::numbers::pi *
                                                 (static_cast<double>(k.row_offset(a)) * static_cast<double>(u) /
                                                      static_cast<double>(rows_) +
                                                  static_cast<double>(k.col_offset(b)) * static_cast<double>(v) /
                                                      static_cast<double>(cols_));
                            h += k.taps[a * k.cols + b] * std::polar(1.0, phase);
                        }
                    }
                    total += std::norm(h);
                }
                best = std::max(best, total);
            }
        }
        return std::sqrt(best);
    }

    // ||W||^2 <= sum_i ||W_i||_1 ||W_i||_inf, with absolute row/column sums
    // bounded by running the filters with |taps| on a ones image.
    [[nodiscard]] double schur_bound() const {
        double total = 0.0;
        const Signal ones(rows_, cols_, 1.0);
        for (std::size_t i = 0; i < kernels_.size(); ++i) {
            Kernel abs_k = kernels_[i];
            for (double& v : abs_k.taps) v = std::abs(v);
            const FilterBank single(abs_k, *this, i);
            const Signal row_sums = single.apply(0, ones);
            const Signal col_sums = single.adjoint(0, ones);
            const double r = *std::max_element(row_sums.data.begin(), row_sums.data.end());
            const double c = *std::max_element(col_sums.data.begin(), col_sums.data.end());
            total += r * c;
        }
        return std::sqrt(total);
    }

    // Power iteration on W^T W from a fixed deterministic start.
    [[nodiscard]] double power_iteration(std::size_t iters) const {
        Signal x(rows_, cols_);
        for (std::size_t k = 0; k < x.size(); ++k) x.data[k] = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(k) + 0.3);
        double estimate = 0.0;
        for (std::size_t it = 0; it < iters; ++it) {
            const double nx = norm(x);
            if (nx == 0.0) return 0.0;
            for (double& v : x.data) v /= nx;
            x = synthesis(analysis(x));
            estimate = std::sqrt(norm(x));
        }
        return estimate;
    }

    // Single-kernel bank sharing the parent's index maps (no norm work).
    FilterBank(Kernel k, const FilterBank& parent, std::size_t i)
        : kernels_{std::move(k)}, boundary_(parent.boundary_), rows_(parent.rows_), cols_(parent.cols_),
          row_map_{parent.row_map_[i]}, col_map_{parent.col_map_[i]} {}

    std::vector<Kernel> kernels_;
    Boundary boundary_;
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::vector<std::vector<std::size_t>>> row_map_;
    std::vector<std::vector<std::vector<std::size_t>>> col_map_;
    double bound_ = 0.0;
    double estimate_ = 0.0;
};

inline FilterBank identity_bank(std::size_t rows, std::size_t cols) {
    return {{Kernel{}}, Boundary::Circular, rows, cols};
}

/// Forward differences along columns and rows ([-1, 1] horizontally and vertically).
inline FilterBank finite_difference_bank(std::size_t rows, std::size_t cols, Boundary boundary = Boundary::Circular) {
    std::vector<Kernel> k;
    if (cols > 1) k.push_back({1, 2, {-1.0, 1.0}});
    if (rows > 1) k.push_back({2, 1, {-1.0, 1.0}});
    return {std::move(k), boundary, rows, cols};
}

/// Orthonormal 3x3 DCT-II basis filters without the constant one (8 zero-mean
/// filters). On 1-D signals the 3-tap DCT is used instead (2 filters).
inline FilterBank dct3_bank(std::size_t rows, std::size_t cols, Boundary boundary = Boundary::Circular) {
    const auto basis = [](std::size_t u, std::size_t n) {
        const double scale = u == 0 ? std::sqrt(1.0 / 3.0) : std::sqrt(2.0 / 3.0);
        return scale * std::cos(std::numbers::pi * (2.0 * static_cast<double>(n) + 1.0) * static_cast<double>(u) / 6.0);
    };
    std::vector<Kernel> k;
    if (rows == 1) {
        for (std::size_t u = 1; u < 3; ++u) {
            Kernel kk{1, 3, std::vector<double>(3)};
            for (std::size_t n = 0; n < 3; ++n) kk.taps[n] = basis(u, n);
            k.push_back(std::move(kk));
        }
    } else {
        for (std::size_t u = 0; u < 3; ++u) {
            for (std::size_t v = 0; v < 3; ++v) {
                if (u == 0 && v == 0) continue;
                Kernel kk{3, 3, std::vector<double>(9)};
                for (std::size_t a = 0; a < 3; ++a)
                    for (std::size_t b = 0; b < 3; ++b) kk.taps[a * 3 + b] = basis(u, a) * basis(v, b);
                k.push_back(std::move(kk));
            }
        }
    }
    return {std::move(k), boundary, rows, cols};
}

} // namespace splinetool::recon
