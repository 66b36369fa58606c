#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "splinetool/error.hpp"

namespace splinetool::recon {

/// Row-major 2-D signal; 1-D signals use rows == 1.
struct Signal {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Signal() = default;
    Signal(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    Signal(std::size_t r, std::size_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
        if (data.size() != r * c) {
            fail(ErrorCode::ShapeMismatch, "signal of shape " + std::to_string(r) + "x" + std::to_string(c) +
                                               " needs " + std::to_string(r * c) + " values");
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return data.size(); }
    [[nodiscard]] double& operator()(std::size_t r, std::size_t c) noexcept { return data[r * cols + c]; }
    [[nodiscard]] double operator()(std::size_t r, std::size_t c) const noexcept { return data[r * cols + c]; }
    [[nodiscard]] bool same_shape(const Signal& o) const noexcept { return rows == o.rows && cols == o.cols; }

    friend bool operator==(const Signal&, const Signal&) = default;
};

inline void require_same_shape(const Signal& a, const Signal& b) {
    if (!a.same_shape(b)) {
        fail(ErrorCode::ShapeMismatch, "shape " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                                           " does not match " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
    }
}

inline double dot(const Signal& a, const Signal& b) {
    require_same_shape(a, b);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a.data[k] * b.data[k];
    return s;
}

inline double squared_norm(const Signal& a) noexcept {
    double s = 0.0;
    for (double v : a.data) s += v * v;
    return s;
}

inline double norm(const Signal& a) noexcept { return std::sqrt(squared_norm(a)); }

/// a += scale * b
inline void axpy(Signal& a, double scale, const Signal& b) {
    require_same_shape(a, b);
    for (std::size_t k = 0; k < a.size(); ++k) a.data[k] += scale * b.data[k];
}

inline Signal difference(const Signal& a, const Signal& b) {
    Signal out = a;
    axpy(out, -1.0, b);
    return out;
}

inline Signal add_gaussian_noise(const Signal& clean, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, sigma);
    Signal out = clean;
    for (double& v : out.data) v += noise(rng);
    return out;
}

/// Piecewise-constant test image in [0, 1]: a background level plus a few
/// random axis-aligned rectangles.
inline Signal random_blocks_image(std::size_t rows, std::size_t cols, std::mt19937_64& rng, std::size_t blocks = 4) {
    std::uniform_real_distribution<double> level(0.0, 1.0);
    Signal out(rows, cols, level(rng));
    for (std::size_t b = 0; b < blocks; ++b) {
        std::uniform_int_distribution<std::size_t> r(0, rows - 1), c(0, cols - 1);
        std::size_t r0 = r(rng), r1 = r(rng), c0 = c(rng), c1 = c(rng);
        if (r0 > r1) std::swap(r0, r1);
        if (c0 > c1) std::swap(c0, c1);
        const double v = level(rng);
        for (std::size_t i = r0; i <= r1; ++i)
            for (std::size_t j = c0; j <= c1; ++j) out(i, j) = v;
    }
    return out;
}

} // namespace splinetool::recon
