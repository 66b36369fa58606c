#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace splinetool {

/// Exact 1-D total-variation denoising:
///   argmin_theta 0.5 * ||y - theta||^2 + lambda * sum_i |theta_{i+1} - theta_i|
///
/// Dynamic-programming solution in O(n): the derivative of the message
/// function is tracked as a piecewise-linear function through its knots, and
/// the solution is recovered by back-tracking through the clipping intervals
/// [lower[k], upper[k]].
inline void tv1d_denoise(std::span<const double> y, double lambda, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(y.size());
    if (n == 0) return;
    if (n == 1 || lambda <= 0.0) {
        std::copy(y.begin(), y.end(), out.begin());
        return;
    }

    std::vector<double> knot(2 * n), da(2 * n), db(2 * n);
    std::vector<double> lower(n - 1), upper(n - 1);

    lower[0] = y[0] - lambda;
    upper[0] = y[0] + lambda;
    std::ptrdiff_t l = n - 1;
    std::ptrdiff_t r = n;
    knot[l] = lower[0];
    knot[r] = upper[0];
    da[l] = 1.0;
    db[l] = lambda - y[0];
    da[r] = -1.0;
    db[r] = y[0] + lambda;
    double a_first = 1.0, b_first = -y[1] - lambda;
    double a_last = -1.0, b_last = y[1] - lambda;

    for (std::ptrdiff_t k = 1; k < n - 1; ++k) {
        double a_lo = a_first, b_lo = b_first;
        std::ptrdiff_t lo = l;
        for (; lo <= r; ++lo) {
            if (a_lo * knot[lo] + b_lo > -lambda) break;
            a_lo += da[lo];
            b_lo += db[lo];
        }
        double a_hi = a_last, b_hi = b_last;
        std::ptrdiff_t hi = r;
        for (; hi >= lo; --hi) {
            if (-a_hi * knot[hi] - b_hi < lambda) break;
            a_hi += da[hi];
            b_hi += db[hi];
        }

        lower[k] = (-lambda - b_lo) / a_lo;
        l = lo - 1;
        knot[l] = lower[k];
        upper[k] = (lambda + b_hi) / (-a_hi);
        r = hi + 1;
        knot[r] = upper[k];

        da[l] = a_lo;
        db[l] = b_lo + lambda;
        da[r] = a_hi;
        db[r] = b_hi + lambda;
        a_first = 1.0;
        b_first = -y[k + 1] - lambda;
        a_last = -1.0;
        b_last = y[k + 1] - lambda;
    }

    // Last coefficient: zero of the final derivative.
    double a_lo = a_first, b_lo = b_first;
    for (std::ptrdiff_t lo = l; lo <= r; ++lo) {
        if (a_lo * knot[lo] + b_lo > 0.0) break;
        a_lo += da[lo];
        b_lo += db[lo];
    }
    out[n - 1] = -b_lo / a_lo;
    for (std::ptrdiff_t k = n - 2; k >= 0; --k) out[k] = std::clamp(out[k + 1], lower[k], upper[k]);
}

inline std::vector<double> tv1d_denoise(std::span<const double> y, double lambda) {
    std::vector<double> out(y.size());
    tv1d_denoise(y, lambda, out);
    return out;
}

} // namespace splinetool
