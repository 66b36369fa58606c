#pragma once

#include <cmath>
#include <limits>

#include "splinetool/error.hpp"
#include "splinetool/recon/signal.hpp"

namespace splinetool::recon {

/// 10 log10(peak^2 * size / ||ref - est||^2); +inf when the signals are equal.
inline double psnr(const Signal& reference, const Signal& estimate, double peak = 1.0) {
    require_same_shape(reference, estimate);
    if (!(peak > 0.0)) fail(ErrorCode::InvalidArgument, "peak must be positive");
    const double err = squared_norm(difference(reference, estimate));
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak * static_cast<double>(reference.size()) / err);
}

} // namespace splinetool::recon
