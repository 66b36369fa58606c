#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "splinetool/error.hpp"
#include "splinetool/pwl/spline.hpp"
#include "splinetool/slope_constraints.hpp"

namespace splinetool::recon {

enum class Mode { Derivative, Prox };

inline const char* to_string(Mode m) noexcept { return m == Mode::Derivative ? "derivative" : "prox"; }

/// Shared profile psi with per-channel scalings: psi_i(z) = psi(alpha_i z) / alpha_i.
class ChannelNonlinearity {
public:
    ChannelNonlinearity(NodalSpline profile, std::vector<double> alphas, Mode mode)
        : profile_(std::move(profile)), alphas_(std::move(alphas)), mode_(mode) {
        if (alphas_.empty()) fail(ErrorCode::InvalidArgument, "need at least one channel scaling");
        for (double a : alphas_)
            if (!(a > 0.0) || !std::isfinite(a)) fail(ErrorCode::InvalidArgument, "channel scalings must be positive");
        if (mode_ == Mode::Prox && !classify(profile_).nondecreasing) {
            fail(ErrorCode::NotNondecreasing, "a proximal profile must be nondecreasing");
        }
    }

    /// Same alpha on every channel.
    static ChannelNonlinearity uniform(NodalSpline profile, std::size_t channels, Mode mode, double alpha = 1.0) {
        return {std::move(profile), std::vector<double>(channels, alpha), mode};
    }

    [[nodiscard]] const NodalSpline& profile() const noexcept { return profile_; }
    [[nodiscard]] const std::vector<double>& alphas() const noexcept { return alphas_; }
    [[nodiscard]] Mode mode() const noexcept { return mode_; }
    [[nodiscard]] std::size_t channels() const noexcept { return alphas_.size(); }

    [[nodiscard]] double operator()(std::size_t i, double z) const noexcept {
        const double a = alphas_[i];
        return profile_(a * z) / a;
    }

    /// d psi_i / dz = psi'(alpha_i z), right-continuous at knots.
    [[nodiscard]] double slope(std::size_t i, double z) const noexcept { return profile_.slope_at(alphas_[i] * z); }

    [[nodiscard]] ChannelNonlinearity with_profile(NodalSpline p) const { return {std::move(p), alphas_, mode_}; }
    [[nodiscard]] ChannelNonlinearity with_alphas(std::vector<double> a) const { return {profile_, std::move(a), mode_}; }

private:
    NodalSpline profile_;
    std::vector<double> alphas_;
    Mode mode_;
};

} // namespace splinetool::recon
