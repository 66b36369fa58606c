#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "splinetool/error.hpp"
#include "splinetool/pwl/spline.hpp"
#include "splinetool/recon/filter_bank.hpp"
#include "splinetool/recon/nonlinearity.hpp"
#include "splinetool/recon/parallel.hpp"
#include "splinetool/recon/signal.hpp"
#include "splinetool/slope_constraints.hpp"

namespace splinetool::recon {

struct TrainingPair {
    Signal clean;
    Signal noisy;
};

/// K unrolled denoising steps (H = I).
///
///   derivative mode: x_0 = y, x_{k+1} = x_k - step * (sum_i W_i^T psi_i(W_i x_k) + x_k - y)
///   prox mode:       z_0 = W y, z_{k+1,i} = psi_i(z_{k,i} - step * W_i (W^T z_k - y)),
///                    output W^T z_K
struct Architecture {
    FilterBank bank;
    ChannelNonlinearity nl;
    std::size_t unroll = 5;
    double step = 0.5;
};

/// Largest step with guaranteed descent: 1 / (1 + ||W||^2 Lip(psi)) in
/// derivative mode, 1 / ||W||^2 in prox mode.
inline double stable_step(const FilterBank& bank, const ChannelNonlinearity& nl) {
    const double w2 = bank.norm_bound() * bank.norm_bound();
    if (nl.mode() == Mode::Prox) return 1.0 / w2;
    return 1.0 / (1.0 + w2 * lipschitz(nl.profile()));
}

struct TrainOptions {
    double step = 1e-2;
    std::size_t epochs = 10;
    double lambda_tv2 = 0.0;
    SlopeBounds bounds;
    bool learn_alphas = false;
    bool learn_taps = false;
    std::size_t threads = 0; ///< 0: hardware concurrency (capped by SPLINETOOL_THREADS)
};

struct Gradient {
    double loss = 0.0;
    std::vector<double> profile;
    std::vector<double> alphas;
    std::vector<std::vector<double>> taps;

    void add(const Gradient& o) {
        loss += o.loss;
        for (std::size_t n = 0; n < profile.size(); ++n) profile[n] += o.profile[n];
        for (std::size_t i = 0; i < alphas.size(); ++i) alphas[i] += o.alphas[i];
        for (std::size_t i = 0; i < taps.size(); ++i)
            for (std::size_t k = 0; k < taps[i].size(); ++k) taps[i][k] += o.taps[i][k];
    }
};

inline constexpr std::size_t kMaxTrainSide = 64;
inline constexpr std::size_t kMaxUnroll = 20;
inline constexpr std::size_t kMaxProfileNodes = 101;

inline void check_training_scale(const std::vector<TrainingPair>& data, const Architecture& arch) {
    if (arch.unroll > kMaxUnroll) fail(ErrorCode::ScaleTooLarge, "unroll depth is limited to 20");
    if (arch.nl.profile().size() > kMaxProfileNodes) fail(ErrorCode::ScaleTooLarge, "profile is limited to 101 nodes");
    for (const TrainingPair& p : data) {
        if (p.clean.rows > kMaxTrainSide || p.clean.cols > kMaxTrainSide) {
            fail(ErrorCode::ScaleTooLarge, "training signals are limited to 64x64");
        }
        require_same_shape(p.clean, p.noisy);
        if (p.clean.rows != arch.bank.rows() || p.clean.cols != arch.bank.cols()) {
            fail(ErrorCode::ShapeMismatch, "training signal shape does not match the filter bank");
        }
    }
    if (arch.bank.channels() != arch.nl.channels()) {
        fail(ErrorCode::ShapeMismatch, "bank and nonlinearity have different channel counts");
    }
}

namespace detail {

inline Gradient zero_gradient(const Architecture& arch) {
    Gradient g;
    g.profile.assign(arch.nl.profile().size(), 0.0);
    g.alphas.assign(arch.nl.channels(), 0.0);
    g.taps.resize(arch.bank.channels());
    for (std::size_t i = 0; i < arch.bank.channels(); ++i) g.taps[i].assign(arch.bank.kernels()[i].taps.size(), 0.0);
    return g;
}

// Accumulates d/d(profile, alpha_i) of sum_p dv[p] * psi_i(u[p]) and returns
// dv * psi_i'(u) (the gradient w.r.t. u).
inline Signal backprop_channel(const ChannelNonlinearity& nl, std::size_t i, const Signal& u, const Signal& dv,
                               Gradient& g) {
    const NodalSpline& psi = nl.profile();
    const Grid& grid = psi.grid();
    const double a = nl.alphas()[i];
    Signal du(u.rows, u.cols);
    double dalpha = 0.0;
    for (std::size_t p = 0; p < u.size(); ++p) {
        const double w = a * u.data[p];
        const std::size_t k = grid.interval(w);
        const auto [w0, w1] = grid.weights(k, w);
        const double d = dv.data[p];
        const double slope = (psi.value(k + 1) - psi.value(k)) / grid.spacing(k);
        g.profile[k] += d * w0 / a;
        g.profile[k + 1] += d * w1 / a;
        const double value = psi.value(k) * w0 + psi.value(k + 1) * w1;
        dalpha += d * (slope * u.data[p] / a - value / (a * a));
        du.data[p] = d * slope;
    }
    g.alphas[i] += dalpha;
    return du;
}

inline void apply_channel(const ChannelNonlinearity& nl, std::size_t i, Signal& s) {
    for (double& v : s.data) v = nl(i, v);
}

inline Gradient sample_gradient_derivative(const TrainingPair& pair, const Architecture& arch, double weight) {
    const FilterBank& bank = arch.bank;
    const std::size_t channels = bank.channels();
    const double gamma = arch.step;
    std::vector<Signal> xs{pair.noisy};
    std::vector<std::vector<Signal>> us(arch.unroll);
    for (std::size_t k = 0; k < arch.unroll; ++k) {
        const Signal& x = xs.back();
        Signal grad = difference(x, pair.noisy);
        us[k] = bank.analysis(x);
        for (std::size_t i = 0; i < channels; ++i) {
            Signal v = us[k][i];
            apply_channel(arch.nl, i, v);
            axpy(grad, 1.0, bank.adjoint(i, v));
        }
        Signal next = x;
        axpy(next, -gamma, grad);
        xs.push_back(std::move(next));
    }

    Gradient g = zero_gradient(arch);
    Signal gx = difference(xs.back(), pair.clean);
    g.loss = weight * squared_norm(gx);
    for (double& v : gx.data) v *= 2.0 * weight;

    for (std::size_t k = arch.unroll; k-- > 0;) {
        // gx holds dL/dx_{k+1}.
        Signal scaled = gx;
        for (double& v : scaled.data) v *= -gamma;
        Signal g_prev = gx;
        for (double& v : g_prev.data) v *= 1.0 - gamma;
        for (std::size_t i = 0; i < channels; ++i) {
            const Signal dv = bank.apply(i, scaled);
            const Signal du = backprop_channel(arch.nl, i, us[k][i], dv, g);
            axpy(g_prev, 1.0, bank.adjoint(i, du));
            Signal v = us[k][i];
            apply_channel(arch.nl, i, v);
            const std::vector<double> t_in = bank.correlate(i, du, xs[k]);
            const std::vector<double> t_out = bank.correlate(i, v, scaled);
            for (std::size_t t = 0; t < t_in.size(); ++t) g.taps[i][t] += t_in[t] + t_out[t];
        }
        gx = std::move(g_prev);
    }
    return g;
}

inline Gradient sample_gradient_prox(const TrainingPair& pair, const Architecture& arch, double weight) {
    const FilterBank& bank = arch.bank;
    const std::size_t channels = bank.channels();
    const double tau = arch.step;
    const Signal& y = pair.noisy;
    std::vector<std::vector<Signal>> zs{bank.analysis(y)};
    std::vector<std::vector<Signal>> as(arch.unroll);
    std::vector<Signal> rs(arch.unroll);
    for (std::size_t k = 0; k < arch.unroll; ++k) {
        const std::vector<Signal>& z = zs.back();
        rs[k] = difference(bank.synthesis(z), y);
        as[k].resize(channels);
        std::vector<Signal> next(channels);
        for (std::size_t i = 0; i < channels; ++i) {
            as[k][i] = z[i];
            axpy(as[k][i], -tau, bank.apply(i, rs[k]));
            next[i] = as[k][i];
            apply_channel(arch.nl, i, next[i]);
        }
        zs.push_back(std::move(next));
    }

    Gradient g = zero_gradient(arch);
    Signal gx = difference(bank.synthesis(zs.back()), pair.clean);
    g.loss = weight * squared_norm(gx);
    for (double& v : gx.data) v *= 2.0 * weight;
    std::vector<Signal> gz(channels);
    for (std::size_t i = 0; i < channels; ++i) {
        gz[i] = bank.apply(i, gx);
        const std::vector<double> t = bank.correlate(i, zs.back()[i], gx);
        for (std::size_t q = 0; q < t.size(); ++q) g.taps[i][q] += t[q];
    }

    for (std::size_t k = arch.unroll; k-- > 0;) {
        // gz holds dL/dz_{k+1}.
        std::vector<Signal> da(channels);
        Signal dr(y.rows, y.cols);
        for (std::size_t i = 0; i < channels; ++i) {
            da[i] = backprop_channel(arch.nl, i, as[k][i], gz[i], g);
            axpy(dr, -tau, bank.adjoint(i, da[i]));
            const std::vector<double> t = bank.correlate(i, da[i], rs[k]);
            for (std::size_t q = 0; q < t.size(); ++q) g.taps[i][q] -= tau * t[q];
        }
        for (std::size_t i = 0; i < channels; ++i) {
            gz[i] = da[i];
            axpy(gz[i], 1.0, bank.apply(i, dr));
            const std::vector<double> t = bank.correlate(i, zs[k][i], dr);
            for (std::size_t q = 0; q < t.size(); ++q) g.taps[i][q] += t[q];
        }
    }
    for (std::size_t i = 0; i < channels; ++i) {
        const std::vector<double> t = bank.correlate(i, gz[i], y);
        for (std::size_t q = 0; q < t.size(); ++q) g.taps[i][q] += t[q];
    }
    return g;
}

// Subgradient of TV2 w.r.t. nodal values; sign(0) = 0.
inline void add_tv2_subgradient(const NodalSpline& psi, double lambda, Gradient& g) {
    if (lambda == 0.0) return;
    const Grid& grid = psi.grid();
    const std::size_t segs = grid.size() - 1;
    std::vector<double> s(segs);
    for (std::size_t j = 0; j < segs; ++j) s[j] = (psi.value(j + 1) - psi.value(j)) / grid.spacing(j);
    for (std::size_t j = 0; j + 1 < segs; ++j) {
        const double d = s[j + 1] - s[j];
        const double sg = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        if (sg == 0.0) continue;
        const double h0 = grid.spacing(j), h1 = grid.spacing(j + 1);
        // d s_{j+1}: +1/h1 at j+2, -1/h1 at j+1; d s_j: +1/h0 at j+1, -1/h0 at j
        g.profile[j + 2] += lambda * sg / h1;
        g.profile[j + 1] -= lambda * sg * (1.0 / h1 + 1.0 / h0);
        g.profile[j] += lambda * sg / h0;
    }
    g.loss += lambda * tv2(psi);
}

} // namespace detail

/// Output of the unrolled network for one noisy input.
inline Signal unrolled_forward(const Signal& noisy, const Architecture& arch) {
    const FilterBank& bank = arch.bank;
    if (arch.nl.mode() == Mode::Derivative) {
        Signal x = noisy;
        for (std::size_t k = 0; k < arch.unroll; ++k) {
            Signal grad = difference(x, noisy);
            for (std::size_t i = 0; i < bank.channels(); ++i) {
                Signal v = bank.apply(i, x);
                detail::apply_channel(arch.nl, i, v);
                axpy(grad, 1.0, bank.adjoint(i, v));
            }
            axpy(x, -arch.step, grad);
        }
        return x;
    }
    std::vector<Signal> z = bank.analysis(noisy);
    for (std::size_t k = 0; k < arch.unroll; ++k) {
        const Signal r = difference(bank.synthesis(z), noisy);
        for (std::size_t i = 0; i < z.size(); ++i) {
            axpy(z[i], -arch.step, bank.apply(i, r));
            detail::apply_channel(arch.nl, i, z[i]);
        }
    }
    return bank.synthesis(z);
}

/// Training loss (mean squared reconstruction error summed over entries, plus
/// lambda_tv2 * TV2(psi)) and its gradient w.r.t. the nodal values of psi,
/// the channel scalings and the filter taps. Per-sample work runs in parallel;
/// the reduction follows sample order.
inline Gradient loss_and_gradient(const std::vector<TrainingPair>& data, const Architecture& arch, double lambda_tv2,
                                  std::size_t threads = 0) {
    check_training_scale(data, arch);
    if (data.empty()) fail(ErrorCode::InvalidArgument, "training set is empty");
    const double weight = 1.0 / static_cast<double>(data.size());
    std::vector<Gradient> parts(data.size());
    parallel_for(data.size(), worker_count(data.size(), threads), [&](std::size_t s) {
        parts[s] = arch.nl.mode() == Mode::Derivative ? detail::sample_gradient_derivative(data[s], arch, weight)
                                                      : detail::sample_gradient_prox(data[s], arch, weight);
    });
    Gradient total = detail::zero_gradient(arch);
    for (const Gradient& p : parts) total.add(p);
    detail::add_tv2_subgradient(arch.nl.profile(), lambda_tv2, total);
    return total;
}

struct TrainResult {
    Architecture arch;
    std::vector<double> loss_per_epoch; ///< loss before each epoch's update
    double final_loss = 0.0;
};

/// Projected gradient descent with a fixed step. After every update the
/// profile's slopes are projected into opts.bounds.
inline TrainResult train_unrolled(const std::vector<TrainingPair>& data, Architecture arch, const TrainOptions& opts) {
    check_training_scale(data, arch);
    if (!(opts.step >= 0.0)) fail(ErrorCode::InvalidArgument, "training step must be nonnegative");
    TrainResult result{std::move(arch), {}, 0.0};
    Architecture& a = result.arch;
    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        const Gradient g = loss_and_gradient(data, a, opts.lambda_tv2, opts.threads);
        result.loss_per_epoch.push_back(g.loss);
        if (opts.step == 0.0) continue;

        const NodalSpline& psi = a.nl.profile();
        std::vector<double> f(psi.values().begin(), psi.values().end());
        for (std::size_t n = 0; n < f.size(); ++n) f[n] -= opts.step * g.profile[n];
        NodalSpline next(psi.grid(), std::move(f));
        next.meta = psi.meta;
        next = project_slopes(next, opts.bounds);

        std::vector<double> alphas = a.nl.alphas();
        if (opts.learn_alphas) {
            for (std::size_t i = 0; i < alphas.size(); ++i) {
                const double updated = alphas[i] - opts.step * g.alphas[i];
                alphas[i] = updated > 0.0 ? updated : 0.5 * alphas[i];
            }
        }
        a.nl = ChannelNonlinearity(std::move(next), std::move(alphas), a.nl.mode());
        if (opts.learn_taps) {
            std::vector<Kernel> kernels = a.bank.kernels();
            for (std::size_t i = 0; i < kernels.size(); ++i)
                for (std::size_t t = 0; t < kernels[i].taps.size(); ++t) kernels[i].taps[t] -= opts.step * g.taps[i][t];
            a.bank = a.bank.with_kernels(std::move(kernels));
        }
    }
    result.final_loss = loss_and_gradient(data, a, opts.lambda_tv2, opts.threads).loss;
    return result;
}

} // namespace splinetool::recon
