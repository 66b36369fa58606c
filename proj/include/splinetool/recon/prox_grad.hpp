#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "splinetool/error.hpp"
#include "splinetool/recon/descent.hpp"
#include "splinetool/recon/filter_bank.hpp"
#include "splinetool/recon/nonlinearity.hpp"
#include "splinetool/recon/operators.hpp"
#include "splinetool/recon/signal.hpp"

namespace splinetool::recon {

/// Entrywise map applied to channel i.
using ChannelMap = std::function<double(std::size_t channel, double value)>;

/// Channel stacks are synthesized as x = sum_i W_i^T z_i with the bank's
/// filters W_i, so the gradient of 0.5 ||y - H x||^2 w.r.t. z_i is
/// W_i H^T (H x - y). The step is 1/L with L = problem.lipschitz *
/// bank.norm_bound()^2 (= problem.lipschitz for a normalized bank).
inline double prox_grad_lipschitz(const InverseProblem& problem, const FilterBank& bank) {
    return problem.lipschitz * bank.norm_bound() * bank.norm_bound();
}

inline std::vector<Signal> prox_grad_step(const std::vector<Signal>& z, const InverseProblem& problem,
                                          const FilterBank& bank, const ChannelMap& f) {
    if (z.size() != bank.channels()) fail(ErrorCode::ShapeMismatch, "channel stack does not match the bank");
    const double step = 1.0 / prox_grad_lipschitz(problem, bank);
    const Signal x = bank.synthesis(z);
    const Signal r = problem.h.adjoint(difference(problem.h.apply(x), problem.y));
    std::vector<Signal> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = z[i];
        axpy(out[i], -step, bank.apply(i, r));
        for (double& v : out[i].data) v = f(i, v);
    }
    return out;
}

inline std::vector<Signal> prox_grad_step(const std::vector<Signal>& z, const InverseProblem& problem,
                                          const FilterBank& bank, const ChannelNonlinearity& nl) {
    require_mode(nl, Mode::Prox);
    require_channels(bank, nl);
    if (!classify(nl.profile()).nondecreasing) fail(ErrorCode::NotNondecreasing, "proximal profile must be nondecreasing");
    return prox_grad_step(z, problem, bank, [&nl](std::size_t i, double v) { return nl(i, v); });
}

struct ProxGradRun {
    std::vector<Signal> z;
    Signal x;
    /// RMS of z_{k+1} - z_k over all channel entries, one entry per step.
    std::vector<double> residual_trace;
    std::size_t iterations = 0;
    bool converged = false;
};

namespace detail {

inline double stack_rms_change(const std::vector<Signal>& a, const std::vector<Signal>& b) {
    double s = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t k = 0; k < a[i].size(); ++k) {
            const double d = a[i].data[k] - b[i].data[k];
            s += d * d;
        }
        count += a[i].size();
    }
    return count ? std::sqrt(s / static_cast<double>(count)) : 0.0;
}

} // namespace detail

/// Runs prox_grad_step from z0 = W H^T y until the fixed-point residual drops
/// below tol or iters steps are taken.
inline ProxGradRun run_prox_grad(const InverseProblem& problem, const FilterBank& bank, const ChannelMap& f,
                                 std::size_t iters, double tol) {
    ProxGradRun run;
    run.z = bank.analysis(problem.h.adjoint(problem.y));
    for (std::size_t k = 0; k < iters; ++k) {
        std::vector<Signal> next = prox_grad_step(run.z, problem, bank, f);
        const double residual = detail::stack_rms_change(next, run.z);
        run.z = std::move(next);
        run.residual_trace.push_back(residual);
        run.iterations = k + 1;
        if (residual <= tol) {
            run.converged = true;
            break;
        }
    }
    run.x = bank.synthesis(run.z);
    return run;
}

inline ProxGradRun run_prox_grad(const InverseProblem& problem, const FilterBank& bank, const ChannelNonlinearity& nl,
                                 std::size_t iters, double tol) {
    require_mode(nl, Mode::Prox);
    require_channels(bank, nl);
    return run_prox_grad(problem, bank, [&nl](std::size_t i, double v) { return nl(i, v); }, iters, tol);
}

} // namespace splinetool::recon
