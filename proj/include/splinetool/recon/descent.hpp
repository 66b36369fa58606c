#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "splinetool/error.hpp"
#include "splinetool/potentials.hpp"
#include "splinetool/recon/filter_bank.hpp"
#include "splinetool/recon/nonlinearity.hpp"
#include "splinetool/recon/operators.hpp"
#include "splinetool/recon/signal.hpp"

namespace splinetool::recon {

inline void require_mode(const ChannelNonlinearity& nl, Mode mode) {
    if (nl.mode() != mode) {
        fail(ErrorCode::ModeMismatch, std::string("nonlinearity is in ") + to_string(nl.mode()) + " mode, expected " +
                                          to_string(mode));
    }
}

inline void require_channels(const FilterBank& bank, const ChannelNonlinearity& nl) {
    if (bank.channels() != nl.channels()) {
        fail(ErrorCode::ShapeMismatch, "bank has " + std::to_string(bank.channels()) + " channels but the nonlinearity has " +
                                           std::to_string(nl.channels()));
    }
}

/// x - gamma * (sum_i W_i^T psi_i(W_i x) + H^T (H x - y))
inline Signal steepest_descent_step(const Signal& x, const InverseProblem& problem, const FilterBank& bank,
                                    const ChannelNonlinearity& nl) {
    require_mode(nl, Mode::Derivative);
    require_channels(bank, nl);
    Signal grad = problem.h.adjoint(difference(problem.h.apply(x), problem.y));
    for (std::size_t i = 0; i < bank.channels(); ++i) {
        Signal u = bank.apply(i, x);
        for (double& v : u.data) v = nl(i, v);
        axpy(grad, 1.0, bank.adjoint(i, u));
    }
    Signal out = x;
    axpy(out, -problem.gamma, grad);
    return out;
}

/// 0.5 ||y - H x||^2 + sum_i sum_p phi(alpha_i (W_i x)_p) / alpha_i^2, with
/// phi' = psi.
inline double variational_objective(const Signal& x, const InverseProblem& problem, const FilterBank& bank,
                                    const ChannelNonlinearity& nl, const PwQuadPotential& phi) {
    double total = 0.5 * squared_norm(difference(problem.y, problem.h.apply(x)));
    for (std::size_t i = 0; i < bank.channels(); ++i) {
        const double a = nl.alphas()[i];
        const Signal u = bank.apply(i, x);
        double channel = 0.0;
        for (double v : u.data) channel += phi(a * v);
        total += channel / (a * a);
    }
    return total;
}

struct DescentRun {
    Signal x;
    std::vector<double> objective_trace; ///< entry 0 is the objective at the start point
    std::size_t iterations = 0;
    bool converged = false;
    /// Set when the potential is weakly convex with rho * ||W||^2 >= 1, where
    /// the objective may be nonconvex and descent is not guaranteed.
    bool weak_convexity_warning = false;
};

/// Iterates steepest_descent_step from x0 (default H^T y) until the relative
/// objective change drops below tol or iters steps are taken.
inline DescentRun run_steepest_descent(const InverseProblem& problem, const FilterBank& bank,
                                       const ChannelNonlinearity& nl, std::size_t iters, double tol,
                                       std::optional<Signal> x0 = std::nullopt) {
    require_mode(nl, Mode::Derivative);
    require_channels(bank, nl);
    const PwQuadPotential phi = potential_from_derivative(nl.profile());
    DescentRun run;
    const double alpha_max = *std::max_element(nl.alphas().begin(), nl.alphas().end());
    const double rho = phi.convexity().rho_weak() * alpha_max;
    run.weak_convexity_warning = rho > 0.0 && rho * bank.norm_bound() * bank.norm_bound() >= 1.0;

    run.x = x0 ? std::move(*x0) : problem.h.adjoint(problem.y);
    double previous = variational_objective(run.x, problem, bank, nl, phi);
    run.objective_trace.push_back(previous);
    for (std::size_t k = 0; k < iters; ++k) {
        run.x = steepest_descent_step(run.x, problem, bank, nl);
        const double current = variational_objective(run.x, problem, bank, nl, phi);
        run.objective_trace.push_back(current);
        run.iterations = k + 1;
        if (std::abs(previous - current) <= tol * std::max(1.0, std::abs(previous))) {
            run.converged = true;
            break;
        }
        previous = current;
    }
    return run;
}

} // namespace splinetool::recon
