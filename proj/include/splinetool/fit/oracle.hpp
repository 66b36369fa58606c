#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "splinetool/fit/problem.hpp"
#include "splinetool/slope_constraints.hpp"

namespace splinetool {

/// Reference solver for small fitting problems, structurally independent of
/// fit(). It works in the (offset, segment slopes) coordinates, where the box
/// is separable:
///
///   1. projected subgradient descent with diminishing normalized steps and
///      tail (Polyak) averaging;
///   2. exhaustive enumeration of active structures: slopes are split into runs
///      of equal value, each run is free or pinned to a finite bound, and each
///      jump between free runs takes a sign. Every structure gives an
///      equality-constrained least-squares problem solved in closed form
///      (pseudo-inverse); box-feasible candidates are scored with the true
///      objective.
///
/// The best candidate is returned. Enumeration is exact for the optimum
/// because some optimal solution is an extreme point of the optimal set, where
/// the reduced system is nonsingular (up to directions the objective ignores).
class FitOracle {
public:
    static constexpr std::size_t kMaxNodes = 12;
    static constexpr std::size_t kMaxData = 12;

    explicit FitOracle(const FitProblem& problem) : problem_(problem) {
        n_seg_ = problem.grid.size() - 1;
        n_data_ = problem.data.size();
        if (problem.grid.size() > kMaxNodes || n_data_ > kMaxData) {
            fail(ErrorCode::TooLarge, "oracle is limited to N <= 12 grid nodes and M <= 12 data points");
        }
        lever_.resize(n_data_, n_seg_);
        y_.resize(static_cast<Eigen::Index>(n_data_));
        for (std::size_t m = 0; m < n_data_; ++m) {
            y_(static_cast<Eigen::Index>(m)) = problem.data[m].y;
            for (std::size_t j = 0; j < n_seg_; ++j) {
                lever_(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = lever(j, problem.data[m].x);
            }
        }
    }

    /// Objective in (offset, slopes) coordinates.
    [[nodiscard]] double cost(double offset, const Eigen::VectorXd& s) const {
        const Eigen::VectorXd r = y_ - (lever_ * s).array().matrix() - Eigen::VectorXd::Constant(y_.size(), offset);
        double tv = 0.0;
        for (Eigen::Index j = 1; j < s.size(); ++j) tv += std::abs(s(j) - s(j - 1));
        return r.squaredNorm() + problem_.lambda * tv;
    }

    struct Candidate {
        double offset = 0.0;
        Eigen::VectorXd slopes;
        double value = kInf;
    };

    [[nodiscard]] Candidate subgradient(std::size_t budget) const {
        const SlopeBounds& box = problem_.bounds;
        const auto n = static_cast<Eigen::Index>(n_seg_);
        Eigen::VectorXd s(n);
        for (Eigen::Index j = 0; j < n; ++j) s(j) = box.clip(0.0);
        double c = y_.mean();
        Candidate best{c, s, cost(c, s)};

        Eigen::VectorXd avg_s = Eigen::VectorXd::Zero(n);
        double avg_c = 0.0;
        double avg_weight = 0.0;
        const double scale = 1.0 + y_.cwiseAbs().maxCoeff();
        Eigen::VectorXd grad_s(n);
        for (std::size_t k = 0; k < budget; ++k) {
            const Eigen::VectorXd r = y_ - lever_ * s - Eigen::VectorXd::Constant(y_.size(), c);
            const double grad_c = -2.0 * r.sum();
            grad_s = -2.0 * lever_.transpose() * r;
            for (Eigen::Index j = 1; j < n; ++j) {
                const double d = s(j) - s(j - 1);
                const double sg = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
                grad_s(j) += problem_.lambda * sg;
                grad_s(j - 1) -= problem_.lambda * sg;
            }
            const double gnorm = std::sqrt(grad_c * grad_c + grad_s.squaredNorm());
            if (gnorm == 0.0) break;
            const double step = scale / (gnorm * std::sqrt(static_cast<double>(k) + 1.0));
            c -= step * grad_c;
            s -= step * grad_s;
            for (Eigen::Index j = 0; j < n; ++j) s(j) = box.clip(s(j));

            const double v = cost(c, s);
            if (v < best.value) best = {c, s, v};
            if (2 * k >= budget) {
                avg_s += step * s;
                avg_c += step * c;
                avg_weight += step;
            }
        }
        if (avg_weight > 0.0) {
            const Eigen::VectorXd sa = avg_s / avg_weight;
            const double ca = avg_c / avg_weight;
            const double v = cost(ca, sa);
            if (v < best.value) best = {ca, sa, v};
        }
        return best;
    }

    [[nodiscard]] Candidate enumerate() const {
        Candidate best;
        best.slopes = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_seg_));
        const std::size_t n_boundaries = n_seg_ - 1;
        const std::vector<int> states = available_states();
        std::vector<std::size_t> start;
        std::vector<int> state;

        for (unsigned long mask = 0; mask < (1ul << n_boundaries); ++mask) {
            // Runs of equal slopes: a set bit starts a new run after slope j.
            start.assign(1, 0);
            for (std::size_t j = 0; j < n_boundaries; ++j)
                if (mask & (1ul << j)) start.push_back(j + 1);
            const std::size_t n_runs = start.size();

            std::size_t n_state_patterns = 1;
            for (std::size_t g = 0; g < n_runs; ++g) n_state_patterns *= states.size();
            state.assign(n_runs, 0);
            for (std::size_t code = 0; code < n_state_patterns; ++code) {
                std::size_t rest = code;
                bool valid = true;
                for (std::size_t g = 0; g < n_runs; ++g) {
                    state[g] = states[rest % states.size()];
                    rest /= states.size();
                    if (g > 0 && state[g] != kFree && state[g] == state[g - 1]) valid = false;
                }
                if (valid) solve_structure(start, state, best);
            }
        }
        return best;
    }

    [[nodiscard]] FitResult to_result(const Candidate& c, std::size_t iterations) const {
        const Grid& grid = problem_.grid;
        std::vector<double> f(grid.size());
        f[0] = c.offset;
        for (std::size_t j = 0; j < n_seg_; ++j) f[j + 1] = f[j] + c.slopes(static_cast<Eigen::Index>(j)) * grid.spacing(j);
        return make_result(problem_, NodalSpline(grid, std::move(f)), 0.0, iterations, true);
    }

private:
    static constexpr int kFree = 0;
    static constexpr int kLower = 1;
    static constexpr int kUpper = 2;

    // Contribution of segment j's slope to f(x) - f(t_0).
    [[nodiscard]] double lever(std::size_t j, double x) const {
        const Grid& t = problem_.grid;
        const double lo = j == 0 ? -kInf : t[j];
        const double hi = j + 1 == n_seg_ ? kInf : t[j + 1];
        return std::clamp(x, lo, hi) - t[j];
    }

    [[nodiscard]] std::vector<int> available_states() const {
        std::vector<int> s{kFree};
        if (problem_.bounds.has_lower()) s.push_back(kLower);
        if (problem_.bounds.has_upper()) s.push_back(kUpper);
        return s;
    }

    void solve_structure(const std::vector<std::size_t>& start, const std::vector<int>& state, Candidate& best) const {
        const std::size_t n_runs = start.size();
        const auto m = static_cast<Eigen::Index>(n_data_);
        std::vector<Eigen::Index> var(n_runs, -1);
        Eigen::Index n_free = 0;
        for (std::size_t g = 0; g < n_runs; ++g)
            if (state[g] == kFree) var[g] = 1 + n_free++;

        // Columns: offset, then one per free run. Pinned runs move to the right-hand side.
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, 1 + n_free);
        a.col(0).setOnes();
        Eigen::VectorXd rhs = y_;
        for (std::size_t g = 0; g < n_runs; ++g) {
            const std::size_t end = g + 1 < n_runs ? start[g + 1] : n_seg_;
            Eigen::VectorXd col = Eigen::VectorXd::Zero(m);
            for (std::size_t j = start[g]; j < end; ++j) col += lever_.col(static_cast<Eigen::Index>(j));
            if (state[g] == kFree) a.col(var[g]) = col;
            else rhs -= pinned_value(state[g]) * col;
        }
        const Eigen::MatrixXd q = a.transpose() * a;
        const Eigen::VectorXd atr = a.transpose() * rhs;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
        const Eigen::VectorXd& ev = eig.eigenvalues();
        const double cutoff = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());

        // Jumps between two free runs carry a sign; every other jump sign is
        // implied by the pinned side.
        std::vector<std::size_t> free_pairs;
        for (std::size_t g = 1; g < n_runs; ++g)
            if (state[g] == kFree && state[g - 1] == kFree) free_pairs.push_back(g);

        Eigen::VectorXd lin(1 + n_free);
        Eigen::VectorXd theta(1 + n_free);
        Eigen::VectorXd s(static_cast<Eigen::Index>(n_seg_));
        for (unsigned long signs = 0; signs < (1ul << free_pairs.size()); ++signs) {
            lin.setZero();
            std::size_t pair = 0;
            for (std::size_t g = 1; g < n_runs; ++g) {
                double sigma;
                if (state[g] == kFree && state[g - 1] == kFree) {
                    sigma = (signs & (1ul << pair++)) ? 1.0 : -1.0;
                } else {
                    sigma = jump_sign(state[g - 1], state[g]);
                }
                // lambda * sigma * (s_g - s_{g-1})
                if (var[g] >= 0) lin(var[g]) += sigma;
                if (var[g - 1] >= 0) lin(var[g - 1]) -= sigma;
            }
            const Eigen::VectorXd b = atr - 0.5 * problem_.lambda * lin;
            theta.setZero();
            for (Eigen::Index i = 0; i < ev.size(); ++i) {
                if (ev(i) > cutoff) theta += eig.eigenvectors().col(i) * (eig.eigenvectors().col(i).dot(b) / ev(i));
            }

            bool feasible = true;
            for (std::size_t g = 0; g < n_runs && feasible; ++g) {
                double value = state[g] == kFree ? theta(var[g]) : pinned_value(state[g]);
                if (problem_.bounds.violation(value) > 1e-9) feasible = false;
                value = problem_.bounds.clip(value);
                const std::size_t end = g + 1 < n_runs ? start[g + 1] : n_seg_;
                for (std::size_t j = start[g]; j < end; ++j) s(static_cast<Eigen::Index>(j)) = value;
            }
            if (!feasible) continue;
            // Re-optimize the offset for the (possibly clipped) slopes.
            const double offset = (y_ - lever_ * s).mean();
            const double v = cost(offset, s);
            if (v < best.value) best = {offset, s, v};
        }
    }

    [[nodiscard]] double pinned_value(int state) const {
        return state == kLower ? problem_.bounds.lower() : problem_.bounds.upper();
    }

    static double jump_sign(int left, int right) {
        if (left == kLower || right == kUpper) return 1.0;
        return -1.0;
    }

    const FitProblem& problem_;
    std::size_t n_seg_ = 0;
    std::size_t n_data_ = 0;
    Eigen::MatrixXd lever_;
    Eigen::VectorXd y_;
};

/// Independent reference solution of a small fitting problem (N, M <= 12).
inline FitResult oracle_fit(const FitProblem& problem, std::size_t budget = 20000) {
    const FitOracle oracle(problem);
    FitOracle::Candidate best = oracle.subgradient(budget);
    const FitOracle::Candidate exact = oracle.enumerate();
    if (exact.value < best.value) best = exact;
    return oracle.to_result(best, budget);
}

} // namespace splinetool
