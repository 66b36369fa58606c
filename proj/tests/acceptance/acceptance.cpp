// Acceptance runner: one PASS/FAIL line per criterion with its runtime and
// limit. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "splinetool/fit/oracle.hpp"
#include "splinetool/fit/solver.hpp"
#include "splinetool/potentials.hpp"
#include "splinetool/recon/descent.hpp"
#include "splinetool/recon/parallel.hpp"
#include "splinetool/recon/prox_grad.hpp"
#include "splinetool/recon/training.hpp"
#include "splinetool/slope_constraints.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace splinetool;
using namespace splinetool::recon;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> body;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

NodalSpline uniform_profile(std::size_t nodes, double lo, double hi, const std::function<double(double)>& f) {
    std::vector<double> t(nodes), v(nodes);
    for (std::size_t n = 0; n < nodes; ++n) {
        t[n] = lo + (hi - lo) * static_cast<double>(n) / static_cast<double>(nodes - 1);
        v[n] = f(t[n]);
    }
    return NodalSpline::make(std::move(t), std::move(v));
}

std::vector<TrainingPair> block_pairs(std::size_t count, std::size_t side, double sigma, std::mt19937_64& rng) {
    std::vector<TrainingPair> out;
    for (std::size_t k = 0; k < count; ++k) {
        Signal clean = random_blocks_image(side, side, rng);
        Signal noisy = add_gaussian_noise(clean, sigma, rng);
        out.push_back({std::move(clean), std::move(noisy)});
    }
    return out;
}

// ---- 1

Outcome soft_threshold_golden() {
    const NodalSpline st = canonical_interpolant({{-2, -1}, {-1, 0}, {1, 0}, {2, 1}});
    const PwQuadPotential phi = potential_from_prox(st);
    Outcome o;
    const std::vector<QuadPiece> expected{{0.0, -1.0, 0.0}, {0.0, 1.0, 0.0}};
    double err = 0.0;
    if (phi.breakpoints() != std::vector<double>{0.0} || phi.pieces().size() != 2) {
        return {false, "unexpected piece structure"};
    }
    for (std::size_t k = 0; k < 2; ++k) {
        err = std::max({err, std::abs(phi.pieces()[k].c - expected[k].c), std::abs(phi.pieces()[k].b - expected[k].b),
                        std::abs(phi.pieces()[k].a - expected[k].a)});
    }
    const PwlCurve rw = reweight_prox(to_curve(st), 2.0);
    const PwlCurve want = PwlCurve::make({{-3, -1}, {-2, 0}, {2, 0}, {3, 1}});
    o.pass = err <= 1e-12 && rw == want;
    o.detail = "max piece coefficient error " + fmt(err) + ", reweighted points " + (rw == want ? "exact" : "differ");
    return o;
}

// ---- 2

Outcome prox_round_trip() {
    constexpr std::size_t kSplines = 200, kPoints = 50;
    std::vector<double> worst(kSplines, 0.0);
    parallel_for(kSplines, worker_count(kSplines), [&](std::size_t s) {
        testsupport::Rng rng(1000 + s);
        const NodalSpline sp = testsupport::random_nondecreasing(rng, testsupport::uniform_index(rng, 2, 10), 3.0);
        const PwQuadPotential phi = potential_from_prox(sp);
        const double lo = sp.grid().front() - 1.0, hi = sp.grid().back() + 1.0;
        for (std::size_t k = 0; k < kPoints; ++k) {
            const double x = testsupport::uniform(rng, lo, hi);
            worst[s] = std::max(worst[s], std::abs(numeric_prox_oracle(phi, x) - sp(x)));
        }
    });
    const double err = *std::max_element(worst.begin(), worst.end());
    return {err <= 2e-4, "max |oracle - spline| = " + fmt(err) + " over 10000 points (tol 2e-4)"};
}

// ---- 3

FitProblem random_problem(testsupport::Rng& rng) {
    const std::size_t n = testsupport::uniform_index(rng, 2, 8);
    const std::size_t m = testsupport::uniform_index(rng, 1, 6);
    const Grid grid = testsupport::random_grid(rng, n, 0.3, 1.5);
    const double span = grid.back() - grid.front();
    std::vector<double> xs;
    for (std::size_t k = 0; k < m; ++k) xs.push_back(grid.front() + testsupport::uniform(rng, 0, 1) * span);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::vector<Point> data;
    for (double x : xs) data.push_back({x, testsupport::uniform(rng, -2, 2)});
    const double lambdas[] = {0.0, 0.1, 1.0, 10.0};
    return FitProblem::make(std::move(data), grid, lambdas[testsupport::uniform_index(rng, 0, 3)],
                            testsupport::random_bounds(rng, 1.5));
}

Outcome solver_vs_oracle() {
    constexpr std::size_t kProblems = 100;
    std::vector<double> gap(kProblems, 0.0), violation(kProblems, 0.0);
    std::vector<FitProblem> problems;
    testsupport::Rng rng(2024);
    for (std::size_t k = 0; k < kProblems; ++k) problems.push_back(random_problem(rng));
    parallel_for(kProblems, worker_count(kProblems), [&](std::size_t k) {
        const FitResult r = fit(problems[k]);
        const FitResult o = oracle_fit(problems[k]);
        gap[k] = (r.objective - o.objective) / (1.0 + std::abs(o.objective));
        violation[k] = r.max_slope_violation;
    });
    const double worst = *std::max_element(gap.begin(), gap.end());
    const double best = *std::min_element(gap.begin(), gap.end());
    const double viol = *std::max_element(violation.begin(), violation.end());
    return {worst <= 1e-6 && viol <= 1e-12, "max gap (fit - oracle)/(1 + |oracle|) = " + fmt(worst) +
                                                 ", min gap " + fmt(best) + ", max slope violation " + fmt(viol)};
}

// ---- 4

Outcome projector_algebra() {
    testsupport::Rng rng(4);
    double idem = 0.0, mean_err = 0.0, feas = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const NodalSpline sp = testsupport::random_spline(rng, testsupport::uniform_index(rng, 2, 20));
        const SlopeBounds b = testsupport::random_bounds(rng);
        const NodalSpline p = project_slopes(sp, b);
        const NodalSpline pp = project_slopes(p, b);
        for (std::size_t n = 0; n < p.size(); ++n) idem = std::max(idem, std::abs(pp.value(n) - p.value(n)));
        mean_err = std::max(mean_err, std::abs(mean(p.values()) - mean(sp.values())));
        feas = std::max(feas, max_slope_violation(p, b));
    }
    return {idem <= 1e-12 && mean_err <= 1e-12 && feas <= 1e-12,
            "idempotence " + fmt(idem) + ", mean shift " + fmt(mean_err) + ", slope violation " + fmt(feas)};
}

// ---- 5

Outcome tv2_consistency() {
    testsupport::Rng rng(5);
    double err = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const NodalSpline sp = testsupport::random_spline(rng, testsupport::uniform_index(rng, 2, 20));
        err = std::max(err, std::abs(tv2(sp) - to_relu_form(sp).l1_norm()));
    }
    // Affine splines on dyadic grids, where every slope is computed exactly.
    double affine = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = testsupport::uniform_index(rng, 2, 20);
        std::vector<double> t{static_cast<double>(testsupport::uniform_index(rng, 0, 64)) / 16.0 - 2.0};
        for (std::size_t k = 1; k < n; ++k) t.push_back(t.back() + static_cast<double>(testsupport::uniform_index(rng, 1, 16)) / 16.0);
        const double a = static_cast<double>(testsupport::uniform_index(rng, 0, 64)) / 16.0 - 2.0;
        const double b = static_cast<double>(testsupport::uniform_index(rng, 0, 64)) / 16.0 - 2.0;
        std::vector<double> f;
        for (double x : t) f.push_back(a + b * x);
        affine = std::max(affine, tv2(NodalSpline::make(t, f)));
    }
    return {err <= 1e-12 && affine == 0.0, "max |tv2 - ||a||_1| = " + fmt(err) + ", max tv2 of affine = " + fmt(affine)};
}

// ---- 6

Outcome lipschitz_saturation() {
    testsupport::Rng rng(6);
    double saturation = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = testsupport::uniform_index(rng, 3, 15);
        std::vector<double> s(n - 1);
        const bool increasing = testsupport::uniform(rng, 0, 1) < 0.5;
        s[0] = testsupport::uniform(rng, 0, 1);
        for (std::size_t k = 1; k < s.size(); ++k) s[k] = s[k - 1] + testsupport::uniform(rng, 0, 1);
        // monotone and convex: nondecreasing slopes of one sign
        if (!increasing) {
            for (double& v : s) v -= s.back();
        }
        const NodalSpline sp = testsupport::spline_from_segment_slopes(testsupport::random_grid(rng, n), s,
                                                                       testsupport::uniform(rng, -1, 1));
        saturation = std::max(saturation, std::abs(lipschitz(sp) - (tv2(sp) + min_abs_slope(sp))));
    }
    double min_slack = kInf;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = testsupport::uniform_index(rng, 3, 15);
        std::vector<double> s(n - 1);
        for (double& v : s) v = testsupport::uniform(rng, -3, 3);
        const std::size_t up = testsupport::uniform_index(rng, 0, n - 2);
        std::size_t down = testsupport::uniform_index(rng, 0, n - 3);
        if (down >= up) ++down;
        s[up] = testsupport::uniform(rng, 0.1, 3);
        s[down] = -testsupport::uniform(rng, 0.1, 3);
        const NodalSpline sp = testsupport::spline_from_segment_slopes(testsupport::random_grid(rng, n), s, 0.0);
        min_slack = std::min(min_slack, tv2(sp) + min_abs_slope(sp) - lipschitz(sp));
    }
    return {saturation <= 1e-12 && min_slack > 0.0,
            "monotone-convex |Lip - (tv2 + min|s|)| <= " + fmt(saturation) + ", non-monotone min slack " + fmt(min_slack)};
}

// ---- 7

Outcome lambda_path() {
    const std::vector<Point> data{{0, 0}, {1, 2}, {2, 1}, {3, 3}, {4, 0.5}, {5, 2.5}};
    const SlopeBounds bounds(-1.5, 0.25);
    double previous = kInf;
    bool monotone = true;
    std::ostringstream trace;
    std::optional<FitResult> last;
    for (double lambda : {0.01, 0.1, 1.0, 10.0, 100.0, 1e8}) {
        last = fit(FitProblem::make(data, std::nullopt, lambda, bounds));
        if (last->reg_term > previous + 1e-9) monotone = false;
        previous = last->reg_term;
        trace << fmt(last->reg_term) << " ";
    }
    const auto [c0, c1] = testsupport::clipped_affine_regression(data, bounds);
    double err = 0.0;
    for (std::size_t n = 0; n < last->spline.size(); ++n) {
        const double x = last->spline.grid()[n];
        err = std::max(err, std::abs(last->spline.value(n) - (c0 + c1 * x)));
    }
    return {monotone && err <= 1e-4 && last->reg_term <= 1e-6,
            "reg_term path " + trace.str() + "; clipped slope " + fmt(c1) + ", max deviation from clipped affine fit " + fmt(err)};
}

// ---- 8

Outcome unrolled_gradient() {
    std::mt19937_64 rng(8);
    const std::vector<TrainingPair> data = block_pairs(3, 8, 0.2, rng);
    const NodalSpline psi = uniform_profile(21, -1.5, 1.5, [](double z) { return 0.3 * std::tanh(3 * z) + 0.1 * z; });
    const Architecture arch{finite_difference_bank(8, 8), ChannelNonlinearity(psi, {1.0, 1.4}, Mode::Derivative), 3, 0.3};
    constexpr double kTv2 = 1e-3;
    const Gradient g = loss_and_gradient(data, arch, kTv2);

    constexpr double h = 1e-6;
    double worst = 0.0;
    std::size_t coords = 0;
    const auto check = [&](double analytic, const std::function<double(double)>& loss_at, double base) {
        const double fd = (loss_at(base + h) - loss_at(base - h)) / (2 * h);
        const double rel = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-6});
        worst = std::max(worst, rel);
        ++coords;
    };
    std::vector<double> f(psi.values().begin(), psi.values().end());
    for (std::size_t n = 0; n < f.size(); ++n) {
        check(g.profile[n], [&](double v) {
            std::vector<double> p = f;
            p[n] = v;
            Architecture a = arch;
            a.nl = arch.nl.with_profile(NodalSpline(psi.grid(), p));
            return loss_and_gradient(data, a, kTv2).loss;
        }, f[n]);
    }
    for (std::size_t i = 0; i < 2; ++i) {
        check(g.alphas[i], [&](double v) {
            std::vector<double> al = arch.nl.alphas();
            al[i] = v;
            Architecture a = arch;
            a.nl = arch.nl.with_alphas(al);
            return loss_and_gradient(data, a, kTv2).loss;
        }, arch.nl.alphas()[i]);
    }
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t t = 0; t < arch.bank.kernels()[i].taps.size(); ++t) {
            check(g.taps[i][t], [&](double v) {
                std::vector<Kernel> k = arch.bank.kernels();
                k[i].taps[t] = v;
                Architecture a = arch;
                a.bank = arch.bank.with_kernels(k);
                return loss_and_gradient(data, a, kTv2).loss;
            }, arch.bank.kernels()[i].taps[t]);
        }
    }
    return {worst <= 1e-4, std::to_string(coords) + " coordinates, max relative error " + fmt(worst)};
}

// ---- 9

Outcome descent_property() {
    std::mt19937_64 rng(9);
    // Learn a monotone (hence convex-potential) profile on small images first.
    const std::vector<TrainingPair> train = block_pairs(4, 16, 0.1, rng);
    const FilterBank small = finite_difference_bank(16, 16);
    const NodalSpline psi0 = uniform_profile(21, -1.0, 1.0, [](double z) { return 0.5 * z; });
    Architecture arch{small, ChannelNonlinearity::uniform(psi0, 2, Mode::Derivative), 3, 0.0};
    arch.step = stable_step(arch.bank, arch.nl);
    TrainOptions opts;
    opts.step = 2e-3;
    opts.epochs = 5;
    opts.bounds = SlopeBounds::monotone();
    const TrainResult trained = train_unrolled(train, arch, opts);
    const ChannelNonlinearity& nl = trained.arch.nl;
    if (potential_from_derivative(nl.profile()).convexity().kind == ConvexityKind::Weak) {
        return {false, "learned potential is not convex"};
    }

    const FilterBank bank(trained.arch.bank.kernels(), Boundary::Circular, 32, 32);
    const double step = stable_step(bank, nl);
    std::size_t increases = 0, steps = 0;
    for (int img = 0; img < 10; ++img) {
        const Signal clean = random_blocks_image(32, 32, rng);
        const Signal noisy = add_gaussian_noise(clean, 0.1, rng);
        const DescentRun run = run_steepest_descent(InverseProblem::denoising(noisy, step), bank, nl, 500, 1e-13);
        for (std::size_t k = 1; k < run.objective_trace.size(); ++k) {
            ++steps;
            if (run.objective_trace[k] > run.objective_trace[k - 1]) ++increases;
        }
    }

    // Prox-gradient fixed-point residual on H = I problems.
    const FilterBank pbank = finite_difference_bank(32, 32).normalized();
    const NodalSpline st = NodalSpline::make({-1.05, -0.05, 0.05, 1.05}, {-1, 0, 0, 1});
    const ChannelNonlinearity pnl = ChannelNonlinearity::uniform(st, pbank.channels(), Mode::Prox);
    std::size_t converged = 0, max_iters = 0;
    double worst_residual = 0.0;
    for (int img = 0; img < 10; ++img) {
        const Signal noisy = add_gaussian_noise(random_blocks_image(32, 32, rng), 0.1, rng);
        const ProxGradRun run = run_prox_grad(InverseProblem::denoising(noisy), pbank, pnl, 10000, 1e-8);
        if (run.converged) ++converged;
        max_iters = std::max(max_iters, run.iterations);
        worst_residual = std::max(worst_residual, run.residual_trace.back());
    }
    return {increases == 0 && converged == 10,
            "descent: " + std::to_string(increases) + " increases in " + std::to_string(steps) +
                " steps; prox-grad: " + std::to_string(converged) + "/10 below 1e-8, max iterations " +
                std::to_string(max_iters) + ", worst final residual " + fmt(worst_residual)};
}

// ---- 10

Outcome noise_level_transfer() {
    constexpr double sigma1 = 0.1, sigma2 = 0.2;
    const double lambda = sigma2 * sigma2 / (sigma1 * sigma1);
    std::mt19937_64 rng(10);

    // Pointwise prox-mode denoiser learned at sigma1.
    const std::vector<TrainingPair> train = block_pairs(4, 16, sigma1, rng);
    const NodalSpline psi0 = uniform_profile(21, -0.5, 1.5, [](double z) { return z; });
    const Architecture arch{identity_bank(16, 16), ChannelNonlinearity::uniform(psi0, 1, Mode::Prox), 2, 1.0};
    TrainOptions opts;
    opts.step = 5e-3;
    opts.epochs = 20;
    opts.bounds = SlopeBounds(0.01, 1.0);
    const TrainResult trained = train_unrolled(train, arch, opts);
    const NodalSpline& psi = trained.arch.nl.profile();

    const PwQuadPotential scaled = scale(potential_from_prox(psi), lambda);
    const NodalSpline reweighted = canonical_interpolant(reweight_prox(to_curve(psi), lambda));

    const Signal noisy = add_gaussian_noise(random_blocks_image(32, 32, rng), sigma2, rng);
    const InverseProblem problem = InverseProblem::denoising(noisy);
    const FilterBank bank = identity_bank(32, 32);
    const ProxGradRun a =
        run_prox_grad(problem, bank, ChannelNonlinearity::uniform(reweighted, 1, Mode::Prox), 100, 1e-14);
    const ProxGradRun b = run_prox_grad(
        problem, bank, [&](std::size_t, double v) { return numeric_prox_oracle(scaled, v); }, 100, 1e-14);
    double err = 0.0;
    for (std::size_t k = 0; k < noisy.size(); ++k) err = std::max(err, std::abs(a.x.data[k] - b.x.data[k]));
    const double loss_drop = trained.loss_per_epoch.front() - trained.final_loss;
    return {err <= 2e-4 && loss_drop > 0.0, "lambda " + fmt(lambda) + ", max entrywise difference " + fmt(err) +
                                                ", training loss " + fmt(trained.loss_per_epoch.front()) + " -> " +
                                                fmt(trained.final_loss)};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "soft-threshold golden case", 1.0, soft_threshold_golden},
        {2, "prox round trip", 60.0, prox_round_trip},
        {3, "solver vs oracle", 300.0, solver_vs_oracle},
        {4, "projector algebra", 10.0, projector_algebra},
        {5, "TV2 consistency", 10.0, tv2_consistency},
        {6, "Lipschitz saturation", 10.0, lipschitz_saturation},
        {7, "lambda path", 30.0, lambda_path},
        {8, "unrolled gradient check", 120.0, unrolled_gradient},
        {9, "descent property", 120.0, descent_property},
        {10, "noise-level transfer", 60.0, noise_level_transfer},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds < c.limit_seconds;
        const bool pass = o.pass && in_time;
        if (!pass) ++failures;
        std::printf("%s [%2d] %-28s %8.3f s (limit %5.0f s%s)  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, seconds,
                    c.limit_seconds, in_time ? "" : ", exceeded", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
