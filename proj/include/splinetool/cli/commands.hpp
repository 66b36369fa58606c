#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "splinetool/error.hpp"
#include "splinetool/fit/problem.hpp"
#include "splinetool/fit/solver.hpp"
#include "splinetool/io/json.hpp"
#include "splinetool/io/signal_io.hpp"
#include "splinetool/potentials.hpp"
#include "splinetool/recon/descent.hpp"
#include "splinetool/recon/metrics.hpp"
#include "splinetool/recon/operators.hpp"
#include "splinetool/recon/prox_grad.hpp"
#include "splinetool/recon/training.hpp"
#include "splinetool/slope_constraints.hpp"

namespace splinetool::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 2,
    kNotConverged = 3,
    kPrecondition = 4,
    kScale = 5,
};

inline int exit_code(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::DidNotConverge: return kNotConverged;
    case ErrorCode::NotNondecreasing:
    case ErrorCode::LambdaOutOfRange:
    case ErrorCode::WeakConvexityTooLarge:
    case ErrorCode::DegenerateBoundary:
    case ErrorCode::ModeMismatch:
    case ErrorCode::NotMonotone: return kPrecondition;
    case ErrorCode::ScaleTooLarge:
    case ErrorCode::TooLarge: return kScale;
    default: return kInputError;
    }
}

/// Flags shared by the subcommands; each one reads what it needs.
struct Options {
    std::string input;
    std::string data;
    std::string output;
    std::string plot_csv;
    std::string mode = "derivative";
    std::string smin_text;
    std::string smax_text;
    double lambda = 1.0;
    double tol = 0.0;
    std::size_t max_iters = 0;
    std::uint64_t seed = 0;
    std::vector<double> xs;
    double halfwidth = 0.0;
    double grid_step = kDefaultProxGridStep;

    bool has_lambda = false;
    bool has_tol = false;
    bool has_max_iters = false;
    bool has_halfwidth = false;
};

namespace detail {

inline double parse_bound(const std::string& text, const char* flag) {
    if (text == "inf" || text == "+inf") return kInf;
    if (text == "-inf") return -kInf;
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorCode::ParseError, std::string(flag) + ": expected a number, \"-inf\" or \"+inf\", got '" + text + "'");
}

/// Bounds from the file value, overridden by --smin / --smax.
inline SlopeBounds merge_bounds(const SlopeBounds& base, const Options& o) {
    const double lo = o.smin_text.empty() ? base.lower() : parse_bound(o.smin_text, "--smin");
    const double hi = o.smax_text.empty() ? base.upper() : parse_bound(o.smax_text, "--smax");
    return SlopeBounds(lo, hi);
}

inline std::string resolve(const std::filesystem::path& base_dir, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (base_dir / path).string();
}

inline std::filesystem::path dir_of(const std::string& file) {
    const auto parent = std::filesystem::path(file).parent_path();
    return parent.empty() ? std::filesystem::path(".") : parent;
}

inline void emit(const Options& o, const std::string& text, std::ostream& out) {
    if (o.output.empty() || o.output == "-") out << text;
    else io::write_text_file(o.output, text);
}

// A spline given as {"t","f"} or a curve given as {"points"}.
inline PwlCurve curve_input(const io::Json& j) {
    if (j.is_object() && j.contains("points")) return io::curve_from_json(j, "curve");
    return to_curve(io::spline_from_json(j, "spline"));
}

// "model" holds either the bundle itself or a path to it.
inline io::ModelBundle model_field(const io::Json& config, const std::filesystem::path& base_dir) {
    const io::Json& m = io::require(config, "model", "config");
    if (m.is_string()) return io::model_from_json(io::read_json_file(resolve(base_dir, m.get<std::string>())), "model");
    return io::model_from_json(m, "config.model");
}

inline double number_field(const io::Json& j, const char* key, double fallback, const std::string& path) {
    const auto it = j.find(key);
    return it == j.end() || it->is_null() ? fallback : io::get_finite(*it, path + "." + key);
}

inline std::size_t count_field(const io::Json& j, const char* key, std::size_t fallback, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_number_unsigned()) io::parse_fail(path + "." + key, "expected a nonnegative integer");
    return it->get<std::size_t>();
}

inline bool bool_field(const io::Json& j, const char* key, bool fallback, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_boolean()) io::parse_fail(path + "." + key, "expected a boolean");
    return it->get<bool>();
}

struct Reconstruction {
    recon::Signal x;
    std::vector<double> trace; ///< objective values (derivative mode) or fixed-point residuals (prox mode)
    bool converged = false;
    bool weak_convexity_warning = false;
};

struct ReconSettings {
    std::size_t iters = 500;
    double tol = 1e-8;
    std::optional<double> step; ///< descent step; default is the guaranteed-descent step
};

inline ReconSettings recon_settings(const io::Json& config, const Options& o) {
    ReconSettings s;
    s.iters = count_field(config, "iters", s.iters, "config");
    s.tol = number_field(config, "tol", s.tol, "config");
    if (config.contains("step") && !config["step"].is_null()) s.step = io::get_finite(config["step"], "config.step");
    if (o.has_max_iters) s.iters = o.max_iters;
    if (o.has_tol) s.tol = o.tol;
    if (!(s.tol >= 0.0)) io::parse_fail("config.tol", "must be nonnegative");
    return s;
}

/// Denoising (H = I): steepest descent in derivative mode, proximal gradient in prox mode.
inline Reconstruction reconstruct(const recon::Signal& y, const io::ModelBundle& model, const ReconSettings& s) {
    const recon::FilterBank bank = model.bind(y.rows, y.cols);
    const recon::ChannelNonlinearity nl = model.nonlinearity();
    Reconstruction out;
    if (nl.mode() == recon::Mode::Derivative) {
        const double step = s.step ? *s.step : recon::stable_step(bank, nl);
        const recon::DescentRun run =
            recon::run_steepest_descent(recon::InverseProblem::denoising(y, step), bank, nl, s.iters, s.tol);
        out = {run.x, run.objective_trace, run.converged, run.weak_convexity_warning};
    } else {
        const recon::ProxGradRun run = recon::run_prox_grad(recon::InverseProblem::denoising(y), bank, nl, s.iters, s.tol);
        out = {run.x, run.residual_trace, run.converged, false};
    }
    return out;
}

} // namespace detail

// ---- fit

inline int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
    const io::Json j = io::read_json_file(o.input);
    io::ProblemSpec spec = io::problem_from_json(j, "problem");
    FitProblem& p = spec.problem;
    if (o.has_lambda) {
        if (!(o.lambda >= 0.0) || !std::isfinite(o.lambda)) fail(ErrorCode::ParseError, "--lambda must be >= 0");
        p.lambda = o.lambda;
    }
    p.bounds = detail::merge_bounds(p.bounds, o);
    if (o.has_tol) spec.solver.tol = o.tol;
    if (o.has_max_iters) spec.solver.max_iters = o.max_iters;

    int code = kOk;
    std::optional<FitResult> result;
    try {
        result = fit(p, spec.solver);
    } catch (const DidNotConverge& e) {
        result = e.result();
        err << e.what() << "\n";
        code = kNotConverged;
    }
    detail::emit(o, io::dump(io::to_json(*result)), out);

    if (!o.plot_csv.empty()) {
        const NodalSpline& sp = result->spline;
        std::string csv = "x,fitted,residual\n";
        constexpr std::size_t kSamples = 401;
        const double a = sp.grid().front(), b = sp.grid().back();
        std::vector<double> xs;
        for (std::size_t k = 0; k < kSamples; ++k) xs.push_back(a + (b - a) * static_cast<double>(k) / (kSamples - 1));
        for (const Point& d : p.data) xs.push_back(d.x);
        std::sort(xs.begin(), xs.end());
        std::size_t m = 0;
        for (double x : xs) {
            csv += io::format_double(x) + "," + io::format_double(sp(x)) + ",";
            if (m < p.data.size() && p.data[m].x == x) {
                csv += io::format_double(p.data[m].y - sp(x));
                ++m;
            }
            csv += "\n";
        }
        io::write_text_file(o.plot_csv, csv);
    }
    return code;
}

// ---- project

inline int cmd_project(const Options& o, std::ostream& out, std::ostream&) {
    const NodalSpline sp = io::spline_from_json(io::read_json_file(o.input), "spline");
    SlopeBounds bounds;
    if (!o.data.empty()) bounds = io::bounds_from_json(io::read_json_file(o.data), "bounds");
    bounds = detail::merge_bounds(bounds, o);
    detail::emit(o, io::dump(io::to_json(project_slopes(sp, bounds))), out);
    return kOk;
}

// ---- potential

inline int cmd_potential(const Options& o, std::ostream& out, std::ostream&) {
    const NodalSpline sp = io::spline_from_json(io::read_json_file(o.input), "spline");
    PwQuadPotential phi = o.mode == "prox" ? potential_from_prox(sp) : potential_from_derivative(sp);
    if (o.has_lambda) phi = scale(phi, o.lambda);
    detail::emit(o, io::dump(io::to_json(phi)), out);

    if (!o.plot_csv.empty()) {
        const double a = sp.grid().front(), b = sp.grid().back();
        const double pad = 0.25 * (b - a);
        std::string csv = "y,phi,dphi\n";
        constexpr std::size_t kSamples = 401;
        for (std::size_t k = 0; k < kSamples; ++k) {
            const double y = a - pad + (b - a + 2.0 * pad) * static_cast<double>(k) / (kSamples - 1);
            csv += io::format_double(y) + "," + io::format_double(phi(y)) + "," + io::format_double(phi.derivative(y)) + "\n";
        }
        io::write_text_file(o.plot_csv, csv);
    }
    return kOk;
}

// ---- prox-reweight

inline int cmd_prox_reweight(const Options& o, std::ostream& out, std::ostream&) {
    if (!o.has_lambda) fail(ErrorCode::ParseError, "--lambda is required");
    const PwlCurve prox = detail::curve_input(io::read_json_file(o.input));
    detail::emit(o, io::dump(io::to_json(reweight_prox(prox, o.lambda))), out);
    return kOk;
}

// ---- prox-oracle

inline int cmd_prox_oracle(const Options& o, std::ostream& out, std::ostream&) {
    PwQuadPotential phi = io::potential_from_json(io::read_json_file(o.input), "potential");
    if (o.has_lambda) phi = scale(phi, o.lambda);
    if (o.xs.empty()) fail(ErrorCode::ParseError, "--x: at least one evaluation point is required");
    io::Json xs = io::Json::array(), zs = io::Json::array();
    for (double x : o.xs) {
        const double hw = o.has_halfwidth ? o.halfwidth : default_prox_halfwidth(phi, x);
        xs.push_back(x);
        zs.push_back(numeric_prox_oracle(phi, x, hw, o.grid_step));
    }
    detail::emit(o, io::dump(io::Json{{"x", xs}, {"prox", zs}}), out);
    return kOk;
}

// ---- denoise

inline int cmd_denoise(const Options& o, std::ostream& out, std::ostream& err) {
    const io::Json config = io::read_json_file(o.input);
    const io::ModelBundle model = detail::model_field(config, detail::dir_of(o.input));
    const detail::ReconSettings settings = detail::recon_settings(config, o);
    if (o.data.empty()) fail(ErrorCode::ParseError, "an input signal file is required");
    const recon::Signal y = io::read_signal(o.data);
    const detail::Reconstruction r = detail::reconstruct(y, model, settings);
    if (r.weak_convexity_warning) err << "warning: potential may be too weakly convex for guaranteed descent\n";

    const std::string text = io::encode_signal(o.output, r.x);
    if (o.output.empty() || o.output == "-") out << io::signal_to_csv(r.x);
    else io::write_text_file(o.output, text);

    if (!o.plot_csv.empty()) {
        std::string csv = "iteration,value\n";
        for (std::size_t k = 0; k < r.trace.size(); ++k) csv += std::to_string(k) + "," + io::format_double(r.trace[k]) + "\n";
        io::write_text_file(o.plot_csv, csv);
    }
    return kOk;
}

// ---- train

inline int cmd_train(const Options& o, std::ostream& out, std::ostream&) {
    const io::Json config = io::read_json_file(o.input);
    const auto base = detail::dir_of(o.input);
    const io::ModelBundle model = detail::model_field(config, base);
    const double sigma = detail::number_field(config, "sigma", 0.1, "config");
    if (!(sigma >= 0.0)) io::parse_fail("config.sigma", "must be nonnegative");

    std::mt19937_64 rng(o.seed);
    std::vector<recon::Signal> clean;
    const io::Json& data = io::require(config, "data", "config");
    if (data.contains("clean")) {
        const io::Json& files = data["clean"];
        if (!files.is_array() || files.empty()) io::parse_fail("config.data.clean", "expected a nonempty array of paths");
        for (std::size_t k = 0; k < files.size(); ++k) {
            if (!files[k].is_string()) io::parse_fail("config.data.clean[" + std::to_string(k) + "]", "expected a path");
            clean.push_back(io::read_signal(detail::resolve(base, files[k].get<std::string>())));
        }
    } else if (data.contains("synthetic")) {
        const io::Json& s = data["synthetic"];
        const std::string sp = "config.data.synthetic";
        const std::size_t count = detail::count_field(s, "count", 4, sp);
        const std::size_t rows = detail::count_field(s, "rows", 16, sp);
        const std::size_t cols = detail::count_field(s, "cols", 16, sp);
        if (count == 0 || rows == 0 || cols == 0) io::parse_fail(sp, "count, rows and cols must be positive");
        if (rows > recon::kMaxTrainSide || cols > recon::kMaxTrainSide) {
            fail(ErrorCode::ScaleTooLarge, "synthetic images exceed the training size limit");
        }
        for (std::size_t k = 0; k < count; ++k) clean.push_back(recon::random_blocks_image(rows, cols, rng));
    } else {
        io::parse_fail("config.data", "expected \"clean\" or \"synthetic\"");
    }
    for (const recon::Signal& c : clean) {
        if (!c.same_shape(clean.front())) fail(ErrorCode::ShapeMismatch, "training images must share one shape");
        if (c.rows > recon::kMaxTrainSide || c.cols > recon::kMaxTrainSide) {
            fail(ErrorCode::ScaleTooLarge, "training images exceed " + std::to_string(recon::kMaxTrainSide) + " per side");
        }
    }
    std::vector<recon::TrainingPair> pairs;
    for (const recon::Signal& c : clean) pairs.push_back({c, recon::add_gaussian_noise(c, sigma, rng)});

    const recon::FilterBank bank = model.bind(clean.front().rows, clean.front().cols);
    const recon::ChannelNonlinearity nl = model.nonlinearity();
    recon::Architecture arch{bank, nl, detail::count_field(config, "unroll", 5, "config"), 0.0};
    arch.step = detail::number_field(config, "unroll_step", recon::stable_step(bank, nl), "config");

    recon::TrainOptions opts;
    if (const auto it = config.find("train"); it != config.end()) {
        const std::string tp = "config.train";
        opts.step = detail::number_field(*it, "step", opts.step, tp);
        opts.epochs = detail::count_field(*it, "epochs", opts.epochs, tp);
        opts.lambda_tv2 = detail::number_field(*it, "lambda_tv2", opts.lambda_tv2, tp);
        if (it->contains("bounds")) opts.bounds = io::bounds_from_json((*it)["bounds"], tp + ".bounds");
        opts.learn_alphas = detail::bool_field(*it, "learn_alphas", false, tp);
        opts.learn_taps = detail::bool_field(*it, "learn_taps", false, tp);
    }
    if (o.has_max_iters) opts.epochs = o.max_iters;
    if (o.has_lambda) opts.lambda_tv2 = o.lambda;
    opts.bounds = detail::merge_bounds(opts.bounds, o);
    if (!(opts.step >= 0.0)) io::parse_fail("config.train.step", "must be nonnegative");

    const recon::TrainResult result = recon::train_unrolled(pairs, arch, opts);

    io::ModelBundle trained = model;
    trained.profile = result.arch.nl.profile();
    trained.alphas = result.arch.nl.alphas();
    if (opts.learn_taps) {
        trained.kernels = result.arch.bank.kernels();
        trained.norm_bound.reset();
        trained.normalize = false;
    }
    detail::emit(o, io::dump(io::to_json(trained)), out);

    if (!o.plot_csv.empty()) {
        std::string csv = "epoch,loss\n";
        for (std::size_t k = 0; k < result.loss_per_epoch.size(); ++k) {
            csv += std::to_string(k) + "," + io::format_double(result.loss_per_epoch[k]) + "\n";
        }
        csv += std::to_string(result.loss_per_epoch.size()) + "," + io::format_double(result.final_loss) + "\n";
        io::write_text_file(o.plot_csv, csv);
    }
    return kOk;
}

// ---- eval

inline int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
    const io::Json config = io::read_json_file(o.input);
    const auto base = detail::dir_of(o.input);
    std::optional<io::ModelBundle> model;
    if (config.contains("model")) model = detail::model_field(config, base);
    const detail::ReconSettings settings = detail::recon_settings(config, o);
    const double sigma = detail::number_field(config, "sigma", 0.1, "config");
    const double peak = detail::number_field(config, "peak", 1.0, "config");
    if (!(sigma >= 0.0)) io::parse_fail("config.sigma", "must be nonnegative");

    const io::Json& images = io::require(config, "images", "config");
    if (!images.is_array() || images.empty()) io::parse_fail("config.images", "expected a nonempty array");

    std::mt19937_64 rng(o.seed);
    std::string table = "image,psnr_input,psnr_output\n";
    std::string trace = "image,iteration,value\n";
    for (std::size_t k = 0; k < images.size(); ++k) {
        const std::string ip = "config.images[" + std::to_string(k) + "]";
        const io::Json& entry = images[k];
        const io::Json& ref_path = io::require(entry, "reference", ip);
        if (!ref_path.is_string()) io::parse_fail(ip + ".reference", "expected a path");
        const recon::Signal reference = io::read_signal(detail::resolve(base, ref_path.get<std::string>()));
        std::string name = std::to_string(k);
        if (entry.contains("name")) {
            if (!entry["name"].is_string()) io::parse_fail(ip + ".name", "expected a string");
            name = entry["name"].get<std::string>();
        }
        recon::Signal input;
        if (entry.contains("input")) {
            if (!entry["input"].is_string()) io::parse_fail(ip + ".input", "expected a path");
            input = io::read_signal(detail::resolve(base, entry["input"].get<std::string>()));
        } else {
            input = recon::add_gaussian_noise(reference, sigma, rng);
        }
        recon::require_same_shape(reference, input);

        recon::Signal output = input;
        if (model) {
            const detail::Reconstruction r = detail::reconstruct(input, *model, settings);
            if (r.weak_convexity_warning) err << "warning: image " << name << ": descent is not guaranteed\n";
            output = r.x;
            for (std::size_t t = 0; t < r.trace.size(); ++t) {
                trace += name + "," + std::to_string(t) + "," + io::format_double(r.trace[t]) + "\n";
            }
        }
        table += name + "," + io::format_double(recon::psnr(reference, input, peak)) + "," +
                 io::format_double(recon::psnr(reference, output, peak)) + "\n";
    }
    detail::emit(o, table, out);
    if (!o.plot_csv.empty()) io::write_text_file(o.plot_csv, trace);
    return kOk;
}

// ---- entry point

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Learn, constrain and deploy linear-spline nonlinearities", "splinetool"};
    app.require_subcommand(1);
    Options o;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("-o,--output", o.output, "Output file (default: stdout)");
        sub->add_option("--seed", o.seed, "Seed for all randomness");
    };
    const auto bounds_flags = [&](CLI::App* sub) {
        sub->add_option("--smin", o.smin_text, "Lower slope bound (number or -inf)");
        sub->add_option("--smax", o.smax_text, "Upper slope bound (number or +inf)");
    };
    const auto solver_flags = [&](CLI::App* sub) {
        sub->add_option("--tol", o.tol, "Convergence tolerance")->each([&](const std::string&) { o.has_tol = true; });
        sub->add_option("--max-iters", o.max_iters, "Iteration budget")->each([&](const std::string&) {
            o.has_max_iters = true;
        });
    };
    const auto lambda_flag = [&](CLI::App* sub, const char* help) {
        sub->add_option("--lambda", o.lambda, help)->each([&](const std::string&) { o.has_lambda = true; });
    };

    CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a slope-constrained TV2-regularized spline");
    fit_cmd->add_option("problem", o.input, "Problem JSON")->required();
    common(fit_cmd);
    bounds_flags(fit_cmd);
    solver_flags(fit_cmd);
    lambda_flag(fit_cmd, "Regularization weight (overrides the file)");
    fit_cmd->add_option("--plot-csv", o.plot_csv, "Write x,fitted,residual samples");

    CLI::App* project_cmd = app.add_subcommand("project", "Clip the slopes of a spline, keeping its mean");
    project_cmd->add_option("spline", o.input, "Spline JSON")->required();
    project_cmd->add_option("--bounds", o.data, "Bounds JSON");
    common(project_cmd);
    bounds_flags(project_cmd);

    CLI::App* potential_cmd = app.add_subcommand("potential", "Potential of a spline used as derivative or prox");
    potential_cmd->add_option("spline", o.input, "Spline JSON")->required();
    potential_cmd->add_option("--mode", o.mode, "derivative or prox")->check(CLI::IsMember({"derivative", "prox"}));
    common(potential_cmd);
    lambda_flag(potential_cmd, "Scale the potential by lambda");
    potential_cmd->add_option("--plot-csv", o.plot_csv, "Write y,phi,dphi samples");

    CLI::App* reweight_cmd = app.add_subcommand("prox-reweight", "Prox of lambda * phi from the prox of phi");
    reweight_cmd->add_option("prox", o.input, "Spline or curve JSON")->required();
    common(reweight_cmd);
    lambda_flag(reweight_cmd, "Potential weight");

    CLI::App* oracle_cmd = app.add_subcommand("prox-oracle", "Brute-force prox of a potential");
    oracle_cmd->add_option("potential", o.input, "Potential JSON")->required();
    oracle_cmd->add_option("--x", o.xs, "Evaluation points")->allow_extra_args(false);
    oracle_cmd->add_option("--halfwidth", o.halfwidth, "Search half-width")->each([&](const std::string&) {
        o.has_halfwidth = true;
    });
    oracle_cmd->add_option("--grid-step", o.grid_step, "Search grid step")->check(CLI::PositiveNumber);
    common(oracle_cmd);
    lambda_flag(oracle_cmd, "Scale the potential by lambda");

    CLI::App* denoise_cmd = app.add_subcommand("denoise", "Denoise a signal with a model");
    denoise_cmd->add_option("config", o.input, "Config JSON")->required();
    denoise_cmd->add_option("signal", o.data, "Noisy signal (.csv or .bin)")->required();
    common(denoise_cmd);
    solver_flags(denoise_cmd);
    denoise_cmd->add_option("--plot-csv", o.plot_csv, "Write the objective or residual trace");

    CLI::App* train_cmd = app.add_subcommand("train", "Train an unrolled denoiser");
    train_cmd->add_option("config", o.input, "Config JSON")->required();
    common(train_cmd);
    bounds_flags(train_cmd);
    lambda_flag(train_cmd, "TV2 weight on the profile (overrides the file)");
    train_cmd->add_option("--max-iters", o.max_iters, "Epochs (overrides the file)")->each([&](const std::string&) {
        o.has_max_iters = true;
    });
    train_cmd->add_option("--plot-csv", o.plot_csv, "Write the loss per epoch");

    CLI::App* eval_cmd = app.add_subcommand("eval", "PSNR table and traces for a set of images");
    eval_cmd->add_option("config", o.input, "Config JSON")->required();
    common(eval_cmd);
    solver_flags(eval_cmd);
    eval_cmd->add_option("--plot-csv", o.plot_csv, "Write the per-image trace CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(o, out, err);
        if (project_cmd->parsed()) return cmd_project(o, out, err);
        if (potential_cmd->parsed()) return cmd_potential(o, out, err);
        if (reweight_cmd->parsed()) return cmd_prox_reweight(o, out, err);
        if (oracle_cmd->parsed()) return cmd_prox_oracle(o, out, err);
        if (denoise_cmd->parsed()) return cmd_denoise(o, out, err);
        if (train_cmd->parsed()) return cmd_train(o, out, err);
        if (eval_cmd->parsed()) return cmd_eval(o, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"splinetool"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace splinetool::cli
