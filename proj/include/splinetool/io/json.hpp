#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "splinetool/error.hpp"
#include "splinetool/fit/problem.hpp"
#include "splinetool/potentials.hpp"
#include "splinetool/pwl/curve.hpp"
#include "splinetool/pwl/spline.hpp"
#include "splinetool/recon/filter_bank.hpp"
#include "splinetool/recon/nonlinearity.hpp"
#include "splinetool/slope_constraints.hpp"

namespace splinetool::io {

using Json = nlohmann::ordered_json;

[[noreturn]] inline void parse_fail(const std::string& path, const std::string& what) {
    fail(ErrorCode::ParseError, "field '" + path + "': " + what);
}

inline const Json& require(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object()) parse_fail(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) parse_fail(path + "." + key, "missing");
    return *it;
}

/// Numbers may also be written as "inf", "+inf", "-inf".
inline double get_number(const Json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    parse_fail(path, "expected a number");
}

inline double get_finite(const Json& j, const std::string& path) {
    const double v = get_number(j, path);
    if (!std::isfinite(v)) parse_fail(path, "expected a finite number");
    return v;
}

inline Json number_to_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    return v;
}

inline std::vector<double> get_number_array(const Json& j, const std::string& path) {
    if (!j.is_array()) parse_fail(path, "expected an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(get_finite(j[k], path + "[" + std::to_string(k) + "]"));
    return out;
}

inline std::vector<Point> get_points(const Json& j, const std::string& path) {
    if (!j.is_array()) parse_fail(path, "expected an array of [x, y] pairs");
    std::vector<Point> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const std::string p = path + "[" + std::to_string(k) + "]";
        if (!j[k].is_array() || j[k].size() != 2) parse_fail(p, "expected an [x, y] pair");
        out.push_back({get_finite(j[k][0], p + "[0]"), get_finite(j[k][1], p + "[1]")});
    }
    return out;
}

inline Json points_to_json(std::span<const Point> pts) {
    Json a = Json::array();
    for (const Point& p : pts) a.push_back({p.x, p.y});
    return a;
}

// Rethrows domain errors raised while building an object with the field path attached.
template <class F>
auto with_path(const std::string& path, F&& build) {
    try {
        return build();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError) throw;
        throw Error(e.code(), "field '" + path + "': " + e.what());
    }
}

// ---- NodalSpline: {"t": [...], "f": [...], "meta": {...}}

inline Json to_json(const NodalSpline& sp) {
    Json j;
    j["t"] = std::vector<double>(sp.grid().nodes().begin(), sp.grid().nodes().end());
    j["f"] = std::vector<double>(sp.values().begin(), sp.values().end());
    if (!sp.meta.empty()) j["meta"] = sp.meta;
    return j;
}

inline NodalSpline spline_from_json(const Json& j, const std::string& path = "spline") {
    std::vector<double> t = get_number_array(require(j, "t", path), path + ".t");
    std::vector<double> f = get_number_array(require(j, "f", path), path + ".f");
    NodalSpline sp = with_path(path, [&] { return NodalSpline::make(std::move(t), std::move(f)); });
    if (const auto it = j.find("meta"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) parse_fail(path + ".meta", "expected an object of strings");
        for (const auto& [k, v] : it->items()) {
            if (!v.is_string()) parse_fail(path + ".meta." + k, "expected a string");
            sp.meta[k] = v.get<std::string>();
        }
    }
    return sp;
}

// ---- PwlCurve: {"points": [[x, y], ...]}

inline Json to_json(const PwlCurve& c) { return Json{{"points", points_to_json(c.points())}}; }

inline PwlCurve curve_from_json(const Json& j, const std::string& path = "curve") {
    std::vector<Point> pts = get_points(require(j, "points", path), path + ".points");
    return with_path(path, [&] { return PwlCurve::make(std::move(pts)); });
}

// ---- SlopeBounds: {"s_min": number | "-inf", "s_max": number | "+inf"}

inline Json to_json(const SlopeBounds& b) {
    return Json{{"s_min", number_to_json(b.lower())}, {"s_max", number_to_json(b.upper())}};
}

inline SlopeBounds bounds_from_json(const Json& j, const std::string& path = "bounds") {
    if (j.is_null()) return {};
    if (!j.is_object()) parse_fail(path, "expected an object");
    const double lo = j.contains("s_min") ? get_number(j["s_min"], path + ".s_min") : -kInf;
    const double hi = j.contains("s_max") ? get_number(j["s_max"], path + ".s_max") : kInf;
    if (std::isnan(lo) || lo == kInf) parse_fail(path + ".s_min", "must be a number or \"-inf\"");
    if (std::isnan(hi) || hi == -kInf) parse_fail(path + ".s_max", "must be a number or \"+inf\"");
    return with_path(path, [&] { return SlopeBounds(lo, hi); });
}

// ---- PwQuadPotential

inline const char* to_string(ConvexityKind k) noexcept {
    switch (k) {
    case ConvexityKind::Convex: return "convex";
    case ConvexityKind::Weak: return "weak";
    case ConvexityKind::Strong: return "strong";
    }
    return "convex";
}

inline Json to_json(const PwQuadPotential& p) {
    Json pieces = Json::array();
    for (const QuadPiece& q : p.pieces()) pieces.push_back({q.c, q.b, q.a});
    return Json{{"breakpoints", p.breakpoints()},
                {"pieces", pieces},
                {"convexity", {{"kind", to_string(p.convexity().kind)}, {"rho", p.convexity().rho}}}};
}

inline PwQuadPotential potential_from_json(const Json& j, const std::string& path = "potential") {
    std::vector<double> breaks = get_number_array(require(j, "breakpoints", path), path + ".breakpoints");
    const Json& pj = require(j, "pieces", path);
    if (!pj.is_array()) parse_fail(path + ".pieces", "expected an array of [c, b, a]");
    std::vector<QuadPiece> pieces;
    for (std::size_t k = 0; k < pj.size(); ++k) {
        const std::string p = path + ".pieces[" + std::to_string(k) + "]";
        if (!pj[k].is_array() || pj[k].size() != 3) parse_fail(p, "expected [c, b, a]");
        pieces.push_back({get_finite(pj[k][0], p + "[0]"), get_finite(pj[k][1], p + "[1]"), get_finite(pj[k][2], p + "[2]")});
    }
    const Json& cj = require(j, "convexity", path);
    const Json& kind = require(cj, "kind", path + ".convexity");
    Convexity c;
    const std::string ks = kind.is_string() ? kind.get<std::string>() : "";
    if (ks == "convex") c.kind = ConvexityKind::Convex;
    else if (ks == "weak") c.kind = ConvexityKind::Weak;
    else if (ks == "strong") c.kind = ConvexityKind::Strong;
    else parse_fail(path + ".convexity.kind", "expected \"convex\", \"weak\" or \"strong\"");
    c.rho = get_finite(require(cj, "rho", path + ".convexity"), path + ".convexity.rho");
    return with_path(path, [&] { return PwQuadPotential::from_pieces(std::move(breaks), std::move(pieces), c); });
}

// ---- Fit problem and result

struct ProblemSpec {
    FitProblem problem;
    SolverConfig solver;
};

inline ProblemSpec problem_from_json(const Json& j, const std::string& path = "problem") {
    std::vector<Point> data = get_points(require(j, "data", path), path + ".data");
    std::optional<Grid> grid;
    if (const auto it = j.find("grid"); it != j.end() && !it->is_null()) {
        std::vector<double> t = get_number_array(*it, path + ".grid");
        grid = with_path(path + ".grid", [&] { return Grid::make(std::move(t)); });
    }
    const double lambda = get_finite(require(j, "lambda", path), path + ".lambda");
    const SlopeBounds bounds = j.contains("bounds") ? bounds_from_json(j["bounds"], path + ".bounds") : SlopeBounds{};
    SolverConfig solver;
    if (const auto it = j.find("solver"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) parse_fail(path + ".solver", "expected an object");
        if (it->contains("tol")) solver.tol = get_finite((*it)["tol"], path + ".solver.tol");
        if (it->contains("max_iters")) {
            const Json& m = (*it)["max_iters"];
            if (!m.is_number_integer() || m.get<long long>() < 0) parse_fail(path + ".solver.max_iters", "expected a nonnegative integer");
            solver.max_iters = m.get<std::size_t>();
        }
        if (!(solver.tol > 0.0)) parse_fail(path + ".solver.tol", "must be positive");
    }
    FitProblem problem = with_path(path, [&] { return FitProblem::make(std::move(data), std::move(grid), lambda, bounds); });
    return {std::move(problem), solver};
}

inline Json to_json(const ProblemSpec& spec) {
    const FitProblem& p = spec.problem;
    return Json{{"data", points_to_json(p.data)},
                {"grid", std::vector<double>(p.grid.nodes().begin(), p.grid.nodes().end())},
                {"lambda", p.lambda},
                {"bounds", to_json(p.bounds)},
                {"solver", {{"tol", spec.solver.tol}, {"max_iters", spec.solver.max_iters}}}};
}

inline Json to_json(const FitResult& r) {
    return Json{{"spline", to_json(r.spline)},
                {"objective", r.objective},
                {"data_term", r.data_term},
                {"reg_term", r.reg_term},
                {"max_slope_violation", r.max_slope_violation},
                {"optimality_residual", number_to_json(r.optimality_residual)},
                {"iterations", r.iterations},
                {"converged", r.converged}};
}

inline FitResult result_from_json(const Json& j, const std::string& path = "result") {
    FitResult r{spline_from_json(require(j, "spline", path), path + ".spline"),
                get_finite(require(j, "objective", path), path + ".objective"),
                get_finite(require(j, "data_term", path), path + ".data_term"),
                get_finite(require(j, "reg_term", path), path + ".reg_term"),
                get_finite(require(j, "max_slope_violation", path), path + ".max_slope_violation"),
                get_number(require(j, "optimality_residual", path), path + ".optimality_residual"),
                0,
                false};
    const Json& it = require(j, "iterations", path);
    if (!it.is_number_integer()) parse_fail(path + ".iterations", "expected an integer");
    r.iterations = it.get<std::size_t>();
    const Json& c = require(j, "converged", path);
    if (!c.is_boolean()) parse_fail(path + ".converged", "expected a boolean");
    r.converged = c.get<bool>();
    return r;
}

// ---- Model bundle: {"bank": {...}, "profile": spline, "alphas": [...], "mode": "derivative" | "prox"}

struct ModelBundle {
    std::vector<recon::Kernel> kernels;
    recon::Boundary boundary = recon::Boundary::Circular;
    std::optional<double> norm_bound;
    bool normalize = false; ///< scale the bound filters to unit norm when binding
    NodalSpline profile = NodalSpline::make({0.0, 1.0}, {0.0, 1.0});
    std::vector<double> alphas;
    recon::Mode mode = recon::Mode::Derivative;

    [[nodiscard]] recon::FilterBank bind(std::size_t rows, std::size_t cols) const {
        recon::FilterBank bank(kernels, boundary, rows, cols, norm_bound);
        return normalize ? bank.normalized() : bank;
    }

    [[nodiscard]] recon::ChannelNonlinearity nonlinearity() const { return {profile, alphas, mode}; }
};

inline Json to_json(const recon::Kernel& k) { return Json{{"rows", k.rows}, {"cols", k.cols}, {"taps", k.taps}}; }

inline Json bank_to_json(const std::vector<recon::Kernel>& kernels, recon::Boundary boundary,
                         std::optional<double> norm_bound = std::nullopt, bool normalize = false) {
    Json ks = Json::array();
    for (const recon::Kernel& k : kernels) ks.push_back(to_json(k));
    Json j{{"kernels", ks}, {"boundary", recon::to_string(boundary)}};
    if (norm_bound) j["norm_bound"] = *norm_bound;
    if (normalize) j["normalize"] = true;
    return j;
}

inline Json to_json(const ModelBundle& m) {
    return Json{{"bank", bank_to_json(m.kernels, m.boundary, m.norm_bound, m.normalize)},
                {"profile", to_json(m.profile)},
                {"alphas", m.alphas},
                {"mode", recon::to_string(m.mode)}};
}

inline ModelBundle model_from_json(const Json& j, const std::string& path = "model") {
    ModelBundle m;
    const std::string bp = path + ".bank";
    const Json& bank = require(j, "bank", path);
    const Json& ks = require(bank, "kernels", bp);
    if (!ks.is_array() || ks.empty()) parse_fail(bp + ".kernels", "expected a nonempty array");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const std::string kp = bp + ".kernels[" + std::to_string(i) + "]";
        const Json& r = require(ks[i], "rows", kp);
        const Json& c = require(ks[i], "cols", kp);
        if (!r.is_number_unsigned() || r.get<std::size_t>() == 0) parse_fail(kp + ".rows", "expected a positive integer");
        if (!c.is_number_unsigned() || c.get<std::size_t>() == 0) parse_fail(kp + ".cols", "expected a positive integer");
        recon::Kernel k{r.get<std::size_t>(), c.get<std::size_t>(), get_number_array(require(ks[i], "taps", kp), kp + ".taps")};
        if (k.taps.size() != k.rows * k.cols) parse_fail(kp + ".taps", "expected rows * cols values");
        m.kernels.push_back(std::move(k));
    }
    if (const auto it = bank.find("boundary"); it != bank.end()) {
        const std::string b = it->is_string() ? it->get<std::string>() : "";
        if (b == "circular") m.boundary = recon::Boundary::Circular;
        else if (b == "reflective") m.boundary = recon::Boundary::Reflective;
        else parse_fail(bp + ".boundary", "expected \"circular\" or \"reflective\"");
    }
    if (const auto it = bank.find("norm_bound"); it != bank.end() && !it->is_null()) {
        m.norm_bound = get_finite(*it, bp + ".norm_bound");
    }
    if (const auto it = bank.find("normalize"); it != bank.end()) {
        if (!it->is_boolean()) parse_fail(bp + ".normalize", "expected a boolean");
        m.normalize = it->get<bool>();
    }
    m.profile = spline_from_json(require(j, "profile", path), path + ".profile");
    m.alphas = get_number_array(require(j, "alphas", path), path + ".alphas");
    if (m.alphas.size() != m.kernels.size()) parse_fail(path + ".alphas", "expected one scaling per kernel");
    const Json& mode = require(j, "mode", path);
    const std::string ms = mode.is_string() ? mode.get<std::string>() : "";
    if (ms == "derivative") m.mode = recon::Mode::Derivative;
    else if (ms == "prox") m.mode = recon::Mode::Prox;
    else parse_fail(path + ".mode", "expected \"derivative\" or \"prox\"");
    with_path(path, [&] { return m.nonlinearity(); });
    return m;
}

// ---- Files

inline Json read_json_file(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) fail(ErrorCode::ParseError, "cannot open '" + filename + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return Json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::ParseError, filename + ": " + e.what());
    }
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline void write_text_file(const std::string& filename, const std::string& text) {
    std::ofstream out(filename, std::ios::binary);
    if (!out) fail(ErrorCode::InvalidArgument, "cannot write '" + filename + "'");
    out << text;
    if (!out) fail(ErrorCode::InvalidArgument, "failed writing '" + filename + "'");
}

inline void write_json_file(const std::string& filename, const Json& j) { write_text_file(filename, dump(j)); }

} // namespace splinetool::io
