#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "splinetool/error.hpp"
#include "splinetool/recon/filter_bank.hpp"
#include "splinetool/recon/signal.hpp"

namespace splinetool::recon {

/// Matrix-free linear operator with its adjoint.
struct LinearOperator {
    std::function<Signal(const Signal&)> apply;
    std::function<Signal(const Signal&)> adjoint;
};

inline LinearOperator identity_operator() {
    return {[](const Signal& x) { return x; }, [](const Signal& x) { return x; }};
}

/// Single-kernel correlation (e.g. a blur) as a forward operator.
inline LinearOperator correlation_operator(Kernel kernel, Boundary boundary, std::size_t rows, std::size_t cols) {
    auto bank = std::make_shared<const FilterBank>(std::vector<Kernel>{std::move(kernel)}, boundary, rows, cols);
    return {[bank](const Signal& x) { return bank->apply(0, x); }, [bank](const Signal& x) { return bank->adjoint(0, x); }};
}

/// Power-iteration estimate of ||H|| on signals of the given shape.
inline double estimate_operator_norm(const LinearOperator& h, std::size_t rows, std::size_t cols, std::size_t iters = 200) {
    Signal x(rows, cols);
    for (std::size_t k = 0; k < x.size(); ++k) x.data[k] = 1.0 + 0.5 * std::cos(0.9 * static_cast<double>(k) + 0.1);
    double estimate = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        const double nx = norm(x);
        if (nx == 0.0) return 0.0;
        for (double& v : x.data) v /= nx;
        x = h.adjoint(h.apply(x));
        estimate = std::sqrt(norm(x));
    }
    return estimate;
}

/// y = H x + noise. L bounds the Lipschitz constant ||H||^2 of the data-term
/// gradient; gamma is the step of the gradient scheme.
struct InverseProblem {
    Signal y;
    LinearOperator h;
    double lipschitz = 1.0;
    double gamma = 0.5;

    static InverseProblem denoising(Signal y, double gamma = 0.5) {
        return {std::move(y), identity_operator(), 1.0, gamma};
    }
};

} // namespace splinetool::recon
