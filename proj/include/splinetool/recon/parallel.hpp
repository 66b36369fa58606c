#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace splinetool::recon {

/// Worker count for n independent tasks: hardware concurrency, capped by the
/// SPLINETOOL_THREADS environment variable and by requested (when nonzero).
inline std::size_t worker_count(std::size_t tasks, std::size_t requested = 0) {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SPLINETOOL_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap > 0) n = std::min(n, static_cast<std::size_t>(cap));
        } catch (const std::exception&) {
            // ignore malformed values
        }
    }
    if (requested > 0) n = std::min(n, requested);
    return std::max<std::size_t>(1, std::min(n, tasks));
}

/// Calls body(k) for k in [0, n) on up to `workers` threads. Each index is
/// processed exactly once; callers write results by index so that any later
/// reduction order is fixed. The first exception thrown is rethrown.
template <class Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t k = 0; k < n; ++k) body(k);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (std::size_t k = w; k < n; k += workers) body(k);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (std::thread& t : threads) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace splinetool::recon
