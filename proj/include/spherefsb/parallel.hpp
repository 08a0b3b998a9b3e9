// Deterministic index-parallel fan-out.
//
// Work items are identified by index; each worker pulls the next free index
// from a shared counter and the caller's body writes only into its own slot,
// so results are independent of the thread count and of scheduling order.
// The thread budget comes from the SPHERE_FSB_THREADS environment variable
// (unset or 0 means one thread per hardware core).
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "spherefsb/errors.hpp"

namespace spherefsb {

inline int thread_budget() {
    const char* env = std::getenv("SPHERE_FSB_THREADS");
    long requested = 0;
    if (env != nullptr && *env != '\0') {
        char* end = nullptr;
        requested = std::strtol(env, &end, 10);
        if (end == nullptr || *end != '\0' || requested < 0) {
            throw ConfigError("SPHERE_FSB_THREADS must be a non-negative integer, got \"" +
                              std::string(env) + "\"");
        }
    }
    if (requested > 0) return static_cast<int>(requested);
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(i) for i in [0, n).  Exceptions from any worker are re-thrown on
// the calling thread after all workers have joined (first one wins).
template <typename Body>
void parallel_for(int n, Body&& body) {
    if (n <= 0) return;
    const int workers = std::min(thread_budget(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const int i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace spherefsb
