#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace spectralflow {

// Resolve a worker count: explicit request > SPECTRALFLOW_WORKERS > hardware.
inline int resolve_workers(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SPECTRALFLOW_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Run fn(i, worker) for i in [0, n); worker ids are dense in [0, workers).
// Each index writes only its own output slot, so results are identical for
// any worker count.
inline void parallel_for_workers(std::size_t n, int workers,
                                 const std::function<void(std::size_t, int)>& fn) {
    workers = static_cast<int>(std::min<std::size_t>(std::max(workers, 1), n == 0 ? 1 : n));
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i, 0);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i, w);
        });
    }
    for (auto& th : pool) th.join();
}

inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    parallel_for_workers(n, workers, [&](std::size_t i, int) { fn(i); });
}

}  // namespace spectralflow
