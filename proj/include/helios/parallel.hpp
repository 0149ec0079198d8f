// Deterministic fork-join helper: job i always produces the same output slot
// regardless of how many workers run, so thread count never changes results.
#ifndef HELIOS_PARALLEL_HPP
#define HELIOS_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace helios {

/// Worker cap: min(hardware_concurrency, HELIOS_THREADS when set).
inline int max_workers() {
    int n = int(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("HELIOS_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1 && cap < n) n = cap;
    }
    return n;
}

/// Runs fn(0..count-1), each index exactly once, on up to max_workers()
/// threads. fn must only write to per-index state.
inline void parallel_for(int count, const std::function<void(int)>& fn) {
    const int workers = std::min(max_workers(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

}  // namespace helios

#endif
