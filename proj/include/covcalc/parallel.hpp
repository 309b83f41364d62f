#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace covcalc {

/**
 * Resolves the worker count: an explicit request wins, then the
 * COVCALC_THREADS environment variable, then hardware concurrency.
 */
inline int resolve_threads(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("COVCALC_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/**
 * Runs body(i) for i in [begin, end) on `threads` workers in contiguous
 * blocks. Bodies must write to disjoint slots; reductions happen afterwards
 * in deterministic order, so the result is independent of the thread count.
 */
inline void parallel_for(std::size_t begin, std::size_t end, int threads,
                         const std::function<void(std::size_t)>& body) {
    const std::size_t count = end > begin ? end - begin : 0;
    const int nt = resolve_threads(threads);
    if (count == 0) return;
    if (nt <= 1 || count == 1) {
        for (std::size_t i = begin; i < end; ++i) body(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(nt), count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = begin + count * w / workers;
        const std::size_t hi = begin + count * (w + 1) / workers;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace covcalc
