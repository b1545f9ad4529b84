#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace leotopo {

// Worker count: LEOTOPO_THREADS overrides hardware concurrency.
inline unsigned default_thread_count() {
    if (const char* env = std::getenv("LEOTOPO_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) {
            return static_cast<unsigned>(v);
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs fn(begin, end) over disjoint chunks of [0, n). Callers that need
// deterministic reductions should write per-index results and combine
// sequentially afterwards.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                         unsigned threads = 0) {
    if (threads == 0) {
        threads = default_thread_count();
    }
    if (n == 0) {
        return;
    }
    if (threads <= 1 || n == 1) {
        fn(0, n);
        return;
    }
    threads = std::min<std::size_t>(threads, n);
    const std::size_t chunk = std::max<std::size_t>(1, n / (threads * 8));
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t begin = cursor.fetch_add(chunk);
                if (begin >= n) {
                    return;
                }
                fn(begin, std::min(begin + chunk, n));
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
}

}  // namespace leotopo
