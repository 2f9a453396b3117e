#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace gridcpd {

// Runs fn(0..n-1), chunked over `threads` workers. Callers index their
// output by i, so results are identical for any thread count.
inline void parallel_for(std::int64_t n, int threads,
                         const std::function<void(std::int64_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const int workers = static_cast<int>(std::min<std::int64_t>(threads, n));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::int64_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace gridcpd
