#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace starea {

// Runs body(i, worker) for i in [0, n) over contiguous chunks.
template <class Body>
void parallel_for(std::uint64_t n, unsigned threads, Body&& body) {
    threads = std::max(1u, threads);
    if (threads == 1 || n < 2) {
        for (std::uint64_t i = 0; i < n; ++i) body(i, 0u);
        return;
    }
    threads = unsigned(std::min<std::uint64_t>(threads, n));
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex mu;
    for (unsigned w = 0; w < threads; ++w) {
        std::uint64_t lo = n * w / threads, hi = n * (w + 1) / threads;
        pool.emplace_back([&, lo, hi, w] {
            try {
                for (std::uint64_t i = lo; i < hi; ++i) body(i, w);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace starea
