#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pioneer {

// PIONEER_WORKERS overrides the hardware thread count.
int worker_count();

// Calls f(i) for i in [0, n) on up to worker_count() threads. f(i) must write
// only to slot i of its output so the result does not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const auto workers = std::size_t(std::max(1, worker_count()));
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!error) error = std::current_exception();
                next.store(n);
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < std::min(workers, n); ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace pioneer
