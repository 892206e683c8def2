#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace malcal {

/// Number of workers to use; `requested <= 0` means machine parallelism.
int resolve_threads(int requested);

/// Runs fn(index) for every index in [0, count) on up to `threads` workers.
/// Each index is handled exactly once; the first exception thrown by any
/// worker is rethrown on the calling thread after all workers stop.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const int workers = resolve_threads(threads);
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(body);
    }
    if (error) std::rethrow_exception(error);
}

/// Pairwise (tree) summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

}  // namespace malcal
