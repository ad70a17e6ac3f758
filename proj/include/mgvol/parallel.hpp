#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace mgvol {

// Runs fn(0) .. fn(n_tasks-1) across up to n_threads workers. Tasks must not
// share mutable state; each writes only its own results slot, so the outcome
// is independent of scheduling. The first exception thrown by a task is
// rethrown after all workers have stopped.
inline void parallel_for(std::size_t n_tasks, int n_threads, const std::function<void(std::size_t)>& fn) {
    if (n_threads <= 0) n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    if (n_tasks <= 1 || n_threads == 1) {
        for (std::size_t k = 0; k < n_tasks; ++k) fn(k);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::vector<std::thread> workers;
    const std::size_t pool = std::min<std::size_t>(static_cast<std::size_t>(n_threads), n_tasks);
    workers.reserve(pool);
    for (std::size_t t = 0; t < pool; ++t)
        workers.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::size_t k = next.fetch_add(1);
                if (k >= n_tasks) return;
                try {
                    fn(k);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace mgvol
