#ifndef MAR_PARALLEL_HPP
#define MAR_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mar {

/// Runs fn(i) for i in [0, n). Work items must be independent; results
/// belonging to item i should be written to slot i of a preallocated
/// container so that output order does not depend on scheduling.
/// threads <= 1 runs inline. The first exception thrown by any item is
/// rethrown on the calling thread after all workers join.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    int workers = threads > 0 ? threads : static_cast<int>(hw);
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace mar

#endif
