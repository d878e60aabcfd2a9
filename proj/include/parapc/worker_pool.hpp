#pragma once

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace parapc {

/// Fixed set of worker threads that execute one job per worker and then
/// meet at a barrier. run(job) calls job(w) for w = 0..size()-1, worker 0 on
/// the calling thread, and returns once every call has finished. The first
/// exception thrown by any worker is rethrown from run().
class WorkerPool {
public:
    explicit WorkerPool(int workers);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    int size() const noexcept { return workers_; }
    void run(const std::function<void(int)>& job);

private:
    void loop(int w);

    int workers_;
    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable start_cv_;
    std::condition_variable done_cv_;
    const std::function<void(int)>* job_ = nullptr;
    std::uint64_t generation_ = 0;
    int pending_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
};

/// Splits [0, count) into `parts` contiguous [begin, end) ranges whose
/// lengths differ by at most one; earlier ranges take the remainder.
std::vector<std::pair<std::size_t, std::size_t>> even_ranges(std::size_t count, int parts);

/// Logical core count, at least 1.
int hardware_workers();

} // namespace parapc
