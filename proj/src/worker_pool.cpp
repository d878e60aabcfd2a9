#include "parapc/worker_pool.hpp"

#include <stdexcept>

namespace parapc {

WorkerPool::WorkerPool(int workers) : workers_(workers) {
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    threads_.reserve(workers - 1);
    for (int w = 1; w < workers; ++w) threads_.emplace_back([this, w] { loop(w); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mu_);
        stop_ = true;
    }
    start_cv_.notify_all();
    for (auto& t : threads_) t.join();
}

void WorkerPool::run(const std::function<void(int)>& job) {
    if (workers_ == 1) {
        job(0);
        return;
    }
    {
        std::lock_guard lock(mu_);
        job_ = &job;
        pending_ = workers_ - 1;
        error_ = nullptr;
        ++generation_;
    }
    start_cv_.notify_all();

    std::exception_ptr local;
    try {
        job(0);
    } catch (...) {
        local = std::current_exception();
    }

    std::unique_lock lock(mu_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
    if (local) std::rethrow_exception(local);
    if (error_) std::rethrow_exception(error_);
}

void WorkerPool::loop(int w) {
    std::uint64_t seen = 0;
    while (true) {
        const std::function<void(int)>* job;
        {
            std::unique_lock lock(mu_);
            start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            job = job_;
        }
        std::exception_ptr err;
        try {
            (*job)(w);
        } catch (...) {
            err = std::current_exception();
        }
        {
            std::lock_guard lock(mu_);
            if (err && !error_) error_ = err;
            if (--pending_ == 0) done_cv_.notify_one();
        }
    }
}

std::vector<std::pair<std::size_t, std::size_t>> even_ranges(std::size_t count, int parts) {
    if (parts < 1) throw std::invalid_argument("workers must be >= 1");
    const auto w = static_cast<std::size_t>(parts);
    const std::size_t base = count / w, extra = count % w;
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(w);
    std::size_t begin = 0;
    for (std::size_t i = 0; i < w; ++i) {
        std::size_t end = begin + base + (i < extra ? 1 : 0);
        out.emplace_back(begin, end);
        begin = end;
    }
    return out;
}

int hardware_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

} // namespace parapc
