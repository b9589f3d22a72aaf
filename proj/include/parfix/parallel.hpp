#pragma once

// A small persistent worker pool for the per-iteration fan-out in select().
// Work items write to disjoint slots, so results never depend on scheduling.

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace parfix {

class ThreadPool {
public:
    /// `threads` counts the calling thread; 0 or 1 runs everything inline.
    explicit ThreadPool(std::size_t threads) {
        const std::size_t workers = threads > 1 ? threads - 1 : 0;
        workers_.reserve(workers);
        for (std::size_t i = 0; i < workers; ++i) {
            workers_.emplace_back([this] { worker_loop(); });
        }
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    ~ThreadPool() {
        {
            std::lock_guard lock(mutex_);
            stopping_ = true;
        }
        wake_.notify_all();
        for (auto& w : workers_) w.join();
    }

    std::size_t size() const noexcept { return workers_.size() + 1; }

    /// Calls body(i) for i in [0, count). Rethrows the exception of the
    /// lowest failing index.
    void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
        if (workers_.empty() || count < 2) {
            for (std::size_t i = 0; i < count; ++i) body(i);
            return;
        }
        std::vector<std::exception_ptr> errors(count);
        {
            std::lock_guard lock(mutex_);
            body_ = &body;
            errors_ = &errors;
            count_ = count;
            next_ = 0;
            active_ = workers_.size();
            ++generation_;
        }
        wake_.notify_all();
        drain();
        {
            std::unique_lock lock(mutex_);
            done_.wait(lock, [this] { return active_ == 0; });
            body_ = nullptr;
            errors_ = nullptr;
        }
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

private:
    void drain() {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(mutex_);
                if (next_ >= count_) return;
                i = next_++;
            }
            try {
                (*body_)(i);
            } catch (...) {
                (*errors_)[i] = std::current_exception();
            }
        }
    }

    void worker_loop() {
        std::size_t seen = 0;
        for (;;) {
            {
                std::unique_lock lock(mutex_);
                wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
                if (stopping_) return;
                seen = generation_;
            }
            drain();
            {
                std::lock_guard lock(mutex_);
                if (--active_ == 0) done_.notify_one();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(std::size_t)>* body_ = nullptr;
    std::vector<std::exception_ptr>* errors_ = nullptr;
    std::size_t count_ = 0;
    std::size_t next_ = 0;
    std::size_t active_ = 0;
    std::size_t generation_ = 0;
    bool stopping_ = false;
};

inline std::size_t hardware_threads() {
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

} // namespace parfix
