#include "bosim/parallel.hpp"

#include "bosim/error.hpp"

namespace bosim {

WorkerPool::WorkerPool(int workers) : size_(workers)
{
    if (workers < 1)
        throw InvalidInput("WorkerPool: need at least one worker");
    threads_.reserve(static_cast<std::size_t>(workers - 1));
    for (int id = 1; id < workers; ++id)
        threads_.emplace_back([this, id] { loop(id); });
}

WorkerPool::~WorkerPool()
{
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    start_cv_.notify_all();
    for (auto& t : threads_)
        t.join();
}

void WorkerPool::run(const std::function<void(int)>& phase)
{
    if (size_ == 1) {
        phase(0);
        return;
    }
    {
        std::lock_guard lock(mutex_);
        phase_ = &phase;
        pending_ = size_ - 1;
        error_ = nullptr;
        ++generation_;
    }
    start_cv_.notify_all();

    std::exception_ptr own;
    try {
        phase(0);
    } catch (...) {
        own = std::current_exception();
    }

    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    phase_ = nullptr;
    if (own)
        std::rethrow_exception(own);
    if (error_)
        std::rethrow_exception(error_);
}

void WorkerPool::loop(int id)
{
    std::size_t seen = 0;
    for (;;) {
        const std::function<void(int)>* phase = nullptr;
        {
            std::unique_lock lock(mutex_);
            start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_)
                return;
            seen = generation_;
            phase = phase_;
        }
        try {
            (*phase)(id);
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_)
                error_ = std::current_exception();
        }
        {
            std::lock_guard lock(mutex_);
            if (--pending_ == 0)
                done_cv_.notify_one();
        }
    }
}

} // namespace bosim
