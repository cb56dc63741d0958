#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace bosim {

/// Fixed team of worker threads executing bulk-synchronous phases.
///
/// run(f) calls f(w) for every worker id w in [0, size()) concurrently and
/// returns once all have finished, which acts as the barrier between phases.
/// Worker 0 runs on the calling thread. The first exception thrown by any
/// worker is rethrown on the caller after the phase completes.
class WorkerPool {
public:
    explicit WorkerPool(int workers = 1);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    int size() const noexcept { return size_; }

    void run(const std::function<void(int)>& phase);

private:
    void loop(int id);

    int size_;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable start_cv_;
    std::condition_variable done_cv_;
    const std::function<void(int)>* phase_ = nullptr;
    std::size_t generation_ = 0;
    int pending_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
};

} // namespace bosim
