#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace trigsat {

// Fixed pool that runs index-partitioned jobs: parallel_for(n, fn) calls
// fn(i) for every i in [0, n) and returns once all calls have finished. The
// calling thread participates, so a pool of size 1 spawns no threads.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t threads = 1) {
    if (threads == 0) threads = 1;
    for (std::size_t i = 1; i < threads; ++i)
      workers_.emplace_back([this](std::stop_token st) { worker_loop(st); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      for (auto& w : workers_) w.request_stop();
    }
    wake_.notify_all();
  }

  std::size_t size() const noexcept { return workers_.size() + 1; }

  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (workers_.empty() || n == 1) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    {
      std::lock_guard lock(mutex_);
      job_ = &fn;
      job_size_ = n;
      next_ = 0;
      unfinished_ = n;
      ++generation_;
    }
    wake_.notify_all();
    drain();
    std::unique_lock lock(mutex_);
    done_.wait(lock, [&] { return unfinished_ == 0; });
    job_ = nullptr;
  }

 private:
  // Claims and runs items of the current job until none remain.
  void drain() {
    for (;;) {
      std::size_t i;
      const std::function<void(std::size_t)>* job;
      {
        std::lock_guard lock(mutex_);
        if (job_ == nullptr || next_ >= job_size_) return;
        i = next_++;
        job = job_;
      }
      (*job)(i);
      std::lock_guard lock(mutex_);
      if (--unfinished_ == 0) done_.notify_all();
    }
  }

  void worker_loop(std::stop_token st) {
    std::size_t seen = 0;
    while (true) {
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return st.stop_requested() || generation_ != seen; });
        if (st.stop_requested()) return;
        seen = generation_;
      }
      drain();
    }
  }

  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t job_size_ = 0;
  std::size_t next_ = 0;
  std::size_t unfinished_ = 0;
  std::size_t generation_ = 0;
  std::vector<std::jthread> workers_;
};

}  // namespace trigsat
