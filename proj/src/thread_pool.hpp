#pragma once

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ffattn {

// Fixed-size pool for batch-parallel loops. parallel_for splits [0, n)
// into one contiguous chunk per worker; the caller runs chunk 0 itself.
// Chunks never overlap, so bodies that write disjoint output rows and do
// their reductions serially per output element give bit-identical results
// for every worker count.
class ThreadPool {
 public:
  explicit ThreadPool(int workers) : workers_(workers < 1 ? 1 : workers) {
    for (int i = 1; i < workers_; ++i) {
      threads_.emplace_back([this, i] { worker_loop(i); });
    }
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  ~ThreadPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_start_.notify_all();
    for (auto& t : threads_) t.join();
  }

  int workers() const { return workers_; }

  void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body) {
    if (n <= 0) return;
    if (workers_ == 1 || n == 1) {
      body(0, n);
      return;
    }
    {
      std::lock_guard lock(mu_);
      body_ = &body;
      n_ = n;
      pending_ = workers_ - 1;
      error_ = nullptr;
      ++generation_;
    }
    cv_start_.notify_all();
    run_chunk(0);
    {
      std::unique_lock lock(mu_);
      cv_done_.wait(lock, [this] { return pending_ == 0; });
      body_ = nullptr;
      if (error_) std::rethrow_exception(error_);
    }
  }

 private:
  void run_chunk(int index) {
    const std::int64_t begin = n_ * index / workers_;
    const std::int64_t end = n_ * (index + 1) / workers_;
    if (begin >= end) return;
    try {
      (*body_)(begin, end);
    } catch (...) {
      std::lock_guard lock(mu_);
      if (!error_) error_ = std::current_exception();
    }
  }

  void worker_loop(int index) {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(mu_);
        cv_start_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      run_chunk(index);
      {
        std::lock_guard lock(mu_);
        --pending_;
      }
      cv_done_.notify_one();
    }
  }

  const int workers_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_start_;
  std::condition_variable cv_done_;
  const std::function<void(std::int64_t, std::int64_t)>* body_ = nullptr;
  std::int64_t n_ = 0;
  int pending_ = 0;
  std::uint64_t generation_ = 0;
  std::exception_ptr error_;
  bool stop_ = false;
};

// Chunked loop that also works without a pool.
inline void parallel_for(ThreadPool* pool, std::int64_t n,
                         const std::function<void(std::int64_t, std::int64_t)>& body) {
  if (pool) {
    pool->parallel_for(n, body);
  } else if (n > 0) {
    body(0, n);
  }
}

}  // namespace ffattn
