#pragma once

#include <atomic>
#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace crowdtrack {

// Minimal persistent pool for index-parallel loops. Work items are claimed
// from an atomic counter, so completion order varies across runs, but every
// call site writes results into per-index slots and reduces afterwards in
// index order; outputs are therefore identical for any worker count.
class ThreadPool {
 public:
  explicit ThreadPool(int threads);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int thread_count() const { return static_cast<int>(workers_.size()) + 1; }

  // Runs fn(0..n-1), blocking until done. The calling thread participates.
  // The first exception thrown by any item is rethrown here.
  void parallel_for(size_t n, const std::function<void(size_t)>& fn);

 private:
  void worker_loop();
  void run_items();

  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_start_;
  std::condition_variable cv_done_;
  const std::function<void(size_t)>* fn_ = nullptr;
  size_t n_ = 0;
  std::atomic<size_t> next_{0};
  std::atomic<size_t> done_count_{0};
  uint64_t generation_ = 0;
  int active_workers_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace crowdtrack
