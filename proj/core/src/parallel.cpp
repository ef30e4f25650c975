#include "mlh/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace mlh {

namespace {

std::atomic<unsigned> g_threads{0};  // 0 = not yet resolved
thread_local bool g_inside_worker = false;

unsigned resolve_threads() {
  unsigned n = g_threads.load(std::memory_order_relaxed);
  if (n == 0) {
    n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    g_threads.store(n, std::memory_order_relaxed);
  }
  return n;
}

/// Persistent workers that claim part indices of the current job; the caller
/// executes part 0 itself. One job runs at a time.
class Pool {
 public:
  static Pool& instance() {
    static Pool pool;
    return pool;
  }

  ~Pool() { shutdown(); }

  void run(std::size_t parts, const std::function<void(std::size_t)>& part) {
    std::unique_lock<std::mutex> job_lock(job_mutex_);
    ensure_workers(resolve_threads() - 1);
    {
      std::lock_guard<std::mutex> lock(state_mutex_);
      part_ = &part;
      parts_ = parts;
      next_part_ = 1;
      pending_ = parts - 1;
    }
    wake_.notify_all();

    g_inside_worker = true;  // nested parallel_for in part 0 runs inline
    part(0);
    g_inside_worker = false;

    std::unique_lock<std::mutex> lock(state_mutex_);
    done_.wait(lock, [this] { return pending_ == 0; });
    parts_ = 0;
    next_part_ = 0;
    part_ = nullptr;
  }

 private:
  void ensure_workers(std::size_t wanted) {
    if (workers_.size() == wanted) return;
    shutdown();
    stop_ = false;
    workers_.reserve(wanted);
    for (std::size_t w = 0; w < wanted; ++w) {
      workers_.emplace_back([this] { worker_loop(); });
    }
  }

  void shutdown() {
    {
      std::lock_guard<std::mutex> lock(state_mutex_);
      stop_ = true;
    }
    wake_.notify_all();
    for (auto& t : workers_) t.join();
    workers_.clear();
  }

  void worker_loop() {
    g_inside_worker = true;
    std::unique_lock<std::mutex> lock(state_mutex_);
    while (true) {
      wake_.wait(lock, [this] { return stop_ || next_part_ < parts_; });
      if (stop_) return;
      const std::size_t mine = next_part_++;
      const auto* part = part_;
      lock.unlock();
      (*part)(mine);
      lock.lock();
      if (--pending_ == 0) done_.notify_one();
    }
  }

  std::mutex job_mutex_;  // serializes concurrent parallel_for callers
  std::mutex state_mutex_;
  std::condition_variable wake_, done_;
  std::vector<std::thread> workers_;
  const std::function<void(std::size_t)>* part_ = nullptr;
  std::size_t parts_ = 0;
  std::size_t next_part_ = 0;
  std::size_t pending_ = 0;
  bool stop_ = false;
};

}  // namespace

void set_thread_count(unsigned n) { g_threads.store(n == 0 ? 1 : n, std::memory_order_relaxed); }

unsigned thread_count() { return resolve_threads(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  const unsigned workers = resolve_threads();
  // Nested calls run sequentially; the outer level already owns the cores.
  if (workers <= 1 || n < 2 || g_inside_worker) {
    fn(0, n);
    return;
  }
  const std::size_t parts = std::min<std::size_t>(workers, n);
  const std::size_t chunk = (n + parts - 1) / parts;
  const std::function<void(std::size_t)> part = [&](std::size_t p) {
    const std::size_t begin = p * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin < end) fn(begin, end);
  };
  Pool::instance().run(parts, part);
}

}  // namespace mlh
