#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <future>
#include <mutex>
#include <optional>
#include <thread>
#include <type_traits>
#include <utility>

namespace sparrow {

/// Blocking multi-producer multi-consumer queue. After close(), send()
/// returns false and receive() drains what is left, then returns nullopt.
template <typename T>
class Channel {
 public:
  explicit Channel(std::size_t capacity = 0) : capacity_(capacity) {}

  bool send(T value) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] {
      return closed_ || capacity_ == 0 || queue_.size() < capacity_;
    });
    if (closed_) return false;
    queue_.push_back(std::move(value));
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> receive() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return closed_ || !queue_.empty(); });
    if (queue_.empty()) return std::nullopt;
    T value = std::move(queue_.front());
    queue_.pop_front();
    not_full_.notify_one();
    return value;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return queue_.size();
  }

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> queue_;
  bool closed_ = false;
};

/// A thread that owns some state and runs submitted jobs on it one at a
/// time, in submission order. Results and exceptions come back as futures.
class Agent {
 public:
  Agent() : thread_([this] { run(); }) {}
  ~Agent() { stop(); }
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  template <typename F>
  auto submit(F job) -> std::future<std::invoke_result_t<F>> {
    std::packaged_task<std::invoke_result_t<F>()> task(std::move(job));
    auto future = task.get_future();
    jobs_.send(std::packaged_task<void()>(
        [task = std::move(task)]() mutable { task(); }));
    return future;
  }

  /// Finishes queued jobs and joins the thread.
  void stop() {
    jobs_.close();
    if (thread_.joinable()) thread_.join();
  }

 private:
  void run() {
    while (auto job = jobs_.receive()) (*job)();
  }

  Channel<std::packaged_task<void()>> jobs_;
  std::thread thread_;
};

}  // namespace sparrow
