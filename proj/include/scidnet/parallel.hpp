#pragma once

#include <cstddef>
#include <functional>

namespace scidnet {

/// Runs body(i) for i in [0, count). Each index must write only to its own
/// output slot; results are then independent of the schedule.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Caps worker threads for the lifetime of the returned guard (0 = all cores).
class ThreadLimit {
 public:
  explicit ThreadLimit(std::size_t threads);
  ~ThreadLimit();
  ThreadLimit(const ThreadLimit&) = delete;
  ThreadLimit& operator=(const ThreadLimit&) = delete;

 private:
  void* control_ = nullptr;
};

}  // namespace scidnet
