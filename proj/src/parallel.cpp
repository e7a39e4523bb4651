#include "scidnet/parallel.hpp"

#include <tbb/global_control.h>
#include <tbb/parallel_for.h>

namespace scidnet {

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  if (count == 1) {
    body(0);
    return;
  }
  tbb::parallel_for(std::size_t{0}, count, [&](std::size_t i) { body(i); });
}

ThreadLimit::ThreadLimit(std::size_t threads) {
  if (threads > 0) {
    control_ = new tbb::global_control(tbb::global_control::max_allowed_parallelism, threads);
  }
}

ThreadLimit::~ThreadLimit() { delete static_cast<tbb::global_control*>(control_); }

}  // namespace scidnet
