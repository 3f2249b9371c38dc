#include "mqfb/partition.hpp"

#include <string>

#include "mqfb/error.hpp"

namespace mqfb {

Partition::Partition(std::vector<std::int8_t> indicator) : indicator_(std::move(indicator)) {
  local_.resize(indicator_.size());
  for (std::size_t i = 0; i < indicator_.size(); ++i) {
    const auto f = indicator_[i];
    if (f == 1) {
      local_[i] = set_a_.size();
      set_a_.push_back(i);
    } else if (f == -1) {
      local_[i] = set_b_.size();
      set_b_.push_back(i);
    } else {
      throw Error(ErrorCode::invalid_argument,
                  "partition indicator must be +1 or -1, got " + std::to_string(f));
    }
  }
  if (set_a_.empty() || set_b_.empty()) {
    throw Error(ErrorCode::invalid_argument, "both sides of a partition must be nonempty");
  }
}

Partition Partition::from_set_a(std::size_t n, std::span<const std::size_t> set_a) {
  std::vector<std::int8_t> f(n, -1);
  for (auto i : set_a) {
    if (i >= n) throw Error(ErrorCode::invalid_argument, "vertex outside partition range");
    f[i] = 1;
  }
  return Partition(std::move(f));
}

}  // namespace mqfb
