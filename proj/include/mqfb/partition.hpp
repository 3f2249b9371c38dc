#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mqfb {

// Two-set vertex partition stored as a +1/-1 indicator (+1 means the vertex
// is in A). Both sides are nonempty. Index lists are kept in ascending order.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<std::int8_t> indicator);

  static Partition from_set_a(std::size_t n, std::span<const std::size_t> set_a);

  std::size_t size() const noexcept { return indicator_.size(); }
  bool in_a(std::size_t i) const { return indicator_[i] > 0; }
  std::int8_t sign(std::size_t i) const { return indicator_[i]; }

  const std::vector<std::int8_t>& indicator() const noexcept { return indicator_; }
  const std::vector<std::size_t>& set_a() const noexcept { return set_a_; }
  const std::vector<std::size_t>& set_b() const noexcept { return set_b_; }

  // Position of vertex i inside its own side (A or B).
  std::size_t local_index(std::size_t i) const { return local_[i]; }

  bool operator==(const Partition& other) const { return indicator_ == other.indicator_; }

 private:
  std::vector<std::int8_t> indicator_;
  std::vector<std::size_t> set_a_;
  std::vector<std::size_t> set_b_;
  std::vector<std::size_t> local_;
};

}  // namespace mqfb
