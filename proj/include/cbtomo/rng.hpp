#pragma once

#include <cstdint>

namespace cbtomo {

// Counter-based generator: draw i of stream s is splitmix64(seed, s, i), so any
// draw can be reproduced without replaying the sequence.
class CounterRng {
 public:
  static constexpr const char* name = "splitmix64-counter/box-muller";

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next();
  // Uniform on (0, 1).
  double uniform();
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace cbtomo
