#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tgn/tensor.hpp"

namespace tgn {

/// Seeded random source with platform-stable mappings: mt19937_64 gives the
/// same stream everywhere, and all derived draws avoid the
/// implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  real uniform() {
    return static_cast<real>((next_u64() >> 11) * 0x1.0p-53);
  }

  real uniform(real lo, real hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] inclusive.
  index uniform_int(index lo, index hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return lo + static_cast<index>(v % span);
  }

  bool bernoulli(real p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (index i = static_cast<index>(items.size()) - 1; i > 0; --i) {
      std::swap(items[i], items[uniform_int(0, i)]);
    }
  }

  std::string state() const {
    std::ostringstream os;
    os << gen_;
    return os.str();
  }

  void set_state(const std::string& s) {
    std::istringstream is(s);
    is >> gen_;
    if (is.fail()) throw Error("rng: malformed state string");
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace tgn
