#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace podlrom {

// Seeded generator whose output is fully specified by the seed: the engine
// is std::mt19937_64 and every derived distribution is implemented here, so
// streams do not depend on the standard library vendor.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via the Box-Muller transform; values come in pairs.
  double normal();

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  // In-place Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[index(i)]);
    }
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace podlrom
