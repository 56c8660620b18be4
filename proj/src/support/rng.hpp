#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ca::rng {

/// mt19937_64 raw output is pinned by the standard; the draw helpers
/// below avoid std distributions, whose sequences are not, so seeded
/// results reproduce across standard libraries.
class Engine {
 public:
  explicit Engine(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform draw in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % bound;
  }

  double unit_real() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 gen_;
};

template <typename T>
void shuffle(std::vector<T>& items, Engine& engine) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(engine.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Seeded permutation of [0, n). Sampling without replacement takes a
/// prefix of this; expanding a sample extends the prefix, so a grown
/// sample is a superset of the smaller one.
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed);

}  // namespace ca::rng
