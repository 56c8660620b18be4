#include "support/rng.hpp"

#include <numeric>

namespace ca::rng {

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine engine(seed);
  shuffle(order, engine);
  return order;
}

}  // namespace ca::rng
