#include "opauc/random.hpp"

#include <numeric>
#include <utility>

namespace opauc {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix_seed(base);
  for (std::uint64_t p : path) h = mix_seed(h ^ mix_seed(p + 0x632be59bd9b4e019ULL));
  return h;
}

std::uint64_t uniform_below(Engine& engine, std::uint64_t bound) {
  // reject the tail that would bias the modulo
  const std::uint64_t limit = Engine::max() - (Engine::max() % bound);
  std::uint64_t v;
  do {
    v = engine();
  } while (v >= limit);
  return v % bound;
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine engine(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(engine, i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace opauc
