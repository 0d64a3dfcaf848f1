#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace opauc {

using Engine = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t x);

// Stable seed derivation from a base seed and a path of identifiers,
// e.g. derive_seed(seed, {trial, fold, cell}).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

// Uniform integer in [0, bound) by rejection, independent of the standard
// library's distribution implementation.
std::uint64_t uniform_below(Engine& engine, std::uint64_t bound);

// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed);

// Standard normal draws from a seeded engine. The distribution object is
// owned alongside the engine so replaying from the same seed reproduces the
// exact sequence.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() { return normal_(engine_); }
  void fill(std::vector<double>& out) {
    for (double& v : out) v = normal_(engine_);
  }

 private:
  Engine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace opauc
