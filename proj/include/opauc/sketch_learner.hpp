#pragma once

// Low-rank OPAUC for high-dimensional data. Each class keeps Z = X R, where
// R stacks one Gaussian row r_i / sqrt(tau) per example, plus the running
// sum rho of those rows. The approximate covariance
//
//   S_hat = Z Z^T / T - (|rho|^2 / T^2) c c^T
//
// is only ever applied to vectors through Z (Z^T w), so the state is
// O(tau * d) and a d x d buffer is never formed.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "opauc/data.hpp"
#include "opauc/exact_learner.hpp"
#include "opauc/linalg.hpp"
#include "opauc/random.hpp"

namespace opauc {

// One class's sketch Z (d x tau). Rows are materialized on the first
// occurrence of their feature, so sparse streams only pay for the features
// they actually touch.
class SketchFactor {
 public:
  SketchFactor(std::size_t dim, std::size_t tau);

  std::size_t dim() const { return dim_; }
  std::size_t tau() const { return tau_; }

  // Z += x r^T and rho += r, where r is already scaled. Touches exactly
  // nnz(x) * tau entries of Z.
  void add(const Instance& x, std::span<const double> r);

  // out = Z^T w (length tau)
  void project(std::span<const double> w, std::span<double> out) const;
  // out += alpha * Z v (out length dim)
  void expand_add(std::span<const double> v, double alpha, std::span<double> out) const;

  const Vector& rho() const { return rho_; }
  std::size_t touched_rows() const { return features_.size(); }
  // Row of Z for 0-based feature j; empty when the feature was never seen.
  std::span<const double> row(std::size_t j) const;

  // Dense d x tau copy for debugging and tests.
  Matrix dense() const;

  std::size_t footprint_numbers() const;

 private:
  static constexpr std::size_t kBlockRows = 256;
  static constexpr std::uint32_t kAbsent = 0xffffffffu;

  double* slot_row(std::size_t slot);
  const double* slot_row(std::size_t slot) const;

  std::size_t dim_;
  std::size_t tau_;
  std::vector<std::uint32_t> slot_of_feature_;
  std::vector<std::uint32_t> features_;
  std::vector<std::unique_ptr<double[]>> blocks_;
  Vector rho_;
};

struct SketchClass {
  SketchClass(std::size_t dim, std::size_t tau) : mean(dim, 0.0), z(dim, tau) {}

  std::size_t count = 0;
  Vector mean;
  SketchFactor z;
};

struct SketchModelState {
  SketchModelState(std::size_t dim, std::size_t tau, double lambda, std::uint64_t seed);

  std::size_t dim;
  std::size_t tau;
  double lambda;
  std::uint64_t seed;
  Vector w;
  SketchClass pos;
  SketchClass neg;
  GaussianStream rng;

  const SketchClass& side(Label y) const { return y == Label::Positive ? pos : neg; }
  SketchClass& side(Label y) { return y == Label::Positive ? pos : neg; }

  std::size_t footprint_numbers() const;
};

// tau standard normal draws; exactly tau values are consumed from the stream.
Vector draw_sketch_row(GaussianStream& rng, std::size_t tau);

// Draws this example's sketch row and folds x into its class's count, mean,
// Z and rho. Returns the scaled row r / sqrt(tau) that was applied.
Vector update_sketch(SketchModelState& state, const Instance& x);

// Approximate covariance applied to w: S_hat w for the given class.
Vector apply_sketch_covariance(const SketchClass& cls, std::span<const double> w);

std::optional<Vector> gradient_sketch(const SketchModelState& state, const Instance& x,
                                      std::span<const double> w);
std::optional<Vector> gradient_sketch(const SketchModelState& state, const Instance& x);

double loss_sketch(const SketchModelState& state, const Instance& x, std::span<const double> w);

StepOutcome step(SketchModelState& state, const Instance& x, double eta, bool want_loss = false);

SketchModelState train_sketch(const Dataset& ds, double lambda, std::size_t tau,
                              const StepPolicy& policy, std::uint64_t seed,
                              std::optional<std::uint64_t> shuffle_seed = std::nullopt);

}  // namespace opauc
