#pragma once

// OPAUC with full second-order statistics: per-class running means and
// covariance matrices make the pairwise square loss of each arriving example
// against every earlier opposite-class example available in O(d^2), without
// retaining any instance.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "opauc/data.hpp"
#include "opauc/linalg.hpp"

namespace opauc {

class StepPolicy {
 public:
  enum class Kind { Constant, FixedHorizon };

  static StepPolicy constant(double eta);
  // eta = 1 / (kappa + sqrt(kappa^2 + kappa * horizon * loss_star / bound^2)),
  // kappa = 4 + lambda, where bound >= |w*| and horizon * loss_star bounds
  // the comparator's cumulative loss. Constant over the run.
  static StepPolicy fixed_horizon(double bound, double loss_star, double horizon);

  Kind kind() const { return kind_; }
  double step_size(double lambda) const;

 private:
  Kind kind_ = Kind::Constant;
  double eta_ = 0.0;
  double bound_ = 1.0;
  double loss_star_ = 0.0;
  double horizon_ = 1.0;
};

// Mean and (1/T-normalized) covariance of the examples of one class.
struct ClassMoments {
  std::size_t count = 0;
  Vector mean;
  Matrix cov;

  explicit ClassMoments(std::size_t dim = 0) : mean(dim, 0.0), cov(dim, dim) {}
};

struct ExactModelState {
  ExactModelState(std::size_t dim, double lambda);

  std::size_t dim;
  double lambda;
  Vector w;
  ClassMoments pos;
  ClassMoments neg;

  const ClassMoments& moments(Label y) const { return y == Label::Positive ? pos : neg; }
  ClassMoments& moments(Label y) { return y == Label::Positive ? pos : neg; }

  // Number of doubles held by the state; a function of dim only.
  std::size_t footprint_numbers() const;
};

// mean <- mean + (x - mean) / count_after
void update_mean(std::span<double> mean, std::size_t count_after, std::span<const double> x);

// Brings cov from the covariance of the first count_after - 1 vectors (mean
// mean_before) to the covariance of all count_after vectors (mean mean_after).
void update_covariance(Matrix& cov, std::span<const double> mean_before,
                       std::span<const double> mean_after, std::size_t count_after,
                       std::span<const double> x);

// Gradient of the per-step loss for (x, y) at w, using the opposite class's
// current statistics. nullopt when the opposite class is still empty.
std::optional<Vector> gradient_exact(const ExactModelState& state, std::span<const double> x,
                                     Label y, std::span<const double> w);
std::optional<Vector> gradient_exact(const ExactModelState& state, std::span<const double> x,
                                     Label y);

// Per-step loss: (lambda/2)|w|^2 plus the average half square loss of x
// against every opposite-class example so far, via the moment identity.
// Returns 0 when the opposite class is empty.
double loss_Lt(const ExactModelState& state, std::span<const double> x, Label y,
               std::span<const double> w);

struct StepOutcome {
  bool paired = false;
  // Loss of this step at the pre-update weights; only filled when requested.
  std::optional<double> loss;
};

// One streaming step: own-class statistics first, then the weight update if a
// pair exists.
StepOutcome step(ExactModelState& state, const Instance& x, double eta, bool want_loss = false);

ExactModelState train_exact(const Dataset& ds, double lambda, const StepPolicy& policy,
                            std::optional<std::uint64_t> shuffle_seed = std::nullopt);

}  // namespace opauc
