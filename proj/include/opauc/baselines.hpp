#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "opauc/data.hpp"
#include "opauc/exact_learner.hpp"
#include "opauc/linalg.hpp"

namespace opauc {

enum class UnivariateLoss { Square, Exponential };

// Online univariate learner with class-ratio weights taken from the running
// counts: a positive example is weighted T-/t, a negative one T+/t.
struct UnivariateModel {
  UnivariateModel(std::size_t dim, UnivariateLoss loss, double lambda);

  Vector w;
  UnivariateLoss loss;
  std::size_t t_pos = 0;
  std::size_t t_neg = 0;
  double lambda;

  double weight(Label y) const;
};

// Margins inside exp() are clipped to this range.
inline constexpr double kExpMarginClip = 30.0;

// weight * l(y w^T x) + (lambda/2)|w|^2, using the model's current counts.
double univariate_loss(const UnivariateModel& model, const Instance& x, std::span<const double> w);
Vector univariate_gradient(const UnivariateModel& model, const Instance& x,
                           std::span<const double> w);

// Counts first, then w <- w - eta * gradient.
void univariate_step(UnivariateModel& model, const Instance& x, double eta);

// Fixed low-dimensional view of the input used by the cheap high-dimensional
// variants: either k sampled coordinates or a Gaussian projection H^T x with
// H ~ N(0, 1/k) entries.
class ProjectionMap {
 public:
  enum class Mode { Subsample, GaussianProjection };

  static ProjectionMap subsample(std::size_t dim, std::vector<std::uint32_t> kept);
  static ProjectionMap random_subsample(std::size_t dim, std::size_t k, std::uint64_t seed);
  static ProjectionMap gaussian(std::size_t dim, std::size_t k, std::uint64_t seed);
  // Explicit H (dim x k); mainly for tests.
  static ProjectionMap from_matrix(Matrix h);

  Mode mode() const { return mode_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  const std::vector<std::uint32_t>& kept() const { return kept_; }
  const Matrix& matrix() const { return h_; }

  Instance project(const Instance& x) const;
  Dataset project(const Dataset& ds) const;

 private:
  Mode mode_ = Mode::Subsample;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  std::vector<std::uint32_t> kept_;       // 1-based, sorted
  std::vector<std::uint32_t> position_;   // input feature -> 1-based output slot, 0 if dropped
  Matrix h_;
};

Instance project_instance(const ProjectionMap& map, const Instance& x);

// Exact OPAUC over the projected stream.
struct ProjectedModel {
  ProjectedModel(ProjectionMap map, double lambda);

  ProjectionMap map;
  ExactModelState inner;

  StepOutcome step(const Instance& x, double eta, bool want_loss = false);
  double score(const Instance& x) const;
};

}  // namespace opauc
