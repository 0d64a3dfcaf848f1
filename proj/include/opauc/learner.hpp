#pragma once

// Uniform handle over the online learners so the harness and the CLI can
// train, score and serialize any of them.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "opauc/baselines.hpp"
#include "opauc/data.hpp"
#include "opauc/exact_learner.hpp"

namespace opauc {

enum class Algorithm { Opauc, OpaucSketch, UniSquare, UniExp, OpaucSubsample, OpaucProjection };

std::string_view algorithm_name(Algorithm algo);
std::optional<Algorithm> parse_algorithm(std::string_view name);

inline constexpr std::size_t kDefaultSketchWidth = 50;

struct LearnerConfig {
  Algorithm algo = Algorithm::Opauc;
  double eta = 1.0 / 64.0;
  double lambda = 1.0 / 1024.0;
  std::size_t tau = kDefaultSketchWidth;  // opauc-r
  std::size_t proj_dim = 0;               // opauc-f / opauc-rp
  std::uint64_t seed = 0;                 // sketch rows, projection map
};

class OnlineLearner {
 public:
  virtual ~OnlineLearner() = default;

  virtual StepOutcome observe(const Instance& x, bool want_loss = false) = 0;
  virtual double score(const Instance& x) const = 0;
  // Weights in the learner's own feature space.
  virtual std::span<const double> weights() const = 0;
  virtual nlohmann::ordered_json to_json(bool with_statistics = false) const = 0;

  bool diverged() const { return !all_finite(weights()); }
};

// Throws std::invalid_argument for inconsistent settings (e.g. a projection
// dimension that is not below dim).
std::unique_ptr<OnlineLearner> make_learner(const LearnerConfig& config, std::size_t dim);

// Model restored from JSON, sufficient for scoring.
class ScoringModel {
 public:
  static ScoringModel from_json(const nlohmann::json& j);

  Algorithm algorithm() const { return algo_; }
  std::size_t dim() const { return dim_; }
  const std::optional<ScalingParams>& scaling() const { return scaling_; }

  double score(const Instance& x) const;

 private:
  Algorithm algo_ = Algorithm::Opauc;
  std::size_t dim_ = 0;
  Vector w_;
  std::optional<ProjectionMap> map_;
  std::optional<ScalingParams> scaling_;
};

}  // namespace opauc
