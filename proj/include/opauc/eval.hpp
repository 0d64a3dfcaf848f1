#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "opauc/data.hpp"
#include "opauc/linalg.hpp"

namespace opauc {

struct ScoredExample {
  double score;
  Label label;
};

// Fraction of (positive, negative) pairs ranked correctly, ties counted as
// one half. Computed from average ranks in O(n log n). Throws when either
// class is missing or a score is not finite.
double auc(std::span<const ScoredExample> scored);

// Scores every instance of ds with the linear model w.
std::vector<ScoredExample> score_linear(const Dataset& ds, std::span<const double> w);

enum class ObjectiveMode {
  Pairwise,  // explicit double sum over (positive, negative) pairs
  Moments,   // class means and variances of the projected scores
};

// (lambda/2)|w|^2 + sum_ij (1 - w^T(x_i^+ - x_j^-))^2 / (2 n+ n-)
double surrogate_objective(std::span<const double> w, const Dataset& ds, double lambda,
                           ObjectiveMode mode = ObjectiveMode::Moments);

struct RegretPoint {
  std::size_t t;
  double cumulative_loss;
  std::optional<double> comparator_loss;

  double average_loss() const { return cumulative_loss / static_cast<double>(t); }
};

struct RegretTrace {
  std::vector<RegretPoint> points;
};

// Powers of two up to n, with n itself appended when it is not one.
std::vector<std::size_t> geometric_checkpoints(std::size_t n);

// Accumulates per-step losses and snapshots them at the checkpoints.
class RegretRecorder {
 public:
  explicit RegretRecorder(std::vector<std::size_t> checkpoints);

  void record(double loss, std::optional<double> comparator_loss = std::nullopt);
  const RegretTrace& trace() const { return trace_; }
  std::size_t steps() const { return t_; }

 private:
  std::vector<std::size_t> checkpoints_;
  std::size_t next_ = 0;
  std::size_t t_ = 0;
  double cumulative_ = 0.0;
  double comparator_cumulative_ = 0.0;
  bool has_comparator_ = false;
  RegretTrace trace_;
};

// One online step: returns the step's loss at the pre-update iterate and,
// when a comparator is tracked, the same step's loss at the comparator.
struct StepLosses {
  double iterate;
  std::optional<double> comparator;
};
using LossStep = std::function<StepLosses(const Instance&)>;

RegretTrace regret_trace(std::span<const Instance* const> stream, const LossStep& step,
                         const std::vector<std::size_t>& checkpoints);

// CSV with header t,cum_loss,avg_loss (plus comparator columns when present).
void write_trace_csv(std::ostream& out, const RegretTrace& trace);

}  // namespace opauc
