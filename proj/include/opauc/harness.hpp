#pragma once

// Repeated stratified k-fold cross-validation with an inner grid search over
// (eta, lambda), one pass of training per model, test AUC per outer fold.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "opauc/data.hpp"
#include "opauc/learner.hpp"

namespace opauc {

std::vector<double> default_eta_grid();     // 2^-12 .. 2^10
std::vector<double> default_lambda_grid();  // 2^-10 .. 2^2

struct ExperimentConfig {
  std::string data_path;
  Algorithm algo = Algorithm::Opauc;
  std::vector<double> eta_grid = default_eta_grid();
  std::vector<double> lambda_grid = default_lambda_grid();
  std::size_t tau = kDefaultSketchWidth;
  std::size_t proj_dim = 0;
  std::size_t folds = 5;
  std::size_t trials = 5;
  std::size_t inner_folds = 5;
  std::uint64_t seed = 0;
  std::optional<std::set<double>> positive_labels;

  void validate() const;  // throws std::invalid_argument
};

struct GridCell {
  double eta;
  double lambda;
  double inner_auc;
};

struct OuterEvaluation {
  std::size_t trial;
  std::size_t fold;
  double eta;
  double lambda;
  double test_auc;
};

struct EvalReport {
  ExperimentConfig config;
  // Inner-CV AUC per cell, averaged over all outer evaluations.
  std::vector<GridCell> cells;
  // Cell selected most often across outer evaluations.
  GridCell chosen{};
  std::vector<OuterEvaluation> outer;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over outer
  double wall_time_sec = 0.0;
};

// Index of the best cell: highest inner AUC, then smaller eta, then smaller
// lambda.
std::size_t grid_select(std::span<const GridCell> cells);

// Stratified assignment of rows to k folds: each class is shuffled and dealt
// round-robin, so every fold's class counts are within one of the ideal.
std::vector<std::vector<std::size_t>> stratified_folds(const Dataset& ds, std::size_t k,
                                                       std::uint64_t seed);

// Trains one model in a single pass over train (shuffled by shuffle_seed) and
// returns its test AUC. A model whose weights overflow ranks nothing and
// scores 0.5.
double train_and_score(const LearnerConfig& learner, const Dataset& train, const Dataset& test,
                       std::uint64_t shuffle_seed);

EvalReport run_cv(const ExperimentConfig& config);
EvalReport run_cv(const ExperimentConfig& config, const Dataset& ds);

nlohmann::ordered_json report_to_json(const EvalReport& report, bool with_wall_time = true);
// One row per outer evaluation.
void write_report_csv(std::ostream& out, const EvalReport& report);

// Worker count from OPAUC_THREADS, else the hardware concurrency.
std::size_t worker_count();
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace opauc
