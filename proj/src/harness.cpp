#include "opauc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "opauc/eval.hpp"
#include "opauc/random.hpp"

namespace opauc {

namespace {

// Tags that keep the derived seed streams apart.
constexpr std::uint64_t kFoldTag = 0x666f6c64;
constexpr std::uint64_t kInnerTag = 0x696e6e72;
constexpr std::uint64_t kShuffleTag = 0x73687566;
constexpr std::uint64_t kFinalTag = 0x66696e6c;

std::vector<double> powers_of_two(int lo, int hi) {
  std::vector<double> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

void require_both_classes(const Dataset& ds, const std::string& what) {
  if (ds.pos_count() == 0 || ds.neg_count() == 0) {
    throw std::runtime_error(what + " contains a single class; AUC is undefined");
  }
}

struct Split {
  Dataset train;
  Dataset test;
};

std::vector<Split> make_splits(const Dataset& ds, std::size_t k, std::uint64_t seed,
                               const std::string& what) {
  const auto folds = stratified_folds(ds, k, seed);
  std::vector<Split> out;
  out.reserve(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_rows;
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::vector<std::size_t> test_rows = folds[f];
    std::sort(test_rows.begin(), test_rows.end());
    Split s{ds.subset(train_rows), ds.subset(test_rows)};
    require_both_classes(s.train, what + " training fold " + std::to_string(f));
    require_both_classes(s.test, what + " test fold " + std::to_string(f));
    out.push_back(std::move(s));
  }
  return out;
}

LearnerConfig cell_learner(const ExperimentConfig& c, double eta, double lambda,
                           std::uint64_t seed) {
  LearnerConfig l;
  l.algo = c.algo;
  l.eta = eta;
  l.lambda = lambda;
  l.tau = c.tau;
  l.proj_dim = c.proj_dim;
  l.seed = seed;
  return l;
}

}  // namespace

std::vector<double> default_eta_grid() { return powers_of_two(-12, 10); }
std::vector<double> default_lambda_grid() { return powers_of_two(-10, 2); }

void ExperimentConfig::validate() const {
  if (folds < 2) throw std::invalid_argument("folds must be at least 2");
  if (inner_folds < 2) throw std::invalid_argument("inner folds must be at least 2");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (eta_grid.empty() || lambda_grid.empty()) throw std::invalid_argument("grids must be nonempty");
  for (double e : eta_grid) {
    if (!(e > 0.0)) throw std::invalid_argument("eta grid values must be positive");
  }
  for (double l : lambda_grid) {
    if (!(l >= 0.0)) throw std::invalid_argument("lambda grid values must be nonnegative");
  }
  if (algo == Algorithm::OpaucSketch && tau < 1) throw std::invalid_argument("tau must be >= 1");
  if ((algo == Algorithm::OpaucSubsample || algo == Algorithm::OpaucProjection) && proj_dim < 1) {
    throw std::invalid_argument("projection dimension must be >= 1");
  }
}

std::size_t grid_select(std::span<const GridCell> cells) {
  if (cells.empty()) throw std::invalid_argument("grid_select: no cells");
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const GridCell& a = cells[i];
    const GridCell& b = cells[best];
    if (a.inner_auc > b.inner_auc ||
        (a.inner_auc == b.inner_auc &&
         (a.eta < b.eta || (a.eta == b.eta && a.lambda < b.lambda)))) {
      best = i;
    }
  }
  return best;
}

std::vector<std::vector<std::size_t>> stratified_folds(const Dataset& ds, std::size_t k,
                                                       std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_folds: k must be at least 2");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (ds[i].label == Label::Positive ? pos : neg).push_back(i);
  }
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t slot = 0;
  // negatives continue the round-robin where positives stopped, which keeps
  // fold sizes within one of each other
  for (auto* rows : {&pos, &neg}) {
    const auto order = permutation(rows->size(), derive_seed(seed, {rows == &pos ? 1u : 2u}));
    for (std::size_t i : order) {
      folds[slot % k].push_back((*rows)[i]);
      ++slot;
    }
  }
  return folds;
}

double train_and_score(const LearnerConfig& config, const Dataset& train, const Dataset& test,
                       std::uint64_t shuffle_seed) {
  auto learner = make_learner(config, train.dim());
  for (const Instance* x : stream(train, shuffle_seed)) {
    learner->observe(*x);
    if (learner->diverged()) return 0.5;
  }
  std::vector<ScoredExample> scored;
  scored.reserve(test.size());
  for (const Instance& x : test.instances()) scored.push_back({learner->score(x), x.label});
  for (const auto& s : scored) {
    if (!std::isfinite(s.score)) return 0.5;
  }
  return auc(scored);
}

EvalReport run_cv(const ExperimentConfig& config) {
  ParseOptions options;
  options.positive_labels = config.positive_labels;
  return run_cv(config, load_libsvm(config.data_path, options));
}

EvalReport run_cv(const ExperimentConfig& config, const Dataset& ds) {
  config.validate();
  require_both_classes(ds, "dataset");
  const auto start = std::chrono::steady_clock::now();

  std::vector<GridCell> grid;
  for (double eta : config.eta_grid) {
    for (double lambda : config.lambda_grid) grid.push_back({eta, lambda, 0.0});
  }
  const std::size_t n_cells = grid.size();
  std::vector<double> cell_sum(n_cells, 0.0);
  std::vector<std::size_t> chosen_count(n_cells, 0);

  EvalReport report;
  report.config = config;
  const std::uint64_t seed = config.seed;

  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    auto outer = make_splits(ds, config.folds, derive_seed(seed, {trial, kFoldTag}), "outer");
    for (std::size_t fold = 0; fold < config.folds; ++fold) {
      // scaling statistics come from the training fold only
      const ScalingParams params = fit_scaling(outer[fold].train);
      const Dataset train = apply_scaling(outer[fold].train, params);
      const Dataset test = apply_scaling(outer[fold].test, params);

      const auto inner = make_splits(train, config.inner_folds,
                                     derive_seed(seed, {trial, fold, kInnerTag}), "inner");
      const std::size_t n_inner = inner.size();
      std::vector<double> inner_auc(n_cells * n_inner, 0.0);
      parallel_for(n_cells * n_inner, [&](std::size_t task) {
        const std::size_t cell = task / n_inner;
        const std::size_t i = task % n_inner;
        const auto learner = cell_learner(config, grid[cell].eta, grid[cell].lambda,
                                          derive_seed(seed, {trial, fold, i, cell}));
        inner_auc[task] = train_and_score(learner, inner[i].train, inner[i].test,
                                          derive_seed(seed, {trial, fold, i, kShuffleTag}));
      });

      std::vector<GridCell> cells = grid;
      for (std::size_t cell = 0; cell < n_cells; ++cell) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_inner; ++i) s += inner_auc[cell * n_inner + i];
        cells[cell].inner_auc = s / static_cast<double>(n_inner);
        cell_sum[cell] += cells[cell].inner_auc;
      }
      const std::size_t best = grid_select(cells);
      ++chosen_count[best];

      const auto learner = cell_learner(config, cells[best].eta, cells[best].lambda,
                                        derive_seed(seed, {trial, fold, kFinalTag}));
      const double test_auc =
          train_and_score(learner, train, test, derive_seed(seed, {trial, fold, kShuffleTag}));
      report.outer.push_back({trial, fold, cells[best].eta, cells[best].lambda, test_auc});
    }
  }

  const double n_outer = static_cast<double>(report.outer.size());
  report.cells = grid;
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    report.cells[cell].inner_auc = cell_sum[cell] / n_outer;
  }
  // most frequent choice; ties resolved like grid_select via a count-keyed view
  std::vector<GridCell> by_count = grid;
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    by_count[cell].inner_auc = static_cast<double>(chosen_count[cell]);
  }
  const std::size_t chosen = grid_select(by_count);
  report.chosen = report.cells[chosen];

  double sum = 0.0;
  for (const auto& o : report.outer) sum += o.test_auc;
  report.mean = sum / n_outer;
  double var = 0.0;
  for (const auto& o : report.outer) var += (o.test_auc - report.mean) * (o.test_auc - report.mean);
  report.std = std::sqrt(var / n_outer);
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

nlohmann::ordered_json report_to_json(const EvalReport& r, bool with_wall_time) {
  nlohmann::ordered_json cfg;
  cfg["data_path"] = r.config.data_path;
  cfg["algo"] = algorithm_name(r.config.algo);
  cfg["eta_grid"] = r.config.eta_grid;
  cfg["lambda_grid"] = r.config.lambda_grid;
  if (r.config.algo == Algorithm::OpaucSketch) cfg["tau"] = r.config.tau;
  if (r.config.algo == Algorithm::OpaucSubsample || r.config.algo == Algorithm::OpaucProjection) {
    cfg["proj_dim"] = r.config.proj_dim;
  }
  cfg["folds"] = r.config.folds;
  cfg["trials"] = r.config.trials;
  cfg["inner_folds"] = r.config.inner_folds;
  cfg["seed"] = r.config.seed;
  if (r.config.positive_labels) {
    cfg["positive_labels"] =
        std::vector<double>(r.config.positive_labels->begin(), r.config.positive_labels->end());
  }

  nlohmann::ordered_json j;
  j["config"] = cfg;
  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"eta", c.eta}, {"lambda", c.lambda}, {"inner_auc", c.inner_auc}});
  }
  j["cells"] = cells;
  j["chosen"] = {{"eta", r.chosen.eta}, {"lambda", r.chosen.lambda}};
  auto outer_auc = nlohmann::ordered_json::array();
  auto selections = nlohmann::ordered_json::array();
  for (const auto& o : r.outer) {
    outer_auc.push_back(o.test_auc);
    selections.push_back({{"trial", o.trial},
                          {"fold", o.fold},
                          {"eta", o.eta},
                          {"lambda", o.lambda},
                          {"test_auc", o.test_auc}});
  }
  j["outer_auc"] = outer_auc;
  j["selections"] = selections;
  j["mean"] = r.mean;
  j["std"] = r.std;
  if (with_wall_time) j["wall_time_sec"] = r.wall_time_sec;
  return j;
}

void write_report_csv(std::ostream& out, const EvalReport& r) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "algo,trial,fold,eta,lambda,test_auc\n";
  for (const auto& o : r.outer) {
    out << algorithm_name(r.config.algo) << ',' << o.trial << ',' << o.fold << ',' << o.eta << ','
        << o.lambda << ',' << o.test_auc << '\n';
  }
  out.precision(old_precision);
}

std::size_t worker_count() {
  if (const char* env = std::getenv("OPAUC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace opauc
