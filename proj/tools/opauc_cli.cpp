// opauc: train, evaluate and benchmark one-pass AUC learners on LIBSVM data.
//
// Exit status: 0 on success, 1 on usage errors, 2 on data errors.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "opauc/data.hpp"
#include "opauc/eval.hpp"
#include "opauc/exact_learner.hpp"
#include "opauc/harness.hpp"
#include "opauc/learner.hpp"
#include "opauc/sketch_learner.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
}

int parse_int(const std::string& s) {
  const double v = parse_number(s);
  if (v != std::floor(v)) throw UsageError("not an integer: '" + s + "'");
  return static_cast<int>(v);
}

// Grid syntax: comma-separated items, each a number, 2^k, or a:b meaning
// 2^a, 2^(a+1), ..., 2^b.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    if (const auto colon = item.find(':'); colon != std::string::npos) {
      const int lo = parse_int(item.substr(0, colon));
      const int hi = parse_int(item.substr(colon + 1));
      if (lo > hi) throw UsageError("empty grid range '" + item + "'");
      for (int e = lo; e <= hi; ++e) out.push_back(std::ldexp(1.0, e));
    } else if (item.rfind("2^", 0) == 0) {
      out.push_back(std::ldexp(1.0, parse_int(item.substr(2))));
    } else {
      out.push_back(parse_number(item));
    }
  }
  if (out.empty()) throw UsageError("empty grid");
  return out;
}

std::optional<std::set<double>> parse_label_set(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::set<double> labels;
  for (const auto& item : split(text, ',')) labels.insert(parse_number(item));
  return labels;
}

opauc::Algorithm require_algorithm(const std::string& name) {
  const auto algo = opauc::parse_algorithm(name);
  if (!algo) throw UsageError("unknown algorithm '" + name + "'");
  return *algo;
}

void check_model_flags(opauc::Algorithm algo, const CLI::Option* tau, const CLI::Option* proj) {
  if (algo == opauc::Algorithm::OpaucSketch && tau->count() == 0) {
    throw UsageError("--algo opauc-r requires --tau");
  }
  if ((algo == opauc::Algorithm::OpaucSubsample || algo == opauc::Algorithm::OpaucProjection) &&
      proj->count() == 0) {
    throw UsageError("--algo opauc-f/opauc-rp requires --proj-dim");
  }
}

opauc::Dataset load(const std::string& path, const std::string& positive_labels) {
  opauc::ParseOptions options;
  options.positive_labels = parse_label_set(positive_labels);
  return opauc::load_libsvm(path, options);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes to path, or stdout when path is empty.
void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string format_auc(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g\n", v);
  return buf;
}

double model_auc(const opauc::ScoringModel& model, const opauc::Dataset& ds) {
  std::vector<opauc::ScoredExample> scored;
  scored.reserve(ds.size());
  for (const auto& x : ds.instances()) scored.push_back({model.score(x), x.label});
  return opauc::auc(scored);
}

struct ModelFlags {
  std::string algo = "opauc";
  double eta = 1.0 / 64.0;
  double lambda = 1.0 / 1024.0;
  std::size_t tau = opauc::kDefaultSketchWidth;
  std::size_t proj_dim = 0;
  std::uint64_t seed = 0;
  std::string positive_labels;
  CLI::Option* tau_opt = nullptr;
  CLI::Option* proj_opt = nullptr;

  void add_to(CLI::App* app, bool with_eta) {
    app->add_option("--algo", algo, "opauc, opauc-r, uni-squ, uni-exp, opauc-f, opauc-rp");
    if (with_eta) {
      app->add_option("--eta", eta, "constant step size");
      app->add_option("--lambda", lambda, "regularization");
    }
    tau_opt = app->add_option("--tau", tau, "sketch width (opauc-r)");
    proj_opt = app->add_option("--proj-dim", proj_dim, "projected dimension (opauc-f, opauc-rp)");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--positive-labels", positive_labels,
                    "comma-separated labels mapped to +1; all others map to -1");
  }
};

int run(int argc, char** argv) {
  CLI::App app{"Single-pass AUC learners for LIBSVM data"};
  app.require_subcommand(1);

  // train
  ModelFlags train_flags;
  std::string train_data;
  std::string train_out;
  bool train_scale = false;
  bool train_shuffle = false;
  bool train_stats = false;
  auto* train = app.add_subcommand("train", "fit one model in a single pass");
  train_flags.add_to(train, true);
  train->add_flag("--scale", train_scale, "scale features to [-1,1] (params stored in the model)");
  train->add_flag("--shuffle", train_shuffle, "shuffle the stream with --seed");
  train->add_flag("--with-statistics", train_stats, "also export covariances / sketches");
  train->add_option("--out", train_out, "model JSON path (default stdout)");
  train->add_option("data", train_data, "LIBSVM training file")->required();

  // eval
  std::string eval_model;
  std::string eval_data;
  std::string eval_labels;
  auto* eval = app.add_subcommand("eval", "print the AUC of a model on a data file");
  eval->add_option("--model", eval_model, "model JSON")->required();
  eval->add_option("--positive-labels", eval_labels, "comma-separated labels mapped to +1");
  eval->add_option("data", eval_data, "LIBSVM file")->required();

  // bench
  ModelFlags bench_flags;
  std::string bench_data;
  std::string bench_out;
  std::string bench_format = "json";
  std::string eta_grid;
  std::string lambda_grid;
  std::size_t folds = 5;
  std::size_t trials = 5;
  auto* bench = app.add_subcommand("bench", "repeated k-fold CV with inner grid search");
  bench_flags.add_to(bench, false);
  bench->add_option("--folds", folds, "outer folds");
  bench->add_option("--trials", trials, "repetitions of the k-fold split");
  bench->add_option("--eta-grid", eta_grid, "e.g. -12:10 (powers of two) or 0.01,0.1");
  bench->add_option("--lambda-grid", lambda_grid, "e.g. -10:2");
  bench->add_option("--out", bench_out, "report path (default stdout)");
  bench->add_option("--format", bench_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  bench->add_option("data", bench_data, "LIBSVM file")->required();

  // trace
  ModelFlags trace_flags;
  std::string trace_data;
  std::string trace_out;
  std::string step_policy = "constant";
  double bound = 1.0;
  double loss_star = 0.0;
  std::string comparator;
  bool trace_shuffle = false;
  bool trace_scale = false;
  auto* trace = app.add_subcommand("trace", "cumulative per-step loss along one pass (CSV)");
  trace_flags.add_to(trace, true);
  trace->add_option("--step-policy", step_policy, "constant or fixed-horizon")
      ->check(CLI::IsMember({"constant", "fixed-horizon"}));
  trace->add_option("--bound", bound, "norm bound on the comparator (fixed-horizon)");
  trace->add_option("--loss-star", loss_star, "average comparator loss (fixed-horizon)");
  trace->add_option("--comparator", comparator, "model JSON whose weights serve as comparator");
  trace->add_flag("--shuffle", trace_shuffle, "shuffle the stream with --seed");
  trace->add_flag("--scale", trace_scale, "scale features to [-1,1] before the pass");
  trace->add_option("--out", trace_out, "CSV path (default stdout)");
  trace->add_option("data", trace_data, "LIBSVM file")->required();

  // scale
  auto* scale = app.add_subcommand("scale", "fit or apply [-1,1] feature scaling");
  scale->require_subcommand(1);
  std::string fit_data;
  std::string fit_out;
  std::string fit_labels;
  auto* scale_fit = scale->add_subcommand("fit", "write scaling params JSON");
  scale_fit->add_option("data", fit_data, "LIBSVM training file")->required();
  scale_fit->add_option("--out", fit_out, "params JSON path (default stdout)");
  scale_fit->add_option("--positive-labels", fit_labels, "comma-separated labels mapped to +1");
  std::string apply_data;
  std::string apply_params;
  std::string apply_out;
  std::string apply_labels;
  auto* scale_apply = scale->add_subcommand("apply", "scale a LIBSVM file");
  scale_apply->add_option("data", apply_data, "LIBSVM file")->required();
  scale_apply->add_option("--params", apply_params, "params JSON")->required();
  scale_apply->add_option("--out", apply_out, "output path (default stdout)");
  scale_apply->add_option("--positive-labels", apply_labels, "comma-separated labels mapped to +1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*train) {
      opauc::LearnerConfig config;
      config.algo = require_algorithm(train_flags.algo);
      check_model_flags(config.algo, train_flags.tau_opt, train_flags.proj_opt);
      config.eta = train_flags.eta;
      config.lambda = train_flags.lambda;
      config.tau = train_flags.tau;
      config.proj_dim = train_flags.proj_dim;
      config.seed = train_flags.seed;
      if (!(config.eta > 0.0) || config.lambda < 0.0) {
        throw UsageError("need --eta > 0 and --lambda >= 0");
      }

      const opauc::Dataset raw = load(train_data, train_flags.positive_labels);
      std::optional<opauc::ScalingParams> params;
      if (train_scale) params = opauc::fit_scaling(raw);
      const opauc::Dataset ds = params ? opauc::apply_scaling(raw, *params) : raw;

      std::unique_ptr<opauc::OnlineLearner> learner;
      try {
        learner = opauc::make_learner(config, ds.dim());
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const std::optional<std::uint64_t> order =
          train_shuffle ? std::optional(config.seed) : std::nullopt;
      for (const auto* x : opauc::stream(ds, order)) learner->observe(*x);

      auto model = learner->to_json(train_stats);
      if (params) model["scaling"] = nlohmann::json::parse(opauc::scaling_to_json(*params));
      emit(train_out, model.dump() + "\n");
      const auto scorer = opauc::ScoringModel::from_json(nlohmann::json::parse(model.dump()));
      // the model itself goes to stdout when --out is absent
      (train_out.empty() ? std::cerr : std::cout) << format_auc(model_auc(scorer, raw));
      return 0;
    }

    if (*eval) {
      const auto model = opauc::ScoringModel::from_json(nlohmann::json::parse(read_file(eval_model)));
      const opauc::Dataset ds = load(eval_data, eval_labels);
      std::cout << format_auc(model_auc(model, ds));
      return 0;
    }

    if (*bench) {
      opauc::ExperimentConfig config;
      config.data_path = bench_data;
      config.algo = require_algorithm(bench_flags.algo);
      check_model_flags(config.algo, bench_flags.tau_opt, bench_flags.proj_opt);
      if (!eta_grid.empty()) config.eta_grid = parse_grid(eta_grid);
      if (!lambda_grid.empty()) config.lambda_grid = parse_grid(lambda_grid);
      config.tau = bench_flags.tau;
      config.proj_dim = bench_flags.proj_dim;
      config.folds = folds;
      config.trials = trials;
      config.seed = bench_flags.seed;
      config.positive_labels = parse_label_set(bench_flags.positive_labels);
      try {
        config.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const auto report = opauc::run_cv(config);
      if (bench_format == "csv") {
        std::ostringstream out;
        opauc::write_report_csv(out, report);
        emit(bench_out, out.str());
      } else {
        emit(bench_out, opauc::report_to_json(report).dump(2) + "\n");
      }
      return 0;
    }

    if (*trace) {
      const auto algo = require_algorithm(trace_flags.algo);
      check_model_flags(algo, trace_flags.tau_opt, trace_flags.proj_opt);
      if (algo != opauc::Algorithm::Opauc && algo != opauc::Algorithm::OpaucSketch) {
        throw UsageError("trace supports --algo opauc and opauc-r");
      }
      const opauc::Dataset raw = load(trace_data, trace_flags.positive_labels);
      const opauc::Dataset ds = trace_scale ? opauc::apply_scaling(raw, opauc::fit_scaling(raw)) : raw;
      const auto order = opauc::stream(ds, trace_shuffle ? std::optional(trace_flags.seed)
                                                         : std::nullopt);
      const auto policy =
          step_policy == "constant"
              ? opauc::StepPolicy::constant(trace_flags.eta)
              : opauc::StepPolicy::fixed_horizon(bound, loss_star, static_cast<double>(ds.size()));
      const double eta = policy.step_size(trace_flags.lambda);

      std::optional<opauc::Vector> w_star;
      if (!comparator.empty()) {
        const auto j = nlohmann::json::parse(read_file(comparator));
        w_star = j.at("w").get<opauc::Vector>();
        if (w_star->size() != ds.dim()) throw std::runtime_error("comparator dimension mismatch");
      }

      opauc::RegretTrace result;
      const auto checkpoints = opauc::geometric_checkpoints(ds.size());
      if (algo == opauc::Algorithm::Opauc) {
        opauc::ExactModelState state(ds.dim(), trace_flags.lambda);
        result = opauc::regret_trace(order, [&](const opauc::Instance& x) {
          opauc::StepLosses l{};
          const auto outcome = opauc::step(state, x, eta, true);
          l.iterate = *outcome.loss;
          if (w_star) {
            l.comparator = opauc::loss_Lt(state, opauc::to_dense(x, ds.dim()), x.label, *w_star);
          }
          return l;
        }, checkpoints);
      } else {
        opauc::SketchModelState state(ds.dim(), trace_flags.tau, trace_flags.lambda,
                                      trace_flags.seed);
        result = opauc::regret_trace(order, [&](const opauc::Instance& x) {
          opauc::StepLosses l{};
          const auto outcome = opauc::step(state, x, eta, true);
          l.iterate = *outcome.loss;
          if (w_star) l.comparator = opauc::loss_sketch(state, x, *w_star);
          return l;
        }, checkpoints);
      }
      std::ostringstream out;
      opauc::write_trace_csv(out, result);
      emit(trace_out, out.str());
      return 0;
    }

    if (*scale_fit) {
      const auto params = opauc::fit_scaling(load(fit_data, fit_labels));
      emit(fit_out, opauc::scaling_to_json(params) + "\n");
      return 0;
    }
    if (*scale_apply) {
      const auto params = opauc::scaling_from_json(read_file(apply_params));
      std::ostringstream out;
      opauc::write_libsvm(out, opauc::apply_scaling(load(apply_data, apply_labels), params));
      emit(apply_out, out.str());
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
