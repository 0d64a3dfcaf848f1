#include "opauc/learner.hpp"

#include <array>
#include <stdexcept>
#include <utility>

#include "opauc/sketch_learner.hpp"

namespace opauc {

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 6> kNames{{
    {Algorithm::Opauc, "opauc"},
    {Algorithm::OpaucSketch, "opauc-r"},
    {Algorithm::UniSquare, "uni-squ"},
    {Algorithm::UniExp, "uni-exp"},
    {Algorithm::OpaucSubsample, "opauc-f"},
    {Algorithm::OpaucProjection, "opauc-rp"},
}};

nlohmann::ordered_json matrix_json(const Matrix& m) {
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

nlohmann::ordered_json exact_json(const ExactModelState& s, bool with_statistics) {
  nlohmann::ordered_json j;
  j["kind"] = "opauc";
  j["dim"] = s.dim;
  j["lambda"] = s.lambda;
  j["w"] = s.w;
  j["c_pos"] = s.pos.mean;
  j["c_neg"] = s.neg.mean;
  j["t_pos"] = s.pos.count;
  j["t_neg"] = s.neg.count;
  if (with_statistics) {
    j["S_pos"] = matrix_json(s.pos.cov);
    j["S_neg"] = matrix_json(s.neg.cov);
  }
  return j;
}

class ExactLearner final : public OnlineLearner {
 public:
  ExactLearner(std::size_t dim, double lambda, double eta) : state_(dim, lambda), eta_(eta) {}

  StepOutcome observe(const Instance& x, bool want_loss) override {
    return step(state_, x, eta_, want_loss);
  }
  double score(const Instance& x) const override { return sparse_dot(x, state_.w); }
  std::span<const double> weights() const override { return state_.w; }
  nlohmann::ordered_json to_json(bool with_statistics) const override {
    auto j = exact_json(state_, with_statistics);
    j["eta"] = eta_;
    return j;
  }

 private:
  ExactModelState state_;
  double eta_;
};

class SketchLearner final : public OnlineLearner {
 public:
  SketchLearner(std::size_t dim, std::size_t tau, double lambda, double eta, std::uint64_t seed)
      : state_(dim, tau, lambda, seed), eta_(eta) {}

  StepOutcome observe(const Instance& x, bool want_loss) override {
    return step(state_, x, eta_, want_loss);
  }
  double score(const Instance& x) const override { return sparse_dot(x, state_.w); }
  std::span<const double> weights() const override { return state_.w; }
  nlohmann::ordered_json to_json(bool with_statistics) const override {
    nlohmann::ordered_json j;
    j["kind"] = "opauc-r";
    j["dim"] = state_.dim;
    j["tau"] = state_.tau;
    j["lambda"] = state_.lambda;
    j["eta"] = eta_;
    j["w"] = state_.w;
    j["c_pos"] = state_.pos.mean;
    j["c_neg"] = state_.neg.mean;
    j["counts"] = {{"pos", state_.pos.count}, {"neg", state_.neg.count}};
    j["seed"] = state_.seed;
    if (with_statistics) {
      j["Z_pos"] = matrix_json(state_.pos.z.dense());
      j["Z_neg"] = matrix_json(state_.neg.z.dense());
    }
    return j;
  }

 private:
  SketchModelState state_;
  double eta_;
};

class UnivariateLearner final : public OnlineLearner {
 public:
  UnivariateLearner(std::size_t dim, UnivariateLoss loss, double lambda, double eta)
      : model_(dim, loss, lambda), eta_(eta) {}

  StepOutcome observe(const Instance& x, bool want_loss) override {
    StepOutcome out;
    out.paired = true;
    if (want_loss) {
      // loss under the post-update counts, matching the gradient that is taken
      UnivariateModel probe = model_;
      (x.label == Label::Positive ? probe.t_pos : probe.t_neg) += 1;
      out.loss = univariate_loss(probe, x, model_.w);
    }
    univariate_step(model_, x, eta_);
    return out;
  }
  double score(const Instance& x) const override { return sparse_dot(x, model_.w); }
  std::span<const double> weights() const override { return model_.w; }
  nlohmann::ordered_json to_json(bool) const override {
    nlohmann::ordered_json j;
    j["kind"] = model_.loss == UnivariateLoss::Square ? "uni-squ" : "uni-exp";
    j["dim"] = model_.w.size();
    j["lambda"] = model_.lambda;
    j["eta"] = eta_;
    j["w"] = model_.w;
    j["t_pos"] = model_.t_pos;
    j["t_neg"] = model_.t_neg;
    return j;
  }

 private:
  UnivariateModel model_;
  double eta_;
};

class ProjectedLearner final : public OnlineLearner {
 public:
  ProjectedLearner(Algorithm algo, ProjectionMap map, double lambda, double eta,
                   std::uint64_t seed)
      : algo_(algo), model_(std::move(map), lambda), eta_(eta), seed_(seed) {}

  StepOutcome observe(const Instance& x, bool want_loss) override {
    return model_.step(x, eta_, want_loss);
  }
  double score(const Instance& x) const override { return model_.score(x); }
  std::span<const double> weights() const override { return model_.inner.w; }
  nlohmann::ordered_json to_json(bool with_statistics) const override {
    nlohmann::ordered_json j;
    j["kind"] = algorithm_name(algo_);
    j["dim"] = model_.map.input_dim();
    j["proj_dim"] = model_.map.output_dim();
    j["seed"] = seed_;
    j["eta"] = eta_;
    if (algo_ == Algorithm::OpaucSubsample) j["kept"] = model_.map.kept();
    j["inner"] = exact_json(model_.inner, with_statistics);
    return j;
  }

 private:
  Algorithm algo_;
  ProjectedModel model_;
  double eta_;
  std::uint64_t seed_;
};

void require_positive_eta(double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
}

}  // namespace

std::string_view algorithm_name(Algorithm algo) {
  for (const auto& [a, name] : kNames) {
    if (a == algo) return name;
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (const auto& [a, n] : kNames) {
    if (n == name) return a;
  }
  return std::nullopt;
}

std::unique_ptr<OnlineLearner> make_learner(const LearnerConfig& c, std::size_t dim) {
  require_positive_eta(c.eta);
  switch (c.algo) {
    case Algorithm::Opauc:
      return std::make_unique<ExactLearner>(dim, c.lambda, c.eta);
    case Algorithm::OpaucSketch:
      return std::make_unique<SketchLearner>(dim, c.tau, c.lambda, c.eta, c.seed);
    case Algorithm::UniSquare:
      return std::make_unique<UnivariateLearner>(dim, UnivariateLoss::Square, c.lambda, c.eta);
    case Algorithm::UniExp:
      return std::make_unique<UnivariateLearner>(dim, UnivariateLoss::Exponential, c.lambda,
                                                 c.eta);
    case Algorithm::OpaucSubsample:
      return std::make_unique<ProjectedLearner>(
          c.algo, ProjectionMap::random_subsample(dim, c.proj_dim, c.seed), c.lambda, c.eta,
          c.seed);
    case Algorithm::OpaucProjection:
      return std::make_unique<ProjectedLearner>(
          c.algo, ProjectionMap::gaussian(dim, c.proj_dim, c.seed), c.lambda, c.eta, c.seed);
  }
  throw std::invalid_argument("unknown algorithm");
}

ScoringModel ScoringModel::from_json(const nlohmann::json& j) {
  ScoringModel m;
  const auto kind = j.at("kind").get<std::string>();
  const auto algo = parse_algorithm(kind);
  if (!algo) throw std::runtime_error("model: unknown kind '" + kind + "'");
  m.algo_ = *algo;
  m.dim_ = j.at("dim").get<std::size_t>();
  if (*algo == Algorithm::OpaucSubsample || *algo == Algorithm::OpaucProjection) {
    const auto k = j.at("proj_dim").get<std::size_t>();
    if (*algo == Algorithm::OpaucSubsample) {
      m.map_ = ProjectionMap::subsample(m.dim_, j.at("kept").get<std::vector<std::uint32_t>>());
    } else {
      m.map_ = ProjectionMap::gaussian(m.dim_, k, j.at("seed").get<std::uint64_t>());
    }
    m.w_ = j.at("inner").at("w").get<Vector>();
    if (m.w_.size() != k) throw std::runtime_error("model: inner weight length mismatch");
  } else {
    m.w_ = j.at("w").get<Vector>();
    if (m.w_.size() != m.dim_) throw std::runtime_error("model: weight length mismatch");
  }
  if (j.contains("scaling")) m.scaling_ = scaling_from_json(j.at("scaling").dump());
  return m;
}

double ScoringModel::score(const Instance& x) const {
  const Instance scaled = scaling_ ? apply_scaling(x, *scaling_) : x;
  if (map_) return sparse_dot(map_->project(scaled), w_);
  return sparse_dot(scaled, w_);
}

}  // namespace opauc
