#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "opauc/eval.hpp"
#include "opauc/exact_learner.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace opauc;

namespace {

std::vector<ScoredExample> scored(std::vector<double> pos, std::vector<double> neg) {
  std::vector<ScoredExample> out;
  for (double s : pos) out.push_back({s, Label::Positive});
  for (double s : neg) out.push_back({s, Label::Negative});
  return out;
}

std::vector<ScoredExample> random_scores(std::mt19937_64& rng) {
  std::vector<ScoredExample> out;
  const std::size_t np = 1 + rng() % 30;
  const std::size_t nn = 1 + rng() % 30;
  // few distinct levels so ties are common
  const int levels = 1 + static_cast<int>(rng() % 8);
  for (std::size_t i = 0; i < np + nn; ++i) {
    const double s = static_cast<double>(rng() % levels) * 0.5 - 1.0;
    out.push_back({s, i < np ? Label::Positive : Label::Negative});
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace

TEST_CASE("auc examples") {
  CHECK(auc(scored({2, 3}, {0, 1})) == 1.0);
  CHECK(auc(scored({4, 4, 4}, {4, 4})) == 0.5);
  CHECK(auc(scored({1, 0}, {1, 2})) == 0.125);
  CHECK_THROWS(auc(scored({1, 2}, {})));
  CHECK_THROWS(auc(scored({}, {1})));
  CHECK_THROWS(auc(scored({NAN}, {1})));
}

TEST_CASE("auc equals the pairwise double sum") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) {
    const auto s = random_scores(rng);
    CHECK(std::abs(auc(s) - testing::brute_force_auc(s)) <= 1e-12);
  }
}

TEST_CASE("auc is invariant under increasing maps and symmetric under negation") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    auto s = random_scores(rng);
    const double base = auc(s);
    auto mapped = s;
    for (auto& e : mapped) e.score = std::exp(e.score);
    CHECK(auc(mapped) == base);
    for (auto& e : mapped) e.score = 3.0 * std::log(e.score) + 7.0;
    CHECK(auc(mapped) == base);
    auto flipped = s;
    for (auto& e : flipped) {
      e.score = -e.score;
      e.label = opposite(e.label);
    }
    CHECK(auc(flipped) == base);
  }
}

TEST_CASE("surrogate_objective") {
  const Dataset ds = parse_libsvm("+1 1:0.5\n-1 2:1\n+1 1:-1 2:1\n-1 1:0.25");
  for (auto mode : {ObjectiveMode::Pairwise, ObjectiveMode::Moments}) {
    CHECK(surrogate_objective(Vector{0.0, 0.0}, ds, 0.0, mode) == doctest::Approx(0.5));
  }
  Dataset degenerate;
  Instance p;
  p.label = Label::Positive;
  degenerate.add(p);
  degenerate.add(Instance{});
  degenerate.set_dim(2);
  for (auto mode : {ObjectiveMode::Pairwise, ObjectiveMode::Moments}) {
    CHECK(surrogate_objective(Vector{0.6, 0.8}, degenerate, 2.0, mode) == doctest::Approx(1.5));
  }
  CHECK_THROWS(surrogate_objective(Vector{0.0}, parse_libsvm("+1 1:1"), 0.0));
}

TEST_CASE("surrogate_objective modes agree") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const std::size_t d = 1 + rng() % 6;
    std::vector<testing::LabeledPoint> pts;
    pts.push_back({testing::unit_ball_vector(rng, d), Label::Positive});
    pts.push_back({testing::unit_ball_vector(rng, d), Label::Negative});
    for (int j = 0; j < 18; ++j)
      pts.push_back({testing::unit_ball_vector(rng, d), testing::random_label(rng)});
    const Dataset ds = testing::to_dataset(pts, d);
    const Vector w = testing::uniform_vector(rng, d, -2.0, 2.0);
    const double lambda = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double fast = surrogate_objective(w, ds, lambda, ObjectiveMode::Moments);
    const double slow = surrogate_objective(w, ds, lambda, ObjectiveMode::Pairwise);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-10));
  }
}

TEST_CASE("geometric_checkpoints") {
  CHECK(geometric_checkpoints(1) == std::vector<std::size_t>{1});
  CHECK(geometric_checkpoints(8) == std::vector<std::size_t>{1, 2, 4, 8});
  CHECK(geometric_checkpoints(10) == std::vector<std::size_t>{1, 2, 4, 8, 10});
  CHECK(geometric_checkpoints(0).empty());
}

TEST_CASE("regret traces") {
  SUBCASE("a comparator with zero loss gives a flat trace") {
    const Dataset ds = synthetic::unit_margin(4, 64, 1);
    ExactModelState s(4, 0.0);
    s.w = {1.0, 0.0, 0.0, 0.0};
    const auto order = stream(ds, std::nullopt);
    const auto trace = regret_trace(
        order, [&](const Instance& x) { return StepLosses{*step(s, x, 0.0, true).loss, {}}; },
        geometric_checkpoints(ds.size()));
    for (const auto& p : trace.points) CHECK(std::abs(p.cumulative_loss) < 1e-12);
  }
  SUBCASE("w held at zero adds one half per paired step") {
    const Dataset ds = synthetic::blobs(3, 40, 0.3, 0.3, 2);
    ExactModelState s(3, 0.5);
    std::size_t paired = 0;
    const auto order = stream(ds, std::nullopt);
    const auto trace = regret_trace(
        order,
        [&](const Instance& x) {
          const auto out = step(s, x, 0.0, true);
          paired += out.paired;
          return StepLosses{*out.loss, 0.25};
        },
        geometric_checkpoints(ds.size()));
    REQUIRE(trace.points.back().t == ds.size());
    CHECK(trace.points.back().cumulative_loss == doctest::Approx(0.5 * paired));
    CHECK(*trace.points.back().comparator_loss == doctest::Approx(0.25 * ds.size()));
    double last = 0.0;
    for (const auto& p : trace.points) {
      CHECK(p.cumulative_loss >= last);
      last = p.cumulative_loss;
    }
  }
}

TEST_CASE("average loss falls on blob data") {
  const Dataset ds = synthetic::blobs(5, 10000, 0.4, 0.25, 5);
  ExactModelState s(5, 1.0 / 1024.0);
  const auto order = stream(ds, std::nullopt);
  const auto trace = regret_trace(
      order, [&](const Instance& x) { return StepLosses{*step(s, x, 1.0 / 16.0, true).loss, {}}; },
      {100, 1000, 10000});
  REQUIRE(trace.points.size() == 3);
  CHECK(trace.points[1].average_loss() < trace.points[0].average_loss());
  CHECK(trace.points[2].average_loss() < trace.points[1].average_loss());
}

TEST_CASE("write_trace_csv") {
  RegretRecorder rec({1, 2});
  rec.record(0.5);
  rec.record(0.25);
  std::ostringstream out;
  write_trace_csv(out, rec.trace());
  CHECK(out.str() == "t,cum_loss,avg_loss\n1,0.5,0.5\n2,0.75,0.375\n");
}
