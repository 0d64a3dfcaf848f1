// Acceptance suite: one line per criterion, [PASS], [FAIL] or [SKIP].
//
//   acceptance                 run everything
//   acceptance 2 5 8:german    run a selection ("8" runs every benchmark)
//
// Exit status: 0 when nothing failed and something passed, 77 when every
// selected criterion was skipped, 1 otherwise.

#include <malloc.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <new>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "../synthetic.hpp"
#include "opauc/eval.hpp"
#include "opauc/exact_learner.hpp"
#include "opauc/harness.hpp"
#include "opauc/sketch_learner.hpp"

#ifndef OPAUC_DATA_DIR
#define OPAUC_DATA_DIR "data"
#endif
#ifndef OPAUC_CLI_PATH
#define OPAUC_CLI_PATH "opauc"
#endif

// ---------------------------------------------------------------------------
// Allocation accounting for the memory criterion.

namespace {

std::atomic<bool> g_tracking{false};
std::atomic<long long> g_live{0};
std::atomic<long long> g_peak{0};
std::atomic<long long> g_largest{0};

void note_alloc(void* p) {
  if (!g_tracking.load(std::memory_order_relaxed) || p == nullptr) return;
  const long long n = static_cast<long long>(malloc_usable_size(p));
  const long long live = g_live.fetch_add(n) + n;
  long long peak = g_peak.load();
  while (live > peak && !g_peak.compare_exchange_weak(peak, live)) {
  }
  long long big = g_largest.load();
  while (n > big && !g_largest.compare_exchange_weak(big, n)) {
  }
}

void note_free(void* p) {
  if (!g_tracking.load(std::memory_order_relaxed) || p == nullptr) return;
  g_live.fetch_sub(static_cast<long long>(malloc_usable_size(p)));
}

void* checked_malloc(std::size_t n) {
  void* p = std::malloc(n == 0 ? 1 : n);
  if (p == nullptr) throw std::bad_alloc();
  note_alloc(p);
  return p;
}

}  // namespace

void* operator new(std::size_t n) { return checked_malloc(n); }
void* operator new[](std::size_t n) { return checked_malloc(n); }
void* operator new(std::size_t n, const std::nothrow_t&) noexcept {
  try {
    return checked_malloc(n);
  } catch (...) {
    return nullptr;
  }
}
void* operator new[](std::size_t n, const std::nothrow_t& t) noexcept {
  return operator new(n, t);
}
void operator delete(void* p) noexcept {
  note_free(p);
  std::free(p);
}
void operator delete[](void* p) noexcept { operator delete(p); }
void operator delete(void* p, std::size_t) noexcept { operator delete(p); }
void operator delete[](void* p, std::size_t) noexcept { operator delete(p); }
void operator delete(void* p, const std::nothrow_t&) noexcept { operator delete(p); }
void operator delete[](void* p, const std::nothrow_t&) noexcept { operator delete(p); }

// ---------------------------------------------------------------------------

namespace {

using namespace opauc;
using Clock = std::chrono::steady_clock;

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome judge(bool ok, std::string detail) {
  return {ok ? Verdict::Pass : Verdict::Fail, std::move(detail)};
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<testing::LabeledPoint> random_points(std::mt19937_64& rng, std::size_t n,
                                                 std::size_t d) {
  std::vector<testing::LabeledPoint> pts;
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back({testing::unit_ball_vector(rng, d), testing::random_label(rng)});
  return pts;
}

ExactModelState absorb(const std::vector<testing::LabeledPoint>& pts, std::size_t d,
                       double lambda) {
  ExactModelState s(d, lambda);
  for (const auto& p : pts) step(s, testing::to_instance(p.x, p.y), 0.0);
  return s;
}

// 1 -------------------------------------------------------------------------
Outcome auc_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const std::size_t np = 1 + rng() % 30;
    const std::size_t nn = 1 + rng() % 30;
    const int levels = 1 + static_cast<int>(rng() % 10);
    std::vector<ScoredExample> s;
    for (std::size_t k = 0; k < np + nn; ++k)
      s.push_back({static_cast<double>(rng() % levels) / 3.0 - 1.0,
                   k < np ? Label::Positive : Label::Negative});
    std::shuffle(s.begin(), s.end(), rng);
    worst = std::max(worst, std::abs(auc(s) - testing::brute_force_auc(s)));
  }
  const double t = seconds_since(start);
  return judge(worst <= 1e-12 && t < 5.0,
               fmt("max |rank - double sum| = %.3g over 500 tied sets (%.2fs, limit 5s)", worst, t));
}

// 2 -------------------------------------------------------------------------
Outcome gradient_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1002);
  double worst = 0.0;
  int checked = 0;
  while (checked < 100) {
    const std::size_t d = 1 + rng() % 10;
    auto pts = random_points(rng, 1 + rng() % 20, d);
    const testing::LabeledPoint cur{testing::unit_ball_vector(rng, d), testing::random_label(rng)};
    pts.push_back(cur);
    const double lambda = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    const ExactModelState s = absorb(pts, d, lambda);
    const Vector w = testing::uniform_vector(rng, d, -2.0, 2.0);
    const auto g = gradient_exact(s, cur.x, cur.y, w);
    if (!g) continue;
    const Vector fd = testing::finite_difference(
        [&](std::span<const double> v) { return loss_Lt(s, cur.x, cur.y, v); }, w);
    worst = std::max(worst, testing::relative_l2(*g, fd));
    ++checked;
  }
  const double t = seconds_since(start);
  return judge(worst < 1e-6 && t < 10.0,
               fmt("max relative L2 vs central differences = %.3g over 100 states (%.2fs)", worst, t));
}

// 3 -------------------------------------------------------------------------
Outcome incremental_statistics() {
  std::mt19937_64 rng(1003);
  const std::size_t d = 20;
  const auto pts = random_points(rng, 1000, d);
  ExactModelState s(d, 0.01);
  for (const auto& p : pts) step(s, testing::to_instance(p.x, p.y), 0.01);
  double worst = 0.0;
  for (Label y : {Label::Positive, Label::Negative}) {
    std::vector<Vector> xs;
    for (const auto& p : pts)
      if (p.y == y) xs.push_back(p.x);
    const auto& m = s.moments(y);
    if (m.count != xs.size()) return judge(false, "class count mismatch");
    worst = std::max(worst, testing::relative_l2(m.mean, testing::batch_mean(xs, d)));
    worst = std::max(worst, testing::relative_frobenius(m.cov, testing::batch_covariance(xs, d)));
  }
  return judge(worst < 1e-9,
               fmt("max relative error of means and covariances = %.3g after 1000 vectors", worst));
}

// 4 -------------------------------------------------------------------------
Outcome loss_identity() {
  std::mt19937_64 rng(1004);
  double worst = 0.0;
  int checked = 0;
  while (checked < 200) {
    const std::size_t d = 1 + rng() % 10;
    const auto prefix = random_points(rng, 1 + rng() % 20, d);
    const testing::LabeledPoint cur{testing::unit_ball_vector(rng, d), testing::random_label(rng)};
    auto pts = prefix;
    pts.push_back(cur);
    const double lambda = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const ExactModelState s = absorb(pts, d, lambda);
    if (s.moments(opposite(cur.y)).count == 0) continue;
    const Vector w = testing::uniform_vector(rng, d, -3.0, 3.0);
    const double ref = testing::pairwise_step_loss(prefix, cur.x, cur.y, w, lambda);
    worst = std::max(worst, std::abs(loss_Lt(s, cur.x, cur.y, w) - ref) / std::max(1.0, ref));
    ++checked;
  }
  return judge(worst <= 1e-10,
               fmt("max |moment loss - pairwise sum| = %.3g over 200 prefixes", worst));
}

// 5 -------------------------------------------------------------------------
Outcome sketch_identity() {
  std::mt19937_64 rng(1005);
  double worst = 0.0;
  int checked = 0;
  while (checked < 100) {
    const std::size_t d = 1 + rng() % 50;
    const std::size_t tau = 1 + rng() % 20;
    SketchModelState s(d, tau, std::uniform_real_distribution<double>(0.0, 1.0)(rng), rng());
    const std::size_t n = 1 + rng() % 30;
    for (std::size_t i = 0; i < n; ++i)
      step(s, testing::to_instance(testing::unit_ball_vector(rng, d), testing::random_label(rng)),
           0.0);
    s.w = testing::uniform_vector(rng, d, -2.0, 2.0);
    const Instance x =
        testing::to_instance(testing::unit_ball_vector(rng, d), testing::random_label(rng));
    const auto g = gradient_sketch(s, x);
    if (!g) continue;

    // S_hat = Z Z^T / T - (|rho|^2 / T^2) c c^T, formed densely
    const SketchClass& other = s.side(opposite(x.label));
    const Matrix z = other.z.dense();
    const double t = static_cast<double>(other.count);
    const double r2 = squared_norm(other.z.rho());
    Matrix sh(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < tau; ++k) acc += z(i, k) * z(j, k);
        sh(i, j) = acc / t - r2 / (t * t) * other.mean[i] * other.mean[j];
      }
    Vector delta = to_dense(x, d);
    axpy(-1.0, other.mean, delta);
    const double proj = dot(delta, s.w);
    const Vector shw = sh.multiply(s.w);
    Vector ref(d);
    for (std::size_t i = 0; i < d; ++i)
      ref[i] = s.lambda * s.w[i] - sign(x.label) * delta[i] + proj * delta[i] + shw[i];
    worst = std::max(worst, testing::relative_l2(*g, ref));
    ++checked;
  }
  return judge(worst < 1e-8,
               fmt("max relative L2 vs materialized covariance = %.3g over 100 states", worst));
}

// 6 -------------------------------------------------------------------------
Outcome sketch_sufficiency() {
  const auto start = Clock::now();
  const std::size_t d = 200;
  const std::size_t rank = 5;
  const std::size_t n = 4000;
  const std::size_t tau = 50;
  const double eta = 1.0 / 64.0;
  const double lambda = 1.0 / 1024.0;
  const int seeds = 10;
  double exact_sum = 0.0;
  double sketch_sum = 0.0;
  for (int seed = 0; seed < seeds; ++seed) {
    const synthetic::LowRankModel model(d, rank, 0.1, derive_seed(6, {0, std::uint64_t(seed)}));
    const Dataset train = model.sample(n, derive_seed(6, {1, std::uint64_t(seed)}));
    const Dataset test = model.sample(n, derive_seed(6, {2, std::uint64_t(seed)}));
    const auto exact = train_exact(train, lambda, StepPolicy::constant(eta));
    const auto sketch =
        train_sketch(train, lambda, tau, StepPolicy::constant(eta), derive_seed(6, {3, std::uint64_t(seed)}));
    exact_sum += auc(score_linear(test, exact.w));
    sketch_sum += auc(score_linear(test, sketch.w));
  }
  const double exact_auc = exact_sum / seeds;
  const double sketch_auc = sketch_sum / seeds;
  const double t = seconds_since(start);
  return judge(std::abs(exact_auc - sketch_auc) <= 0.01 && t < 120.0,
               fmt("held-out AUC exact %.4f, sketch(tau=50) %.4f, gap %.4f (limit 0.01), %.1fs",
                   exact_auc, sketch_auc, std::abs(exact_auc - sketch_auc), t));
}

// 7 -------------------------------------------------------------------------
Outcome convergence() {
  const auto start = Clock::now();
  const std::size_t d = 10;
  const std::size_t horizon = 10000;
  const double lambda = 0.0;
  const Dataset ds = synthetic::unit_margin(d, horizon, 7);
  // separable: the comparator e1 has zero loss, |e1| = 1
  const auto policy = StepPolicy::fixed_horizon(1.0, 0.0, static_cast<double>(horizon));
  const double eta = policy.step_size(lambda);
  ExactModelState s(d, lambda);
  const Vector comparator = [&] {
    Vector e(d, 0.0);
    e[0] = 1.0;
    return e;
  }();
  const auto order = stream(ds, std::nullopt);
  const auto trace = regret_trace(
      order,
      [&](const Instance& x) {
        const auto out = step(s, x, eta, true);
        // statistics are already current, so this is the same step's loss at e1
        const Vector xd = to_dense(x, d);
        return StepLosses{*out.loss, loss_Lt(s, xd, x.label, comparator)};
      },
      {500, horizon});
  const double early = trace.points.at(0).average_loss();
  const double late = trace.points.at(1).average_loss();
  const double t = seconds_since(start);
  const double regret = trace.points.at(1).cumulative_loss - *trace.points.at(1).comparator_loss;
  return judge(late < 0.5 * early && t < 60.0,
               fmt("average step loss %.4g at T=500, %.4g at T=10000 (ratio %.3f, limit 0.5), "
                   "regret to e1 %.4g, eta=%.4g, %.2fs",
                   early, late, late / early, regret, eta, t));
}

// 8 -------------------------------------------------------------------------
struct Benchmark {
  const char* name;
  double target;
  double tolerance;
};

constexpr Benchmark kBenchmarks[] = {
    {"diabetes", 0.8309, 0.04},
    {"fourclass", 0.8310, 0.04},
    {"german", 0.7978, 0.05},
};

Outcome benchmark(const Benchmark& b, const std::string& data_dir) {
  const std::filesystem::path path = std::filesystem::path(data_dir) / b.name;
  if (!std::filesystem::exists(path))
    return {Verdict::Skip, "dataset not found at " + path.string()};
  ExperimentConfig cfg;
  cfg.data_path = path.string();
  cfg.algo = Algorithm::Opauc;
  cfg.folds = 5;
  cfg.trials = 5;
  cfg.seed = 7;
  const EvalReport r = run_cv(cfg);
  return judge(std::abs(r.mean - b.target) <= b.tolerance && r.wall_time_sec < 300.0,
               fmt("mean AUC %.4f +- %.4f over %zu runs, target %.4f +- %.2f, %.1fs (limit 300s)",
                   r.mean, r.std, r.outer.size(), b.target, b.tolerance, r.wall_time_sec));
}

// 9 -------------------------------------------------------------------------
Outcome memory_contract() {
  const std::size_t d = 100000;
  const std::size_t tau = 50;
  const Dataset ds = synthetic::sparse_stream(d, 2000, 20, 9);

  g_live = 0;
  g_peak = 0;
  g_largest = 0;
  g_tracking = true;
  std::size_t footprint = 0;
  {
    const auto s = train_sketch(ds, 1.0 / 1024.0, tau, StepPolicy::constant(1.0 / 16.0), 9);
    footprint = s.footprint_numbers();
  }
  g_tracking = false;

  const double peak_numbers = static_cast<double>(g_peak.load()) / sizeof(double);
  const long long largest = g_largest.load();
  const double limit = 60.0 * static_cast<double>(d);
  const long long square = static_cast<long long>(d) * static_cast<long long>(d) * 8;
  return judge(peak_numbers <= limit && largest < square && static_cast<double>(footprint) <= limit,
               fmt("peak heap during training %.0f numbers (%.2f d), state %zu numbers, largest "
                   "block %lld bytes (d x d would be %lld), limit 60 d",
                   peak_numbers, peak_numbers / d, footprint, largest, square));
}

// 10 ------------------------------------------------------------------------
std::string without_wall_time(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("\"wall_time_sec\"") == std::string::npos) out << line << '\n';
  return out.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("opauc_acceptance_" + std::to_string(getpid()));
  fs::create_directories(dir);
  const fs::path data = dir / "blobs.svm";
  {
    std::ofstream out(data);
    write_libsvm(out, synthetic::blobs(6, 300, 0.25, 0.4, 10));
  }
  const std::vector<std::string> configs = {
      "--algo opauc", "--algo opauc-r --tau 8", "--algo uni-exp", "--algo opauc-rp --proj-dim 3"};
  std::string detail;
  bool ok = true;
  int idx = 0;
  for (const auto& algo : configs) {
    std::string reports[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path out = dir / ("report_" + std::to_string(idx) + "_" + std::to_string(run) + ".json");
      const std::string cmd = std::string("\"") + OPAUC_CLI_PATH + "\" bench " + algo +
                              " --folds 5 --trials 2 --seed 7 --eta-grid=-8:-2 --lambda-grid=-10:-6"
                              " --out \"" + out.string() + "\" \"" + data.string() + "\"";
      if (std::system(cmd.c_str()) != 0) {
        fs::remove_all(dir);
        return judge(false, "bench failed: " + cmd);
      }
      reports[run] = without_wall_time(out.string());
    }
    const bool same = !reports[0].empty() && reports[0] == reports[1];
    ok = ok && same;
    detail += (idx ? ", " : "") + algo.substr(7) + (same ? " identical" : " DIFFERENT");
    ++idx;
  }
  fs::remove_all(dir);
  return judge(ok, "bench twice per config: " + detail);
}

struct Criterion {
  std::string key;
  std::string title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::string data_dir = OPAUC_DATA_DIR;
  std::vector<std::string> selection;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--data-dir" && i + 1 < argc) {
      data_dir = argv[++i];
    } else {
      selection.push_back(arg);
    }
  }

  std::vector<Criterion> all = {
      {"1", "auc matches the pairwise double sum", auc_oracle},
      {"2", "exact gradient matches finite differences", gradient_oracle},
      {"3", "incremental class statistics match batch formulas", incremental_statistics},
      {"4", "moment loss equals the pairwise loss", loss_identity},
      {"5", "sketch gradient matches the materialized covariance", sketch_identity},
      {"6", "tau = 50 sketch matches exact learner on rank-5 data", sketch_sufficiency},
      {"7", "average loss halves between T=500 and T=10000", convergence},
  };
  for (const auto& b : kBenchmarks)
    all.push_back({std::string("8:") + b.name, std::string("benchmark ") + b.name,
                   [b, data_dir] { return benchmark(b, data_dir); }});
  all.push_back({"9", "sketch memory at d = 100000 stays under 60 d", memory_contract});
  all.push_back({"10", "bench reports are byte-identical across runs", determinism});

  int passed = 0;
  int failed = 0;
  int skipped = 0;
  for (const auto& c : all) {
    if (!selection.empty() &&
        std::find(selection.begin(), selection.end(), c.key) == selection.end() &&
        !(c.key.starts_with("8:") && std::find(selection.begin(), selection.end(), "8") != selection.end()))
      continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Verdict::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
    std::cout << '[' << tag << "] " << c.key << "  " << c.title << ": " << o.detail << std::endl;
    (o.verdict == Verdict::Pass ? passed : o.verdict == Verdict::Fail ? failed : skipped) += 1;
  }
  std::cout << passed << " passed, " << failed << " failed, " << skipped << " skipped\n";
  if (failed > 0 || (passed == 0 && skipped == 0)) return 1;
  return passed == 0 ? 77 : 0;
}
