#include "opauc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace opauc {

double auc(std::span<const ScoredExample> scored) {
  std::size_t n_pos = 0;
  for (const auto& s : scored) {
    if (!std::isfinite(s.score)) throw std::domain_error("auc: non-finite score");
    if (s.label == Label::Positive) ++n_pos;
  }
  const std::size_t n_neg = scored.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::domain_error("auc: needs both classes");

  std::vector<std::size_t> order(scored.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scored[a].score < scored[b].score; });

  // Ranks are 1-based; a tie group spanning ranks [lo, hi] gets (lo + hi) / 2.
  // Sums are kept doubled so they stay integral.
  double doubled_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scored[order[j + 1]].score == scored[order[i]].score) ++j;
    const double doubled_rank = static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (scored[order[k]].label == Label::Positive) doubled_rank_sum += doubled_rank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos);
  const double u = 0.5 * (doubled_rank_sum - np * (np + 1.0));
  return u / (np * static_cast<double>(n_neg));
}

std::vector<ScoredExample> score_linear(const Dataset& ds, std::span<const double> w) {
  std::vector<ScoredExample> out;
  out.reserve(ds.size());
  for (const Instance& x : ds.instances()) out.push_back({sparse_dot(x, w), x.label});
  return out;
}

double surrogate_objective(std::span<const double> w, const Dataset& ds, double lambda,
                           ObjectiveMode mode) {
  if (ds.pos_count() == 0 || ds.neg_count() == 0) {
    throw std::domain_error("surrogate_objective: needs both classes");
  }
  std::vector<double> pos;
  std::vector<double> neg;
  for (const Instance& x : ds.instances()) {
    (x.label == Label::Positive ? pos : neg).push_back(sparse_dot(x, w));
  }
  const double reg = 0.5 * lambda * squared_norm(w);
  const double pairs = static_cast<double>(pos.size()) * static_cast<double>(neg.size());

  if (mode == ObjectiveMode::Pairwise) {
    double sum = 0.0;
    for (double a : pos) {
      for (double b : neg) {
        const double r = 1.0 - (a - b);
        sum += r * r;
      }
    }
    return reg + sum / (2.0 * pairs);
  }

  // mean over pairs of (1 - (a - b))^2 = (1 - (m+ - m-))^2 + var+ + var-
  auto moments = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double s : v) m += s;
    m /= static_cast<double>(v.size());
    double var = 0.0;
    for (double s : v) var += (s - m) * (s - m);
    return std::pair{m, var / static_cast<double>(v.size())};
  };
  const auto [mp, vp] = moments(pos);
  const auto [mn, vn] = moments(neg);
  const double gap = 1.0 - (mp - mn);
  return reg + 0.5 * (gap * gap + vp + vn);
}

std::vector<std::size_t> geometric_checkpoints(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t t = 1; t <= n; t *= 2) out.push_back(t);
  if (n > 0 && out.back() != n) out.push_back(n);
  return out;
}

RegretRecorder::RegretRecorder(std::vector<std::size_t> checkpoints)
    : checkpoints_(std::move(checkpoints)) {
  std::sort(checkpoints_.begin(), checkpoints_.end());
  checkpoints_.erase(std::unique(checkpoints_.begin(), checkpoints_.end()), checkpoints_.end());
}

void RegretRecorder::record(double loss, std::optional<double> comparator_loss) {
  ++t_;
  cumulative_ += loss;
  if (comparator_loss) {
    has_comparator_ = true;
    comparator_cumulative_ += *comparator_loss;
  }
  while (next_ < checkpoints_.size() && checkpoints_[next_] < t_) ++next_;
  if (next_ < checkpoints_.size() && checkpoints_[next_] == t_) {
    trace_.points.push_back({t_, cumulative_,
                             has_comparator_ ? std::optional(comparator_cumulative_)
                                             : std::nullopt});
    ++next_;
  }
}

RegretTrace regret_trace(std::span<const Instance* const> stream, const LossStep& step,
                         const std::vector<std::size_t>& checkpoints) {
  RegretRecorder recorder(checkpoints);
  for (const Instance* x : stream) {
    const StepLosses l = step(*x);
    recorder.record(l.iterate, l.comparator);
  }
  return recorder.trace();
}

void write_trace_csv(std::ostream& out, const RegretTrace& trace) {
  const bool comparator = !trace.points.empty() && trace.points.front().comparator_loss;
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "t,cum_loss,avg_loss";
  if (comparator) out << ",cum_comparator_loss,regret";
  out << '\n';
  for (const RegretPoint& p : trace.points) {
    out << p.t << ',' << p.cumulative_loss << ',' << p.average_loss();
    if (comparator) {
      out << ',' << p.comparator_loss.value_or(0.0) << ','
          << p.cumulative_loss - p.comparator_loss.value_or(0.0);
    }
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace opauc
