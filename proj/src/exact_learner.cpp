#include "opauc/exact_learner.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace opauc {

StepPolicy StepPolicy::constant(double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("step size must be positive");
  StepPolicy p;
  p.kind_ = Kind::Constant;
  p.eta_ = eta;
  return p;
}

StepPolicy StepPolicy::fixed_horizon(double bound, double loss_star, double horizon) {
  if (!(bound > 0.0) || loss_star < 0.0 || !(horizon > 0.0)) {
    throw std::invalid_argument("fixed_horizon: need bound > 0, loss_star >= 0, horizon > 0");
  }
  StepPolicy p;
  p.kind_ = Kind::FixedHorizon;
  p.bound_ = bound;
  p.loss_star_ = loss_star;
  p.horizon_ = horizon;
  return p;
}

double StepPolicy::step_size(double lambda) const {
  if (kind_ == Kind::Constant) return eta_;
  const double kappa = 4.0 + lambda;
  return 1.0 / (kappa + std::sqrt(kappa * kappa +
                                  kappa * horizon_ * loss_star_ / (bound_ * bound_)));
}

ExactModelState::ExactModelState(std::size_t dim, double lambda)
    : dim(dim), lambda(lambda), w(dim, 0.0), pos(dim), neg(dim) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
}

std::size_t ExactModelState::footprint_numbers() const {
  return w.size() + pos.mean.size() + neg.mean.size() + pos.cov.rows() * pos.cov.cols() +
         neg.cov.rows() * neg.cov.cols();
}

void update_mean(std::span<double> mean, std::size_t count_after, std::span<const double> x) {
  assert(count_after >= 1 && mean.size() == x.size());
  const double inv = 1.0 / static_cast<double>(count_after);
  for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += (x[i] - mean[i]) * inv;
}

void update_covariance(Matrix& cov, std::span<const double> mean_before,
                       std::span<const double> mean_after, std::size_t count_after,
                       std::span<const double> x) {
  const std::size_t d = x.size();
  assert(cov.rows() == d && cov.cols() == d);
  const double inv = 1.0 / static_cast<double>(count_after);
  // S_t = S_{t-1} + ((x - c_{t-1})(x - c_t)^T - S_{t-1}) / T_t; the outer
  // product is symmetric in exact arithmetic, so only the upper triangle is
  // computed and mirrored.
  for (std::size_t i = 0; i < d; ++i) {
    const double a = x[i] - mean_before[i];
    for (std::size_t j = i; j < d; ++j) {
      const double v = cov(i, j) + (a * (x[j] - mean_after[j]) - cov(i, j)) * inv;
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
}

namespace {

// x - c for the class opposite to y
Vector centered(const ExactModelState& state, std::span<const double> x, Label y) {
  const Vector& c = state.moments(opposite(y)).mean;
  Vector delta(x.begin(), x.end());
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] -= c[i];
  return delta;
}

}  // namespace

std::optional<Vector> gradient_exact(const ExactModelState& state, std::span<const double> x,
                                     Label y, std::span<const double> w) {
  const ClassMoments& other = state.moments(opposite(y));
  if (other.count == 0) return std::nullopt;
  const Vector delta = centered(state, x, y);
  const double s = sign(y);
  const double proj = dot(delta, w);

  Vector g = other.cov.multiply(w);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] += state.lambda * w[i] - s * delta[i] + proj * delta[i];
  }
  return g;
}

std::optional<Vector> gradient_exact(const ExactModelState& state, std::span<const double> x,
                                     Label y) {
  return gradient_exact(state, x, y, state.w);
}

double loss_Lt(const ExactModelState& state, std::span<const double> x, Label y,
               std::span<const double> w) {
  const ClassMoments& other = state.moments(opposite(y));
  if (other.count == 0) return 0.0;
  const Vector delta = centered(state, x, y);
  const double margin = 1.0 - sign(y) * dot(delta, w);
  const Vector sw = other.cov.multiply(w);
  return 0.5 * state.lambda * squared_norm(w) + 0.5 * (margin * margin + dot(w, sw));
}

StepOutcome step(ExactModelState& state, const Instance& x, double eta, bool want_loss) {
  const Vector xd = to_dense(x, state.dim);
  ClassMoments& own = state.moments(x.label);
  ++own.count;
  const Vector mean_before = own.mean;
  update_mean(own.mean, own.count, xd);
  update_covariance(own.cov, mean_before, own.mean, own.count, xd);

  StepOutcome out;
  if (want_loss) out.loss = loss_Lt(state, xd, x.label, state.w);
  const auto g = gradient_exact(state, xd, x.label);
  if (!g) return out;
  out.paired = true;
  axpy(-eta, *g, state.w);
  return out;
}

ExactModelState train_exact(const Dataset& ds, double lambda, const StepPolicy& policy,
                            std::optional<std::uint64_t> shuffle_seed) {
  ExactModelState state(ds.dim(), lambda);
  const double eta = policy.step_size(lambda);
  for (const Instance* x : stream(ds, shuffle_seed)) step(state, *x, eta);
  return state;
}

}  // namespace opauc
