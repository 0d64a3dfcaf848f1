#include "opauc/sketch_learner.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace opauc {

SketchFactor::SketchFactor(std::size_t dim, std::size_t tau)
    : dim_(dim), tau_(tau), slot_of_feature_(dim, kAbsent), rho_(tau, 0.0) {
  if (tau == 0) throw std::invalid_argument("sketch width must be at least 1");
}

double* SketchFactor::slot_row(std::size_t slot) {
  return blocks_[slot / kBlockRows].get() + (slot % kBlockRows) * tau_;
}

const double* SketchFactor::slot_row(std::size_t slot) const {
  return blocks_[slot / kBlockRows].get() + (slot % kBlockRows) * tau_;
}

void SketchFactor::add(const Instance& x, std::span<const double> r) {
  assert(r.size() == tau_);
  for (const Feature& f : x.features) {
    if (f.index > dim_ || f.value == 0.0) continue;
    const std::size_t j = f.index - 1;
    if (slot_of_feature_[j] == kAbsent) {
      const std::size_t slot = features_.size();
      if (slot % kBlockRows == 0) {
        blocks_.push_back(std::make_unique<double[]>(kBlockRows * tau_));  // zeroed
      }
      slot_of_feature_[j] = static_cast<std::uint32_t>(slot);
      features_.push_back(static_cast<std::uint32_t>(j));
    }
    double* z = slot_row(slot_of_feature_[j]);
    for (std::size_t k = 0; k < tau_; ++k) z[k] += f.value * r[k];
  }
  for (std::size_t k = 0; k < tau_; ++k) rho_[k] += r[k];
}

void SketchFactor::project(std::span<const double> w, std::span<double> out) const {
  assert(w.size() == dim_ && out.size() == tau_);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t slot = 0; slot < features_.size(); ++slot) {
    const double wj = w[features_[slot]];
    if (wj == 0.0) continue;
    const double* z = slot_row(slot);
    for (std::size_t k = 0; k < tau_; ++k) out[k] += wj * z[k];
  }
}

void SketchFactor::expand_add(std::span<const double> v, double alpha,
                              std::span<double> out) const {
  assert(v.size() == tau_ && out.size() == dim_);
  for (std::size_t slot = 0; slot < features_.size(); ++slot) {
    const double* z = slot_row(slot);
    double s = 0.0;
    for (std::size_t k = 0; k < tau_; ++k) s += z[k] * v[k];
    out[features_[slot]] += alpha * s;
  }
}

std::span<const double> SketchFactor::row(std::size_t j) const {
  if (j >= dim_ || slot_of_feature_[j] == kAbsent) return {};
  return {slot_row(slot_of_feature_[j]), tau_};
}

Matrix SketchFactor::dense() const {
  Matrix m(dim_, tau_);
  for (std::size_t slot = 0; slot < features_.size(); ++slot) {
    const double* z = slot_row(slot);
    std::copy(z, z + tau_, m.row(features_[slot]).begin());
  }
  return m;
}

std::size_t SketchFactor::footprint_numbers() const {
  return slot_of_feature_.size() + features_.capacity() + blocks_.size() * kBlockRows * tau_ +
         rho_.size();
}

SketchModelState::SketchModelState(std::size_t dim, std::size_t tau, double lambda,
                                   std::uint64_t seed)
    : dim(dim), tau(tau), lambda(lambda), seed(seed), w(dim, 0.0), pos(dim, tau),
      neg(dim, tau), rng(seed) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
}

std::size_t SketchModelState::footprint_numbers() const {
  return w.size() + pos.mean.size() + neg.mean.size() + pos.z.footprint_numbers() +
         neg.z.footprint_numbers();
}

Vector draw_sketch_row(GaussianStream& rng, std::size_t tau) {
  Vector r(tau);
  rng.fill(r);
  return r;
}

Vector update_sketch(SketchModelState& state, const Instance& x) {
  Vector r = draw_sketch_row(state.rng, state.tau);
  const double scale = 1.0 / std::sqrt(static_cast<double>(state.tau));
  for (double& v : r) v *= scale;

  SketchClass& own = state.side(x.label);
  ++own.count;
  // mean += (x - mean) / T, split into the dense shrink and the sparse add
  const double inv = 1.0 / static_cast<double>(own.count);
  for (double& m : own.mean) m -= m * inv;
  for (const Feature& f : x.features) {
    if (f.index <= state.dim) own.mean[f.index - 1] += f.value * inv;
  }
  own.z.add(x, r);
  return r;
}

Vector apply_sketch_covariance(const SketchClass& cls, std::span<const double> w) {
  const double t = static_cast<double>(cls.count);
  Vector out(w.size(), 0.0);
  if (cls.count == 0) return out;
  Vector ztw(cls.z.tau());
  cls.z.project(w, ztw);
  cls.z.expand_add(ztw, 1.0 / t, out);
  // c_hat c_hat^T w with c_hat = c (rho / T)^T
  const double mean_scale = squared_norm(cls.z.rho()) / (t * t) * dot(cls.mean, w);
  axpy(-mean_scale, cls.mean, out);
  return out;
}

namespace {

Vector centered(const SketchClass& other, const Instance& x, std::size_t dim) {
  Vector delta = to_dense(x, dim);
  for (std::size_t i = 0; i < dim; ++i) delta[i] -= other.mean[i];
  return delta;
}

}  // namespace

std::optional<Vector> gradient_sketch(const SketchModelState& state, const Instance& x,
                                      std::span<const double> w) {
  const SketchClass& other = state.side(opposite(x.label));
  if (other.count == 0) return std::nullopt;
  const Vector delta = centered(other, x, state.dim);
  const double s = sign(x.label);
  const double proj = dot(delta, w);
  Vector g = apply_sketch_covariance(other, w);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] += state.lambda * w[i] - s * delta[i] + proj * delta[i];
  }
  return g;
}

std::optional<Vector> gradient_sketch(const SketchModelState& state, const Instance& x) {
  return gradient_sketch(state, x, state.w);
}

double loss_sketch(const SketchModelState& state, const Instance& x, std::span<const double> w) {
  const SketchClass& other = state.side(opposite(x.label));
  if (other.count == 0) return 0.0;
  const Vector delta = centered(other, x, state.dim);
  const double proj = dot(delta, w);
  const double quad = dot(w, apply_sketch_covariance(other, w));
  return -sign(x.label) * proj + 0.5 * (1.0 + quad) + 0.5 * state.lambda * squared_norm(w) +
         0.5 * proj * proj;
}

StepOutcome step(SketchModelState& state, const Instance& x, double eta, bool want_loss) {
  update_sketch(state, x);
  StepOutcome out;
  if (want_loss) out.loss = loss_sketch(state, x, state.w);
  const auto g = gradient_sketch(state, x);
  if (!g) return out;
  out.paired = true;
  axpy(-eta, *g, state.w);
  return out;
}

SketchModelState train_sketch(const Dataset& ds, double lambda, std::size_t tau,
                              const StepPolicy& policy, std::uint64_t seed,
                              std::optional<std::uint64_t> shuffle_seed) {
  SketchModelState state(ds.dim(), tau, lambda, seed);
  const double eta = policy.step_size(lambda);
  for (const Instance* x : stream(ds, shuffle_seed)) step(state, *x, eta);
  return state;
}

}  // namespace opauc
