#include "opauc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "opauc/random.hpp"

namespace opauc {

UnivariateModel::UnivariateModel(std::size_t dim, UnivariateLoss loss, double lambda)
    : w(dim, 0.0), loss(loss), lambda(lambda) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
}

double UnivariateModel::weight(Label y) const {
  const std::size_t t = t_pos + t_neg;
  if (t == 0) return 0.0;
  const std::size_t other = y == Label::Positive ? t_neg : t_pos;
  return static_cast<double>(other) / static_cast<double>(t);
}

double univariate_loss(const UnivariateModel& model, const Instance& x,
                       std::span<const double> w) {
  const double margin = sign(x.label) * sparse_dot(x, w);
  const double reg = 0.5 * model.lambda * squared_norm(w);
  const double c = model.weight(x.label);
  if (model.loss == UnivariateLoss::Square) return c * (1.0 - margin) * (1.0 - margin) + reg;
  return c * std::exp(-std::clamp(margin, -kExpMarginClip, kExpMarginClip)) + reg;
}

Vector univariate_gradient(const UnivariateModel& model, const Instance& x,
                           std::span<const double> w) {
  const double y = sign(x.label);
  const double margin = y * sparse_dot(x, w);
  const double c = model.weight(x.label);
  double scale = 0.0;  // d loss / d (w^T x)
  if (model.loss == UnivariateLoss::Square) {
    scale = -2.0 * c * y * (1.0 - margin);
  } else if (std::abs(margin) < kExpMarginClip) {
    scale = -c * y * std::exp(-margin);
  }
  Vector g(w.begin(), w.end());
  for (double& v : g) v *= model.lambda;
  for (const Feature& f : x.features) {
    if (f.index <= g.size()) g[f.index - 1] += scale * f.value;
  }
  return g;
}

void univariate_step(UnivariateModel& model, const Instance& x, double eta) {
  if (x.label == Label::Positive) {
    ++model.t_pos;
  } else {
    ++model.t_neg;
  }
  const Vector g = univariate_gradient(model, x, model.w);
  axpy(-eta, g, model.w);
}

ProjectionMap ProjectionMap::subsample(std::size_t dim, std::vector<std::uint32_t> kept) {
  std::sort(kept.begin(), kept.end());
  if (kept.empty() || kept.front() == 0 || kept.back() > dim ||
      std::adjacent_find(kept.begin(), kept.end()) != kept.end()) {
    throw std::invalid_argument("subsample: kept features must be distinct indices in 1..dim");
  }
  ProjectionMap m;
  m.mode_ = Mode::Subsample;
  m.input_dim_ = dim;
  m.output_dim_ = kept.size();
  m.position_.assign(dim + 1, 0);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    m.position_[kept[i]] = static_cast<std::uint32_t>(i + 1);
  }
  m.kept_ = std::move(kept);
  return m;
}

ProjectionMap ProjectionMap::random_subsample(std::size_t dim, std::size_t k, std::uint64_t seed) {
  if (k == 0 || k >= dim) throw std::invalid_argument("subsample: need 0 < k < dim");
  const auto order = permutation(dim, seed);
  std::vector<std::uint32_t> kept;
  kept.reserve(k);
  for (std::size_t i = 0; i < k; ++i) kept.push_back(static_cast<std::uint32_t>(order[i] + 1));
  return subsample(dim, std::move(kept));
}

ProjectionMap ProjectionMap::gaussian(std::size_t dim, std::size_t k, std::uint64_t seed) {
  if (k == 0 || k >= dim) throw std::invalid_argument("projection: need 0 < k < dim");
  Matrix h(dim, k);
  GaussianStream rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  for (std::size_t i = 0; i < dim; ++i) {
    for (double& v : h.row(i)) v = rng.next() * scale;
  }
  return from_matrix(std::move(h));
}

ProjectionMap ProjectionMap::from_matrix(Matrix h) {
  if (h.cols() == 0 || h.cols() > h.rows()) {
    throw std::invalid_argument("projection: need 0 < k <= dim");
  }
  ProjectionMap m;
  m.mode_ = Mode::GaussianProjection;
  m.input_dim_ = h.rows();
  m.output_dim_ = h.cols();
  m.h_ = std::move(h);
  return m;
}

Instance ProjectionMap::project(const Instance& x) const {
  Instance out;
  out.label = x.label;
  if (mode_ == Mode::Subsample) {
    for (const Feature& f : x.features) {
      if (f.index <= input_dim_ && position_[f.index] != 0) {
        out.features.push_back({position_[f.index], f.value});
      }
    }
    return out;
  }
  Vector z(output_dim_, 0.0);
  for (const Feature& f : x.features) {
    if (f.index <= input_dim_) axpy(f.value, h_.row(f.index - 1), z);
  }
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (z[k] != 0.0) out.features.push_back({static_cast<std::uint32_t>(k + 1), z[k]});
  }
  return out;
}

Dataset ProjectionMap::project(const Dataset& ds) const {
  Dataset out;
  for (const Instance& x : ds.instances()) out.add(project(x));
  out.set_dim(output_dim_);
  return out;
}

Instance project_instance(const ProjectionMap& map, const Instance& x) { return map.project(x); }

ProjectedModel::ProjectedModel(ProjectionMap map_in, double lambda)
    : map(std::move(map_in)), inner(map.output_dim(), lambda) {}

StepOutcome ProjectedModel::step(const Instance& x, double eta, bool want_loss) {
  return opauc::step(inner, map.project(x), eta, want_loss);
}

double ProjectedModel::score(const Instance& x) const { return sparse_dot(map.project(x), inner.w); }

}  // namespace opauc
