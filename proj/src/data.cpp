#include "opauc/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "opauc/random.hpp"

namespace opauc {

Vector to_dense(const Instance& x, std::size_t dim) {
  Vector out(dim, 0.0);
  to_dense(x, out);
  return out;
}

void to_dense(const Instance& x, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (const Feature& f : x.features) {
    if (f.index <= out.size()) out[f.index - 1] = f.value;
  }
}

double sparse_dot(const Instance& x, std::span<const double> w) {
  double s = 0.0;
  for (const Feature& f : x.features) {
    if (f.index <= w.size()) s += f.value * w[f.index - 1];
  }
  return s;
}

void Dataset::add(Instance x) {
  if (!x.features.empty()) dim_ = std::max<std::size_t>(dim_, x.features.back().index);
  if (x.label == Label::Positive) {
    ++pos_count_;
  } else {
    ++neg_count_;
  }
  instances_.push_back(std::move(x));
}

void Dataset::set_dim(std::size_t dim) {
  if (dim < dim_) throw std::invalid_argument("set_dim: dimension below largest feature index");
  dim_ = dim;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  for (std::size_t r : rows) out.add(instances_.at(r));
  out.dim_ = dim_;
  return out;
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_index(std::string_view s, std::uint32_t& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && out > 0;
}

Label decode_label(std::string_view token, const ParseOptions& options, std::size_t line) {
  double v = 0.0;
  if (!parse_double(token, v)) throw ParseError(line, "bad label '" + std::string(token) + "'");
  if (options.positive_labels) {
    return options.positive_labels->count(v) ? Label::Positive : Label::Negative;
  }
  if (v == 1.0) return Label::Positive;
  if (v == -1.0 || v == 0.0) return Label::Negative;
  throw ParseError(line, "label must be one of +1, 1, -1, 0 (got '" + std::string(token) + "')");
}

}  // namespace

Dataset parse_libsvm(std::istream& in, const ParseOptions& options) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    auto next_token = [&rest]() -> std::string_view {
      const auto begin = rest.find_first_not_of(" \t\r");
      if (begin == std::string_view::npos) {
        rest = {};
        return {};
      }
      rest.remove_prefix(begin);
      const auto end = rest.find_first_of(" \t\r");
      std::string_view tok = rest.substr(0, end);
      rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
      return tok;
    };

    const std::string_view label_token = next_token();
    if (label_token.empty()) continue;

    Instance x;
    x.label = decode_label(label_token, options, line_no);
    std::uint32_t last = 0;
    for (auto tok = next_token(); !tok.empty(); tok = next_token()) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "expected idx:val, got '" + std::string(tok) + "'");
      }
      std::uint32_t index = 0;
      double value = 0.0;
      if (!parse_index(tok.substr(0, colon), index)) {
        throw ParseError(line_no, "bad feature index in '" + std::string(tok) + "'");
      }
      if (!parse_double(tok.substr(colon + 1), value)) {
        throw ParseError(line_no, "bad feature value in '" + std::string(tok) + "'");
      }
      if (index <= last) {
        throw ParseError(line_no, "feature indices must be strictly increasing");
      }
      last = index;
      x.features.push_back({index, value});
    }
    ds.add(std::move(x));
  }
  return ds;
}

Dataset parse_libsvm(const std::string& text, const ParseOptions& options) {
  std::istringstream in(text);
  return parse_libsvm(in, options);
}

Dataset load_libsvm(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_libsvm(in, options);
}

void write_libsvm(std::ostream& out, const Dataset& ds) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (const Instance& x : ds.instances()) {
    out << (x.label == Label::Positive ? "+1" : "-1");
    for (const Feature& f : x.features) out << ' ' << f.index << ':' << f.value;
    out << '\n';
  }
  out.precision(old_precision);
}

ScalingParams fit_scaling(const Dataset& train) {
  if (train.empty()) throw std::invalid_argument("fit_scaling: empty dataset");
  const std::size_t d = train.dim();
  ScalingParams p;
  p.min.assign(d, std::numeric_limits<double>::infinity());
  p.max.assign(d, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> present(d, 0);
  for (const Instance& x : train.instances()) {
    for (const Feature& f : x.features) {
      const std::size_t j = f.index - 1;
      p.min[j] = std::min(p.min[j], f.value);
      p.max[j] = std::max(p.max[j], f.value);
      ++present[j];
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (present[j] < train.size()) {
      p.min[j] = std::min(p.min[j], 0.0);
      p.max[j] = std::max(p.max[j], 0.0);
    }
  }
  return p;
}

Instance apply_scaling(const Instance& x, const ScalingParams& params) {
  Instance out;
  out.label = x.label;
  out.features.reserve(x.features.size());
  for (const Feature& f : x.features) {
    if (f.index > params.dim()) continue;
    const double lo = params.min[f.index - 1];
    const double hi = params.max[f.index - 1];
    if (!(hi > lo)) continue;
    const double v = std::clamp(2.0 * (f.value - lo) / (hi - lo) - 1.0, -1.0, 1.0);
    if (v != 0.0) out.features.push_back({f.index, v});
  }
  return out;
}

Dataset apply_scaling(const Dataset& ds, const ScalingParams& params) {
  Dataset out;
  for (const Instance& x : ds.instances()) out.add(apply_scaling(x, params));
  out.set_dim(std::max(out.dim(), ds.dim()));
  return out;
}

std::string scaling_to_json(const ScalingParams& params) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < params.dim(); ++i) {
    j[std::to_string(i + 1)] = {params.min[i], params.max[i]};
  }
  return j.dump();
}

ScalingParams scaling_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::runtime_error("scaling params: expected a JSON object");
  std::size_t d = 0;
  for (const auto& [key, value] : j.items()) {
    std::uint32_t idx = 0;
    if (!parse_index(key, idx)) throw std::runtime_error("scaling params: bad feature index " + key);
    d = std::max<std::size_t>(d, idx);
  }
  ScalingParams p;
  // features missing from the file behave as constant
  p.min.assign(d, 0.0);
  p.max.assign(d, 0.0);
  for (const auto& [key, value] : j.items()) {
    const std::size_t i = std::stoul(key) - 1;
    const double lo = value.at(0).get<double>();
    const double hi = value.at(1).get<double>();
    if (lo > hi) throw std::runtime_error("scaling params: min > max for feature " + key);
    p.min[i] = lo;
    p.max[i] = hi;
  }
  return p;
}

std::vector<std::size_t> stream_order(const Dataset& ds, std::optional<std::uint64_t> shuffle_seed) {
  if (shuffle_seed) return permutation(ds.size(), *shuffle_seed);
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  return order;
}

std::vector<const Instance*> stream(const Dataset& ds, std::optional<std::uint64_t> shuffle_seed) {
  std::vector<const Instance*> out;
  out.reserve(ds.size());
  for (std::size_t i : stream_order(ds, shuffle_seed)) out.push_back(&ds[i]);
  return out;
}

}  // namespace opauc
