#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "opauc/linalg.hpp"

namespace opauc {

enum class Label : int { Negative = -1, Positive = 1 };

inline double sign(Label y) { return y == Label::Positive ? 1.0 : -1.0; }
inline Label opposite(Label y) {
  return y == Label::Positive ? Label::Negative : Label::Positive;
}

// Feature indices are 1-based, matching the LIBSVM text format.
struct Feature {
  std::uint32_t index;
  double value;

  friend bool operator==(const Feature&, const Feature&) = default;
};

struct Instance {
  std::vector<Feature> features;  // strictly increasing indices
  Label label = Label::Negative;

  friend bool operator==(const Instance&, const Instance&) = default;
};

// Dense copy of x in R^dim; features beyond dim are dropped.
Vector to_dense(const Instance& x, std::size_t dim);
void to_dense(const Instance& x, std::span<double> out);

// <w, x> over the stored entries; features beyond w.size() contribute 0.
double sparse_dot(const Instance& x, std::span<const double> w);

class Dataset {
 public:
  Dataset() = default;

  void add(Instance x);

  const std::vector<Instance>& instances() const { return instances_; }
  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }
  const Instance& operator[](std::size_t i) const { return instances_[i]; }

  std::size_t dim() const { return dim_; }
  // Raise the dimension, e.g. to align a test split with its training split.
  void set_dim(std::size_t dim);
  std::size_t pos_count() const { return pos_count_; }
  std::size_t neg_count() const { return neg_count_; }

  Dataset subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<Instance> instances_;
  std::size_t dim_ = 0;
  std::size_t pos_count_ = 0;
  std::size_t neg_count_ = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ParseOptions {
  // When set, labels are read as arbitrary numbers and those in the set map
  // to +1, everything else to -1. Otherwise labels must be one of +1, 1, -1, 0.
  std::optional<std::set<double>> positive_labels;
};

Dataset parse_libsvm(std::istream& in, const ParseOptions& options = {});
Dataset parse_libsvm(const std::string& text, const ParseOptions& options = {});
Dataset load_libsvm(const std::string& path, const ParseOptions& options = {});

// Values are written with round-trip precision.
void write_libsvm(std::ostream& out, const Dataset& ds);

// Per-feature [min, max] over a training set; absent entries count as 0.
struct ScalingParams {
  std::vector<double> min;  // index i holds feature i + 1
  std::vector<double> max;

  std::size_t dim() const { return min.size(); }
};

ScalingParams fit_scaling(const Dataset& train);

// Maps stored values to [-1, 1]; out-of-range values are clamped and
// features unknown to the params (or constant in training) scale to 0.
// Zeros produced by scaling are dropped from the sparse map.
Instance apply_scaling(const Instance& x, const ScalingParams& params);
Dataset apply_scaling(const Dataset& ds, const ScalingParams& params);

std::string scaling_to_json(const ScalingParams& params);
ScalingParams scaling_from_json(const std::string& text);

// Presentation order for a single pass: identity without a seed, otherwise
// the Fisher-Yates permutation drawn from the seed.
std::vector<std::size_t> stream_order(const Dataset& ds, std::optional<std::uint64_t> shuffle_seed);
std::vector<const Instance*> stream(const Dataset& ds, std::optional<std::uint64_t> shuffle_seed);

}  // namespace opauc
