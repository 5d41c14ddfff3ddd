#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace propinf {

using FeatureVector = Eigen::VectorXd;

struct LabeledExample {
  FeatureVector x;
  int y = 0;  // binary label, 0 or 1
};

/// Ordered collection of labeled examples with a fixed feature dimension.
/// The dimension is set by the first example added (or up front).
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Eigen::Index dim) : dim_(dim) {}

  /// Appends one example; validates label, dimension and finiteness.
  void add(FeatureVector x, int y);
  void add(const LabeledExample& ex) { add(ex.x, ex.y); }

  /// Appends all examples of another dataset (dimensions must match).
  void append(const Dataset& other);

  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  Eigen::Index dim() const { return dim_; }

  const LabeledExample& operator[](std::size_t i) const { return examples_[i]; }
  auto begin() const { return examples_.begin(); }
  auto end() const { return examples_.end(); }

  /// n x d matrix of features, row per example.
  Eigen::MatrixXd feature_matrix() const;
  Eigen::VectorXd label_vector() const;

  bool operator==(const Dataset& other) const;

 private:
  Eigen::Index dim_ = -1;  // -1 until the first example fixes it
  std::vector<LabeledExample> examples_;
};

/// Deterministic boolean property f : X -> {0,1}, total on the feature space.
class PropertyPredicate {
 public:
  using Evaluator = std::function<bool(const FeatureVector&)>;

  PropertyPredicate(Evaluator evaluator, std::string description);

  /// f(x) = 1 iff x[index] == value.
  static PropertyPredicate feature_equals(Eigen::Index index,
                                          double value = 1.0);

  bool operator()(const FeatureVector& x) const { return evaluator_(x); }
  const std::string& description() const { return description_; }

 private:
  Evaluator evaluator_;
  std::string description_;
};

/// Exact fraction of examples with f(x) = 1. Errors on an empty dataset.
double property_rate(const Dataset& data, const PropertyPredicate& f);

}  // namespace propinf
