#include "propinf/data.hpp"

#include <stdexcept>
#include <utility>

namespace propinf {

void Dataset::add(FeatureVector x, int y) {
  if (y != 0 && y != 1) {
    throw std::invalid_argument("Dataset::add: label must be 0 or 1");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("Dataset::add: features must be finite");
  }
  if (dim_ < 0) {
    dim_ = x.size();
  } else if (x.size() != dim_) {
    throw std::invalid_argument("Dataset::add: feature dimension mismatch");
  }
  examples_.push_back({std::move(x), y});
}

void Dataset::append(const Dataset& other) {
  for (const auto& ex : other) add(ex.x, ex.y);
}

Eigen::MatrixXd Dataset::feature_matrix() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(size()), dim_ < 0 ? 0 : dim_);
  for (std::size_t i = 0; i < size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = examples_[i].x.transpose();
  }
  return m;
}

Eigen::VectorXd Dataset::label_vector() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = examples_[i].y;
  }
  return y;
}

bool Dataset::operator==(const Dataset& other) const {
  if (size() != other.size() || dim_ != other.dim_) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (examples_[i].y != other.examples_[i].y) return false;
    if (examples_[i].x != other.examples_[i].x) return false;
  }
  return true;
}

PropertyPredicate::PropertyPredicate(Evaluator evaluator,
                                     std::string description)
    : evaluator_(std::move(evaluator)), description_(std::move(description)) {
  if (!evaluator_) {
    throw std::invalid_argument("PropertyPredicate: null evaluator");
  }
}

PropertyPredicate PropertyPredicate::feature_equals(Eigen::Index index,
                                                    double value) {
  return PropertyPredicate(
      [index, value](const FeatureVector& x) {
        if (index < 0 || index >= x.size()) {
          throw std::out_of_range("PropertyPredicate: feature index " +
                                  std::to_string(index) + " out of range");
        }
        return x[index] == value;
      },
      "feature[" + std::to_string(index) + "]==" + std::to_string(value));
}

double property_rate(const Dataset& data, const PropertyPredicate& f) {
  if (data.empty()) {
    throw std::invalid_argument("property_rate: empty dataset");
  }
  std::size_t hits = 0;
  for (const auto& ex : data) {
    if (f(ex.x)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace propinf
