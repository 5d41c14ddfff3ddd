#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "propinf/distribution.hpp"

namespace propinf {

enum class FeatureKind { binary, categorical, continuous };

/// Synthetic tabular task: independent features and a linear-logit label rule
///   Pr[Y=1 | x] = sigmoid((w . s(x) + bias) / temperature)
/// where s maps binary/one-hot coordinates to {-1,+1} and passes continuous
/// coordinates through. temperature 0 makes labels deterministic.
struct SyntheticSpec {
  struct Feature {
    FeatureKind kind = FeatureKind::binary;
    double rate = 0.5;    // Pr[feature = 1] for binary
    int cardinality = 2;  // categories for categorical (expanded one-hot)
  };
  std::vector<Feature> features;
  std::vector<double> label_weights;  // one per expanded coordinate
  double label_bias = 0.0;
  double temperature = 1.0;
  int property_feature = 0;  // expanded coordinate index defining f(x)=x[i]==1
  std::uint64_t seed = 0;

  Eigen::Index expanded_dim() const;
  void validate() const;

  /// The calibrated default: 8 binary features, linear logits with a
  /// temperature chosen so the exact optimum misclassifies about 15% of the
  /// mass, leaving a healthy band of ambiguous points.
  static SyntheticSpec default_task();
};

/// Conditional sources plus the exact joint (when enumerable) for a property.
struct SyntheticTask {
  DistributionSource dplus;   // (X,Y) | f(X)=1
  DistributionSource dminus;  // (X,Y) | f(X)=0
  std::shared_ptr<const FiniteDistribution> joint;  // null when generative
  PropertyPredicate property;
};

/// Builds the conditional sources for spec.property_feature. Finite variants
/// (no continuous features, support not too large) expose exact posteriors
/// for oracle cross-checks. Errors when the property has zero mass.
SyntheticTask generate_synthetic(const SyntheticSpec& spec);

/// Appends an independent Bernoulli(rate) coordinate to a source and returns
/// the conditionals with respect to that new coordinate. Feature marginals at
/// matching base points and all label posteriors are unchanged.
SyntheticTask inject_random_feature(const DistributionSource& source,
                                    double rate);

}  // namespace propinf
