#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "propinf/data.hpp"
#include "propinf/rng.hpp"

namespace propinf {

/// Tolerance for probability-simplex checks (mass normalization, mixture
/// weights). Double-precision accumulation over large supports stays well
/// inside this bound.
inline constexpr double kMassTolerance = 1e-12;

/// Exact pmf over labeled instances: distinct support points x_i with masses
/// m_i summing to 1 and per-point posteriors Pr[Y=1 | X=x_i]. Immutable after
/// construction and safe to share across threads.
class FiniteDistribution {
 public:
  /// points: one support point per row. masses >= 0 summing to 1 within
  /// kMassTolerance. posteriors in [0,1]. Points must be distinct and finite.
  FiniteDistribution(Eigen::MatrixXd points, Eigen::VectorXd masses,
                     Eigen::VectorXd posteriors);

  std::size_t support_size() const {
    return static_cast<std::size_t>(points_.rows());
  }
  Eigen::Index dim() const { return points_.cols(); }

  FeatureVector point(std::size_t i) const {
    return points_.row(static_cast<Eigen::Index>(i)).transpose();
  }
  double mass(std::size_t i) const {
    return masses_[static_cast<Eigen::Index>(i)];
  }
  double posterior(std::size_t i) const {
    return posteriors_[static_cast<Eigen::Index>(i)];
  }
  const Eigen::MatrixXd& points() const { return points_; }
  const Eigen::VectorXd& masses() const { return masses_; }
  const Eigen::VectorXd& posteriors() const { return posteriors_; }

  /// Index of a support point by exact feature equality.
  std::optional<std::size_t> find(const FeatureVector& x) const;

  /// Pr[Y=1 | X=x]; errors when x is not a support point.
  double posterior_at(const FeatureVector& x) const;

  /// Pr[f(X)=1], exact.
  double property_mass(const PropertyPredicate& f) const;

  /// One draw: x by cdf inversion, y ~ Bernoulli(posterior(x)).
  LabeledExample draw(Rng& rng) const;

  /// Text table: documented header, one row per support point with feature
  /// values, mass and posterior. Round-trips exactly through load().
  void save(std::ostream& out) const;
  static FiniteDistribution load(std::istream& in);

  bool operator==(const FiniteDistribution& other) const;

 private:
  Eigen::MatrixXd points_;
  Eigen::VectorXd masses_;
  Eigen::VectorXd posteriors_;
  std::vector<double> cdf_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Sampling oracle over labeled examples. Either exact (finite backend,
/// enumeration available) or generative (sampler only). Sampling is
/// deterministic given the caller's Rng state; there is no hidden global
/// randomness.
class DistributionSource {
 public:
  using Sampler = std::function<LabeledExample(Rng&)>;

  /// An empty source; draw() errors until assigned from a factory.
  DistributionSource() = default;

  static DistributionSource from_finite(FiniteDistribution dist);
  static DistributionSource from_finite(
      std::shared_ptr<const FiniteDistribution> dist);
  static DistributionSource generative(Sampler sampler, Eigen::Index dim);

  LabeledExample draw(Rng& rng) const;
  Eigen::Index dim() const { return dim_; }

  /// Exact pmf when this source is finite-backed, nullptr otherwise.
  const FiniteDistribution* finite() const { return finite_.get(); }
  std::shared_ptr<const FiniteDistribution> finite_shared() const {
    return finite_;
  }

 private:
  std::shared_ptr<const FiniteDistribution> finite_;
  Sampler sampler_;
  Eigen::Index dim_ = 0;
};

/// Weighted mixture specification: nonnegative weights summing to 1.
struct MixtureSpec {
  std::vector<std::pair<DistributionSource, double>> components;
  void validate() const;
};

/// Renormalized restriction of dist to {x : f(x) = value}; posteriors are
/// unchanged on surviving points. Errors when the event has zero mass.
FiniteDistribution condition(const FiniteDistribution& dist,
                             const PropertyPredicate& f, int value);

/// Mixture sampler; when every (positive-weight) component is finite the
/// result is the exact merged pmf, with shared support points combined by
/// mass and mass-weighted posterior.
DistributionSource mix(const MixtureSpec& spec);

/// Exact finite mixture. Zero-weight components are dropped.
FiniteDistribution mix_finite(
    const std::vector<std::pair<const FiniteDistribution*, double>>& parts);

/// (1-p) * clean + p * adversarial as an exact pmf.
FiniteDistribution poisoned(const FiniteDistribution& clean, double p,
                            const FiniteDistribution& adversarial);

/// Same feature marginal as `conditional`, every posterior forced to `label`.
FiniteDistribution adversary_distribution(const FiniteDistribution& conditional,
                                          int label);

/// The complement property 1-f. Together with label_flipped this yields the
/// four variants of the distinguishing setup; their separate success
/// conditions are not derived here.
PropertyPredicate complement(const PropertyPredicate& f);

/// (X, 1-Y): identical feature marginal, posteriors mapped to 1-posterior.
FiniteDistribution label_flipped(const FiniteDistribution& dist);

/// n i.i.d. examples; deterministic given seed.
Dataset sample(const DistributionSource& src, std::size_t n,
               std::uint64_t seed);

/// D_t = t * D_plus + (1-t) * D_minus.
DistributionSource property_mixture(const DistributionSource& dplus,
                                    const DistributionSource& dminus,
                                    double t);

}  // namespace propinf
