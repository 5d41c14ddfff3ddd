#include "propinf/synthetic.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace propinf {

namespace {

constexpr std::size_t kMaxEnumeratedSupport = 1u << 20;

double label_posterior(const SyntheticSpec& spec, const Eigen::VectorXd& x) {
  double logit = spec.label_bias;
  Eigen::Index col = 0;
  for (const auto& feature : spec.features) {
    const int width =
        feature.kind == FeatureKind::categorical ? feature.cardinality : 1;
    for (int j = 0; j < width; ++j, ++col) {
      const double s = feature.kind == FeatureKind::continuous
                           ? x[col]
                           : 2.0 * x[col] - 1.0;
      logit += spec.label_weights[static_cast<std::size_t>(col)] * s;
    }
  }
  if (spec.temperature == 0.0) {
    return logit >= 0.0 ? 1.0 : 0.0;
  }
  return 1.0 / (1.0 + std::exp(-logit / spec.temperature));
}

bool enumerable(const SyntheticSpec& spec) {
  double support = 1.0;
  for (const auto& feature : spec.features) {
    if (feature.kind == FeatureKind::continuous) return false;
    support *=
        feature.kind == FeatureKind::categorical ? feature.cardinality : 2;
    if (support > static_cast<double>(kMaxEnumeratedSupport)) return false;
  }
  return true;
}

FiniteDistribution enumerate_joint(const SyntheticSpec& spec) {
  const Eigen::Index d = spec.expanded_dim();
  std::vector<Eigen::VectorXd> points;
  std::vector<double> masses;
  Eigen::VectorXd current = Eigen::VectorXd::Zero(d);

  // Depth-first product over features, tracking the running mass.
  std::function<void(std::size_t, Eigen::Index, double)> visit =
      [&](std::size_t fi, Eigen::Index col, double mass) {
        if (fi == spec.features.size()) {
          points.push_back(current);
          masses.push_back(mass);
          return;
        }
        const auto& feature = spec.features[fi];
        if (feature.kind == FeatureKind::binary) {
          current[col] = 0.0;
          visit(fi + 1, col + 1, mass * (1.0 - feature.rate));
          current[col] = 1.0;
          visit(fi + 1, col + 1, mass * feature.rate);
          current[col] = 0.0;
        } else {  // categorical, uniform over categories
          const double share = 1.0 / feature.cardinality;
          for (int c = 0; c < feature.cardinality; ++c) {
            current[col + c] = 1.0;
            visit(fi + 1, col + feature.cardinality, mass * share);
            current[col + c] = 0.0;
          }
        }
      };
  visit(0, 0, 1.0);

  Eigen::MatrixXd pm(static_cast<Eigen::Index>(points.size()), d);
  Eigen::VectorXd mv(static_cast<Eigen::Index>(points.size()));
  Eigen::VectorXd pv(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    pm.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
    mv[static_cast<Eigen::Index>(i)] = masses[i];
    pv[static_cast<Eigen::Index>(i)] = label_posterior(spec, points[i]);
  }
  return FiniteDistribution(std::move(pm), std::move(mv), std::move(pv));
}

LabeledExample draw_generative(const SyntheticSpec& spec, Rng& rng) {
  LabeledExample ex;
  ex.x = Eigen::VectorXd::Zero(spec.expanded_dim());
  Eigen::Index col = 0;
  for (const auto& feature : spec.features) {
    switch (feature.kind) {
      case FeatureKind::binary:
        ex.x[col++] = bernoulli(rng, feature.rate) ? 1.0 : 0.0;
        break;
      case FeatureKind::categorical: {
        const std::uint64_t c =
            uniform_index(rng, static_cast<std::uint64_t>(feature.cardinality));
        ex.x[col + static_cast<Eigen::Index>(c)] = 1.0;
        col += feature.cardinality;
        break;
      }
      case FeatureKind::continuous:
        ex.x[col++] = uniform01(rng);
        break;
    }
  }
  ex.y = bernoulli(rng, label_posterior(spec, ex.x)) ? 1 : 0;
  return ex;
}

}  // namespace

Eigen::Index SyntheticSpec::expanded_dim() const {
  Eigen::Index d = 0;
  for (const auto& feature : features) {
    d += feature.kind == FeatureKind::categorical ? feature.cardinality : 1;
  }
  return d;
}

void SyntheticSpec::validate() const {
  if (features.empty()) {
    throw std::invalid_argument("SyntheticSpec: no features");
  }
  for (const auto& feature : features) {
    if (feature.kind == FeatureKind::binary &&
        !(feature.rate >= 0.0 && feature.rate <= 1.0)) {
      throw std::invalid_argument("SyntheticSpec: binary rate outside [0,1]");
    }
    if (feature.kind == FeatureKind::categorical && feature.cardinality < 2) {
      throw std::invalid_argument("SyntheticSpec: cardinality must be >= 2");
    }
  }
  if (static_cast<Eigen::Index>(label_weights.size()) != expanded_dim()) {
    throw std::invalid_argument(
        "SyntheticSpec: label_weights size must match expanded dimension");
  }
  if (temperature < 0.0) {
    throw std::invalid_argument("SyntheticSpec: negative temperature");
  }
  if (property_feature < 0 || property_feature >= expanded_dim()) {
    throw std::invalid_argument("SyntheticSpec: property feature out of range");
  }
}

SyntheticSpec SyntheticSpec::default_task() {
  SyntheticSpec spec;
  spec.features.assign(8, Feature{FeatureKind::binary, 0.5, 2});
  spec.label_weights = {1.5, -1.2, 1.0, 0.8, -0.6, 0.5, -0.35, 0.25};
  spec.label_bias = -0.3;
  spec.temperature = 0.8;
  spec.property_feature = 0;
  return spec;
}

SyntheticTask generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  PropertyPredicate property =
      PropertyPredicate::feature_equals(spec.property_feature, 1.0);
  if (enumerable(spec)) {
    auto joint =
        std::make_shared<const FiniteDistribution>(enumerate_joint(spec));
    if (joint->property_mass(property) <= 0.0) {
      throw std::invalid_argument(
          "generate_synthetic: property has zero mass under the spec");
    }
    if (joint->property_mass(property) >= 1.0) {
      throw std::invalid_argument(
          "generate_synthetic: property complement has zero mass");
    }
    return SyntheticTask{
        DistributionSource::from_finite(
            std::make_shared<const FiniteDistribution>(
                condition(*joint, property, 1))),
        DistributionSource::from_finite(
            std::make_shared<const FiniteDistribution>(
                condition(*joint, property, 0))),
        joint, property};
  }
  // Generative fallback: conditionals by rejection on the property bit.
  const Eigen::Index d = spec.expanded_dim();
  auto conditional = [spec, property](int value) {
    return [spec, property, value](Rng& rng) {
      for (int attempt = 0; attempt < 1 << 20; ++attempt) {
        LabeledExample ex = draw_generative(spec, rng);
        if (static_cast<int>(property(ex.x)) == value) return ex;
      }
      throw std::runtime_error(
          "generate_synthetic: conditional rejection budget exhausted");
    };
  };
  return SyntheticTask{
      DistributionSource::generative(conditional(1), d),
      DistributionSource::generative(conditional(0), d),
      nullptr, property};
}

SyntheticTask inject_random_feature(const DistributionSource& source,
                                    double rate) {
  if (!(rate > 0.0 && rate < 1.0)) {
    throw std::invalid_argument(
        "inject_random_feature: rate must lie in (0,1)");
  }
  const Eigen::Index d = source.dim();
  PropertyPredicate property = PropertyPredicate::feature_equals(d, 1.0);
  if (const FiniteDistribution* base = source.finite()) {
    // Each support point splits into (x,0) and (x,1); posteriors carry over,
    // so the new coordinate is exactly independent of everything else.
    const std::size_t k = base->support_size();
    Eigen::MatrixXd points(static_cast<Eigen::Index>(2 * k), d + 1);
    Eigen::VectorXd masses(static_cast<Eigen::Index>(2 * k));
    Eigen::VectorXd posteriors(static_cast<Eigen::Index>(2 * k));
    for (std::size_t i = 0; i < k; ++i) {
      for (int bit = 0; bit <= 1; ++bit) {
        const Eigen::Index row = static_cast<Eigen::Index>(2 * i + bit);
        points.row(row).head(d) = base->points().row(static_cast<Eigen::Index>(i));
        points(row, d) = bit;
        masses[row] = base->mass(i) * (bit == 1 ? rate : 1.0 - rate);
        posteriors[row] = base->posterior(i);
      }
    }
    auto joint = std::make_shared<const FiniteDistribution>(
        std::move(points), std::move(masses), std::move(posteriors));
    return SyntheticTask{
        DistributionSource::from_finite(
            std::make_shared<const FiniteDistribution>(
                condition(*joint, property, 1))),
        DistributionSource::from_finite(
            std::make_shared<const FiniteDistribution>(
                condition(*joint, property, 0))),
        joint, property};
  }
  auto with_bit = [source, d](double bit) {
    return [source, d, bit](Rng& rng) {
      LabeledExample base = source.draw(rng);
      LabeledExample ex;
      ex.x = Eigen::VectorXd(d + 1);
      ex.x.head(d) = base.x;
      ex.x[d] = bit;
      ex.y = base.y;
      return ex;
    };
  };
  return SyntheticTask{
      DistributionSource::generative(with_bit(1.0), d + 1),
      DistributionSource::generative(with_bit(0.0), d + 1),
      nullptr, property};
}

}  // namespace propinf
