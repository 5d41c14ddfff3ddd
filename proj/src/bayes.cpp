#include "propinf/bayes.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace propinf {

BayesClassifier::BayesClassifier(
    std::shared_ptr<const FiniteDistribution> dist)
    : dist_(std::move(dist)) {
  if (!dist_) throw std::invalid_argument("BayesClassifier: null distribution");
  labels_.reserve(dist_->support_size());
  for (std::size_t i = 0; i < dist_->support_size(); ++i) {
    labels_.push_back(dist_->posterior(i) >= 0.5 ? 1 : 0);
  }
}

int BayesClassifier::predict(const FeatureVector& x) const {
  const auto i = dist_->find(x);
  if (!i) {
    throw std::invalid_argument("BayesClassifier: point not in support");
  }
  return labels_[*i];
}

void TheoremParams::validate() const {
  if (!(0.0 <= t0 && t0 < t1 && t1 <= 1.0)) {
    throw std::invalid_argument("TheoremParams: need 0 <= t0 < t1 <= 1");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("TheoremParams: p must lie in [0,1]");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("TheoremParams: tau must lie in [0,1]");
  }
  if (!(gamma >= 0.0 && gamma <= 0.5)) {
    throw std::invalid_argument("TheoremParams: gamma must lie in [0,1/2]");
  }
  if (!(epsilon_n >= 0.0) || !(delta_n >= 0.0 && delta_n <= 1.0)) {
    throw std::invalid_argument("TheoremParams: invalid epsilon/delta");
  }
}

double certainty_from_posterior(double posterior) {
  return 1.0 - 2.0 * posterior;
}

double certainty(const FiniteDistribution& dist, const FeatureVector& x) {
  return certainty_from_posterior(dist.posterior_at(x));
}

BayesClassifier bayes_optimal(const FiniteDistribution& dist) {
  return BayesClassifier(std::make_shared<const FiniteDistribution>(dist));
}

BayesClassifier bayes_optimal(std::shared_ptr<const FiniteDistribution> dist) {
  return BayesClassifier(std::move(dist));
}

double bayes_error(const FiniteDistribution& dist) {
  double total = 0.0;
  for (std::size_t i = 0; i < dist.support_size(); ++i) {
    total += dist.mass(i) * std::min(dist.posterior(i), 1.0 - dist.posterior(i));
  }
  return total;
}

double risk(const LabelOnlyModel& h, const FiniteDistribution& dist) {
  double total = 0.0;
  for (std::size_t i = 0; i < dist.support_size(); ++i) {
    const int label = h.predict(dist.point(i));
    if (label != 0 && label != 1) {
      throw std::invalid_argument("risk: classifier returned non-binary label");
    }
    total += dist.mass(i) *
             (label == 1 ? 1.0 - dist.posterior(i) : dist.posterior(i));
  }
  return total;
}

RiskDecomposition risk_decomposition(const LabelOnlyModel& h,
                                     const FiniteDistribution& dist) {
  RiskDecomposition out;
  out.bayes = bayes_error(dist);
  double total_risk = 0.0;
  for (std::size_t i = 0; i < dist.support_size(); ++i) {
    const double post = dist.posterior(i);
    const int star = post >= 0.5 ? 1 : 0;
    const int label = h.predict(dist.point(i));
    total_risk += dist.mass(i) * (label == 1 ? 1.0 - post : post);
    out.excess += dist.mass(i) * std::abs(static_cast<double>(label - star)) *
                  std::abs(certainty_from_posterior(post));
  }
  out.residual = total_risk - out.bayes - out.excess;
  return out;
}

double poisoned_posterior(double p, double t, double clean_posterior) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("poisoned_posterior: p must lie in [0,1]");
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("poisoned_posterior: t must lie in [0,1]");
  }
  const double denom = p + t * (1.0 - p);
  if (denom <= 0.0) {
    throw std::invalid_argument(
        "poisoned_posterior: degenerate denominator (p=0 and t=0)");
  }
  return p / denom + t * (1.0 - p) / denom * clean_posterior;
}

double poisoned_certainty_threshold(double p, double t, double tau) {
  if (t <= 0.0) {
    throw std::invalid_argument("poisoned_certainty_threshold: t must be > 0");
  }
  if (p >= 1.0) {
    throw std::invalid_argument("poisoned_certainty_threshold: p must be < 1");
  }
  return (p - 2.0 * tau * t) / (t * (1.0 - p));
}

CertaintyBand query_band(const TheoremParams& params) {
  params.validate();
  CertaintyBand band;
  band.lower = (params.p + 2.0 * params.tau * params.t1) /
               (params.t1 * (1.0 - params.p));
  band.upper = params.t0 > 0.0
                   ? (params.p - 2.0 * params.tau * params.t0) /
                         (params.t0 * (1.0 - params.p))
                   : std::numeric_limits<double>::infinity();
  return band;
}

double band_mass(const FiniteDistribution& dist, const PropertyPredicate& f,
                 const TheoremParams& params) {
  const CertaintyBand band = query_band(params);
  double total = 0.0;
  for (std::size_t i = 0; i < dist.support_size(); ++i) {
    if (!f(dist.point(i))) continue;
    if (band.contains(certainty_from_posterior(dist.posterior(i)))) {
      total += dist.mass(i);
    }
  }
  return total;
}

double required_band_mass(double epsilon_n, double tau) {
  if (tau <= 0.0) {
    throw std::invalid_argument("required_band_mass: tau must be > 0");
  }
  return 2.0 * epsilon_n / tau;
}

double required_band_mass_margin(double epsilon_n, double tau, double gamma) {
  if (tau <= 0.0 || gamma >= 0.5) {
    throw std::invalid_argument(
        "required_band_mass_margin: need tau > 0 and gamma < 1/2");
  }
  return epsilon_n / (tau * (1.0 - 2.0 * gamma));
}

std::size_t chernoff_query_count(double delta_n, double gamma) {
  if (!(delta_n > 0.0 && delta_n < 1.0)) {
    throw std::invalid_argument(
        "chernoff_query_count: delta must lie in (0,1)");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("chernoff_query_count: gamma must be > 0");
  }
  return static_cast<std::size_t>(
      std::ceil(-std::log(delta_n) / (2.0 * gamma * gamma)));
}

int theoretical_adversary(const LabelOnlyModel& model,
                          const DistributionSource& dplus,
                          const PropertyPredicate& f,
                          const TheoremParams& params, std::uint64_t seed) {
  params.validate();
  const FiniteDistribution* exact = dplus.finite();
  if (exact == nullptr) {
    throw std::invalid_argument(
        "theoretical_adversary: property conditional must be finite-backed "
        "(exact certainty required)");
  }
  const CertaintyBand band = query_band(params);
  const std::size_t m = chernoff_query_count(params.delta_n, params.gamma);
  const std::size_t budget = params.rejection_factor * m;

  Rng rng = make_rng(derive_seed(seed, {0xADu}));
  std::size_t collected = 0;
  std::size_t positive = 0;
  for (std::size_t attempt = 0; attempt < budget && collected < m; ++attempt) {
    const LabeledExample ex = exact->draw(rng);
    if (!f(ex.x)) {
      throw std::logic_error(
          "theoretical_adversary: conditional source emitted a point without "
          "the property");
    }
    if (!band.contains(certainty_from_posterior(exact->posterior_at(ex.x)))) {
      continue;
    }
    positive += model.predict(ex.x) == 1 ? 1 : 0;
    ++collected;
  }
  if (collected < m) {
    throw BandSamplingError(
        "theoretical_adversary: rejection budget exhausted after " +
            std::to_string(budget) + " draws (" + std::to_string(collected) +
            "/" + std::to_string(m) + " band points found)",
        collected);
  }
  const double rho =
      static_cast<double>(positive) / static_cast<double>(collected);
  return rho > 0.5 ? 0 : 1;  // high mean prediction indicates the lower rate
}

int oracle_game_trial(const DistributionSource& dplus,
                      const DistributionSource& dminus,
                      const PropertyPredicate& f, const TheoremParams& params,
                      int hidden_bit, std::uint64_t seed) {
  params.validate();
  if (dplus.finite() == nullptr || dminus.finite() == nullptr) {
    throw std::invalid_argument(
        "oracle_game_trial: both conditionals must be finite-backed");
  }
  const double t = hidden_bit == 0 ? params.t0 : params.t1;
  const DistributionSource clean = property_mixture(dplus, dminus, t);
  const FiniteDistribution adversarial =
      adversary_distribution(*dplus.finite(), 1);
  auto tilted = std::make_shared<const FiniteDistribution>(
      poisoned(*clean.finite(), params.p, adversarial));
  const BayesClassifier model = bayes_optimal(tilted);
  return theoretical_adversary(model, dplus, f, params, seed);
}

}  // namespace propinf
