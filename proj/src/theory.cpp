#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "propinf/bayes.hpp"

namespace propinf {

namespace {

// Classifier backed by an arbitrary function; used for enumeration checks.
class FunctionModel final : public LabelOnlyModel {
 public:
  explicit FunctionModel(std::function<int(const FeatureVector&)> fn)
      : fn_(std::move(fn)) {}
  int predict(const FeatureVector& x) const override { return fn_(x); }

 private:
  std::function<int(const FeatureVector&)> fn_;
};

// Random pmf on two-coordinate points [b, i]: coordinate 0 carries the
// property bit, coordinate 1 indexes the point. plus_points of the support
// satisfy f(x)=1.
FiniteDistribution random_distribution(Rng& rng, std::size_t plus_points,
                                       std::size_t minus_points) {
  const std::size_t k = plus_points + minus_points;
  Eigen::MatrixXd points(static_cast<Eigen::Index>(k), 2);
  Eigen::VectorXd masses(static_cast<Eigen::Index>(k));
  Eigen::VectorXd posteriors(static_cast<Eigen::Index>(k));
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    points(static_cast<Eigen::Index>(i), 0) = i < plus_points ? 1.0 : 0.0;
    points(static_cast<Eigen::Index>(i), 1) = static_cast<double>(i);
    const double m = 0.05 + uniform01(rng);
    masses[static_cast<Eigen::Index>(i)] = m;
    total += m;
    posteriors[static_cast<Eigen::Index>(i)] = uniform01(rng);
  }
  masses /= total;
  masses[static_cast<Eigen::Index>(k - 1)] +=
      1.0 - masses.sum();  // exact renormalization
  return FiniteDistribution(std::move(points), std::move(masses),
                            std::move(posteriors));
}

PropertyPredicate first_coordinate_property() {
  return PropertyPredicate::feature_equals(0, 1.0);
}

TheoryCheck check_poisoned_posterior(std::uint64_t seed) {
  TheoryCheck check;
  check.name = "poisoned_posterior_matches_mixture";
  const PropertyPredicate f = first_coordinate_property();
  Rng rng = make_rng(derive_seed(seed, {1}));
  double worst = 0.0;
  std::size_t cases = 0;
  for (int pi = 0; pi <= 10; ++pi) {
    const double p = 0.05 * pi;
    for (int ti = 1; ti <= 9; ++ti) {
      const double t = 0.1 * ti;
      const FiniteDistribution dplus = random_distribution(rng, 6, 0);
      const FiniteDistribution dminus = random_distribution(rng, 0, 4);
      const FiniteDistribution clean =
          mix_finite({{&dplus, t}, {&dminus, 1.0 - t}});
      const FiniteDistribution adversarial =
          adversary_distribution(condition(clean, f, 1), 1);
      const FiniteDistribution tilted = poisoned(clean, p, adversarial);
      for (std::size_t i = 0; i < clean.support_size(); ++i) {
        const FeatureVector x = clean.point(i);
        if (!f(x)) continue;
        const double closed = poisoned_posterior(p, t, clean.posterior(i));
        const double enumerated = tilted.posterior_at(x);
        worst = std::max(worst, std::abs(closed - enumerated));
        ++cases;
      }
    }
  }
  check.cases = cases;
  check.max_residual = worst;
  check.pass = worst <= 1e-12;
  std::ostringstream params;
  params << "p grid 0..0.5 step 0.05; t grid 0.1..0.9 step 0.1; " << cases
         << " property points";
  check.params = params.str();
  return check;
}

TheoryCheck check_threshold_biconditional(std::uint64_t seed) {
  TheoryCheck check;
  check.name = "certainty_threshold_biconditional";
  Rng rng = make_rng(derive_seed(seed, {2}));
  const double boundary_eps = 1e-9;
  double worst_boundary = 0.0;
  std::size_t violations = 0;
  std::size_t cases = 0;
  for (int pi = 0; pi <= 10; ++pi) {
    const double p = 0.05 * pi;
    for (int ti = 1; ti <= 9; ++ti) {
      const double t = 0.1 * ti;
      for (const double tau : {0.0, 0.02, 0.05, 0.1, p / (2.0 * t)}) {
        for (int qi = 0; qi <= 20; ++qi) {
          const double post = 0.05 * qi;
          const double tilted = poisoned_posterior(p, t, post);
          const double rhs = 0.5 + tau * t / (p + t * (1.0 - p));
          const double crt = certainty_from_posterior(post);
          const double thr = poisoned_certainty_threshold(p, t, tau);
          ++cases;
          if (std::abs(crt - thr) <= boundary_eps) {
            // On the boundary both sides must agree up to rounding.
            worst_boundary = std::max(worst_boundary, std::abs(tilted - rhs));
            if (std::abs(tilted - rhs) > boundary_eps) ++violations;
            continue;
          }
          const bool lhs_holds = tilted >= rhs;
          const bool rhs_holds = crt <= thr;
          if (lhs_holds != rhs_holds) ++violations;
        }
      }
    }
  }
  (void)rng;
  check.cases = cases;
  check.max_residual = worst_boundary;
  check.pass = violations == 0;
  std::ostringstream params;
  params << cases << " (p,t,tau,posterior) cells; " << violations
         << " violations";
  check.params = params.str();
  return check;
}

TheoryCheck check_risk_decomposition(std::uint64_t seed) {
  TheoryCheck check;
  check.name = "risk_decomposition_residual";
  Rng rng = make_rng(derive_seed(seed, {3}));
  double worst = 0.0;
  const std::size_t pairs = 1000;
  for (std::size_t trial = 0; trial < pairs; ++trial) {
    const std::size_t plus = 1 + uniform_index(rng, 10);
    const std::size_t minus = 1 + uniform_index(rng, 10);
    const FiniteDistribution dist = random_distribution(rng, plus, minus);
    std::vector<int> table(dist.support_size());
    for (auto& bit : table) bit = bernoulli(rng, 0.5) ? 1 : 0;
    const FunctionModel h([&table](const FeatureVector& x) {
      return table[static_cast<std::size_t>(x[1])];
    });
    const RiskDecomposition parts = risk_decomposition(h, dist);
    worst = std::max(worst, std::abs(parts.residual));
  }
  check.cases = pairs;
  check.max_residual = worst;
  check.pass = worst <= 1e-12;
  check.params = "1000 random classifier/distribution pairs, <=20 points";
  return check;
}

TheoryCheck check_bayes_optimal_exhaustive(std::uint64_t seed) {
  TheoryCheck check;
  check.name = "bayes_optimal_beats_all";
  Rng rng = make_rng(derive_seed(seed, {4}));
  double worst = 0.0;
  const std::size_t dists = 100;
  for (std::size_t trial = 0; trial < dists; ++trial) {
    const std::size_t plus = 1 + uniform_index(rng, 6);
    const std::size_t minus = 1 + uniform_index(rng, 6);
    const FiniteDistribution dist = random_distribution(rng, plus, minus);
    const std::size_t k = dist.support_size();
    const double star = risk(bayes_optimal(dist), dist);
    // Exhaustive rival enumeration: every labeling of the support.
    for (std::uint64_t mask = 0; mask < (1ull << k); ++mask) {
      double rival = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double post = dist.posterior(i);
        rival += dist.mass(i) * ((mask >> i) & 1ull ? 1.0 - post : post);
      }
      worst = std::max(worst, star - rival);
    }
  }
  check.cases = dists;
  check.max_residual = std::max(worst, 0.0);
  check.pass = worst <= 1e-15;
  check.params = "100 random distributions, <=12 support points, all 2^k rivals";
  return check;
}

TheoryCheck check_band_prediction_margin(std::uint64_t seed) {
  TheoryCheck check;
  check.name = "band_prediction_margin";
  (void)seed;
  // Property conditional with three band points and two far points; the
  // off-property conditional mixes ambiguous and confident points.
  auto make_plus = [] {
    Eigen::MatrixXd pts(5, 2);
    Eigen::VectorXd mass(5), post(5);
    for (int i = 0; i < 5; ++i) {
      pts(i, 0) = 1.0;
      pts(i, 1) = i;
    }
    mass << 0.2, 0.2, 0.2, 0.2, 0.2;
    post << 0.4, 0.375, 0.35, 0.05, 0.95;  // crt 0.2, 0.25, 0.3, 0.9, -0.9
    return FiniteDistribution(pts, mass, post);
  };
  auto make_minus = [] {
    Eigen::MatrixXd pts(3, 2);
    Eigen::VectorXd mass(3), post(3);
    for (int i = 0; i < 3; ++i) {
      pts(i, 0) = 0.0;
      pts(i, 1) = 10.0 + i;
    }
    mass << 0.5, 0.3, 0.2;
    post << 0.4, 0.8, 0.5;
    return FiniteDistribution(pts, mass, post);
  };
  const FiniteDistribution dplus = make_plus();
  const FiniteDistribution dminus = make_minus();
  const PropertyPredicate f = first_coordinate_property();

  double worst_shortfall = 0.0;
  std::size_t cases = 0;
  for (const double tau : {0.005, 0.01}) {
    for (const double gamma : {0.1, 0.25}) {
      TheoremParams params;
      params.p = 0.1;
      params.t0 = 0.3;
      params.t1 = 0.7;
      params.tau = tau;
      params.gamma = gamma;
      const CertaintyBand band = query_band(params);
      for (int bit = 0; bit <= 1; ++bit) {
        const double t = bit == 0 ? params.t0 : params.t1;
        const FiniteDistribution clean =
            mix_finite({{&dplus, t}, {&dminus, 1.0 - t}});
        if (!(band_mass(clean, f, params) >
              required_band_mass_margin(params.epsilon_n, tau, gamma))) {
          worst_shortfall = 1.0;  // the construction must satisfy the condition
        }
        const FiniteDistribution adversarial =
            adversary_distribution(condition(clean, f, 1), 1);
        auto tilted = std::make_shared<const FiniteDistribution>(
            poisoned(clean, params.p, adversarial));
        const BayesClassifier model = bayes_optimal(tilted);
        double band_total = 0.0;
        double band_positive = 0.0;
        for (std::size_t i = 0; i < clean.support_size(); ++i) {
          const FeatureVector x = clean.point(i);
          if (!f(x)) continue;
          const double crt = certainty_from_posterior(clean.posterior(i));
          if (!band.contains(crt)) continue;
          band_total += clean.mass(i);
          band_positive += clean.mass(i) * model.predict(x);
        }
        const double mean_prediction = band_positive / band_total;
        const double shortfall =
            bit == 0 ? (0.5 + gamma) - mean_prediction
                     : mean_prediction - (0.5 - gamma);
        worst_shortfall = std::max(worst_shortfall, shortfall);
        ++cases;
      }
    }
  }
  check.cases = cases;
  check.max_residual = std::max(worst_shortfall, 0.0);
  check.pass = worst_shortfall <= 0.0;
  check.params = "p=0.1 t0=0.3 t1=0.7, tau in {0.005,0.01}, gamma in {0.1,0.25}";
  return check;
}

TheoryCheck check_posterior_monotonicity(std::uint64_t seed) {
  TheoryCheck check;
  check.name = "poisoned_posterior_monotone_in_p";
  (void)seed;
  double worst = 0.0;
  std::size_t cases = 0;
  for (int ti = 1; ti <= 9; ++ti) {
    const double t = 0.1 * ti;
    for (const double post : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      double prev = poisoned_posterior(0.0, t, post);
      for (int pi = 1; pi <= 19; ++pi) {
        const double p = 0.05 * pi;
        const double cur = poisoned_posterior(p, t, post);
        worst = std::max(worst, prev - cur);
        prev = cur;
        ++cases;
      }
    }
  }
  check.cases = cases;
  check.max_residual = std::max(worst, 0.0);
  check.pass = worst <= 1e-15;
  check.params = "p grid 0..0.95, t grid 0.1..0.9, posteriors {0,...,1}";
  return check;
}

}  // namespace

std::vector<TheoryCheck> run_theory_checks(std::uint64_t seed) {
  return {
      check_poisoned_posterior(seed),
      check_threshold_biconditional(seed),
      check_risk_decomposition(seed),
      check_bayes_optimal_exhaustive(seed),
      check_band_prediction_margin(seed),
      check_posterior_monotonicity(seed),
  };
}

void write_theory_report(std::ostream& out,
                         const std::vector<TheoryCheck>& checks) {
  out << "check,params,cases,max_residual,pass\n";
  for (const auto& check : checks) {
    std::string quoted = check.params;
    for (auto& c : quoted) {
      if (c == ',') c = ';';
    }
    out.precision(17);
    out << check.name << ',' << quoted << ',' << check.cases << ','
        << check.max_residual << ',' << (check.pass ? "pass" : "FAIL") << '\n';
  }
}

}  // namespace propinf
