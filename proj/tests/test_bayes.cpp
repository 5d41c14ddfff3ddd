#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <numeric>

#include "propinf/bayes.hpp"

using namespace propinf;

namespace {

FiniteDistribution make_dist(const std::vector<std::vector<double>>& pts,
                             const std::vector<double>& masses,
                             const std::vector<double>& posteriors) {
  Eigen::MatrixXd points(static_cast<Eigen::Index>(pts.size()),
                         static_cast<Eigen::Index>(pts.front().size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts[i].size(); ++j) {
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          pts[i][j];
    }
  }
  Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(
      masses.data(), static_cast<Eigen::Index>(masses.size()));
  Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(
      posteriors.data(), static_cast<Eigen::Index>(posteriors.size()));
  return FiniteDistribution(std::move(points), m, q);
}

class StubModel final : public LabelOnlyModel {
 public:
  explicit StubModel(std::function<int(const FeatureVector&)> fn)
      : fn_(std::move(fn)) {}
  int predict(const FeatureVector& x) const override { return fn_(x); }

 private:
  std::function<int(const FeatureVector&)> fn_;
};

const PropertyPredicate kFirstCoord = PropertyPredicate::feature_equals(0);

// Compliant construction for the distinguishing game: three property points
// inside the (p=0.1, t0=0.3, t1=0.7, tau<=0.01) certainty band.
FiniteDistribution band_dplus() {
  return make_dist({{1, 0}, {1, 1}, {1, 2}, {1, 3}, {1, 4}},
                   {0.2, 0.2, 0.2, 0.2, 0.2}, {0.4, 0.375, 0.35, 0.05, 0.95});
}
FiniteDistribution band_dminus() {
  return make_dist({{0, 0}, {0, 1}, {0, 2}}, {0.5, 0.3, 0.2}, {0.4, 0.8, 0.5});
}

}  // namespace

TEST_CASE("signed certainty evaluates 1 - 2*posterior") {
  CHECK(certainty_from_posterior(0.5) == 0.0);
  CHECK(certainty_from_posterior(1.0) == -1.0);
  CHECK(certainty_from_posterior(0.3) == doctest::Approx(0.4).epsilon(1e-15));
  const auto dist = make_dist({{1}}, {1.0}, {0.3});
  FeatureVector x(1);
  x << 1;
  CHECK(certainty(dist, x) == doctest::Approx(0.4).epsilon(1e-15));
  FeatureVector off(1);
  off << 2;
  CHECK_THROWS_AS(certainty(dist, off), std::invalid_argument);
}

TEST_CASE("argmax labels with the 0.5 tie resolving to 1") {
  const auto dist =
      make_dist({{1}, {2}, {3}}, {0.3, 0.3, 0.4}, {0.9, 0.1, 0.5});
  const auto h = bayes_optimal(dist);
  CHECK(h.label_at(0) == 1);
  CHECK(h.label_at(1) == 0);
  CHECK(h.label_at(2) == 1);  // exact tie
}

TEST_CASE("bayes error formula") {
  CHECK(bayes_error(make_dist({{1}, {2}}, {0.3, 0.7}, {0.0, 1.0})) == 0.0);
  CHECK(bayes_error(make_dist({{1}}, {1.0}, {0.5})) == 0.5);
  // Hand computation: 0.5*0.3 + 0.5*0.2 = 0.25.
  CHECK(bayes_error(make_dist({{1}, {2}}, {0.5, 0.5}, {0.7, 0.2})) ==
        doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("risk against hand-computed and enumerated values") {
  const auto dist = make_dist({{1}}, {1.0}, {0.7});
  const StubModel constant_one([](const FeatureVector&) { return 1; });
  CHECK(risk(constant_one, dist) == doctest::Approx(0.3).epsilon(1e-15));

  const auto two = make_dist({{0}, {1}}, {0.4, 0.6}, {0.8, 0.3});
  CHECK(risk(bayes_optimal(two), two) ==
        doctest::Approx(bayes_error(two)).epsilon(1e-15));

  // Anti-optimal classifier must match the direct enumeration:
  // risk = 0.4*(1-0.8) + 0.6*0.3 flipped -> 0.4*0.8? No: anti predicts the
  // argmin, so risk = 0.4*0.8 + 0.6*(1-0.3) = 0.32 + 0.42 = 0.74.
  const StubModel anti([&two](const FeatureVector& x) {
    return two.posterior_at(x) >= 0.5 ? 0 : 1;
  });
  CHECK(risk(anti, two) == doctest::Approx(0.74).epsilon(1e-14));

  const StubModel partial([](const FeatureVector& x) {
    if (x[0] > 0.5) throw std::invalid_argument("undefined here");
    return 0;
  });
  CHECK_THROWS(risk(partial, two));
}

TEST_CASE("risk decomposition: exact identities and random pairs") {
  const auto single = make_dist({{1}}, {1.0}, {0.7});
  const StubModel zero([](const FeatureVector&) { return 0; });
  const auto parts = risk_decomposition(zero, single);
  // risk 0.7 = bayes 0.3 + 1 * |crt| 0.4
  CHECK(parts.bayes == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(parts.excess == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(std::abs(parts.residual) <= 1e-15);

  const auto star_parts =
      risk_decomposition(bayes_optimal(single), single);
  CHECK(star_parts.excess == 0.0);
  CHECK(std::abs(star_parts.residual) <= 1e-15);

  // Property check against an independent risk computation.
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + uniform_index(rng, 19);
    std::vector<std::vector<double>> pts;
    std::vector<double> masses, posts;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      pts.push_back({static_cast<double>(i)});
      masses.push_back(0.05 + uniform01(rng));
      posts.push_back(uniform01(rng));
      total += masses.back();
    }
    for (auto& m : masses) m /= total;
    masses.back() += 1.0 - std::accumulate(masses.begin(), masses.end(), 0.0);
    const auto dist = make_dist(pts, masses, posts);
    std::vector<int> table(k);
    for (auto& bit : table) bit = bernoulli(rng, 0.5) ? 1 : 0;
    const StubModel h([&table](const FeatureVector& x) {
      return table[static_cast<std::size_t>(x[0])];
    });
    const auto decomposition = risk_decomposition(h, dist);
    CHECK(std::abs(decomposition.residual) <= 1e-12);
    double direct = 0.0;  // independent oracle for the total risk
    for (std::size_t i = 0; i < k; ++i) {
      direct += dist.mass(i) *
                (table[i] == 1 ? 1.0 - dist.posterior(i) : dist.posterior(i));
    }
    CHECK(risk(h, dist) == doctest::Approx(direct).epsilon(1e-14));
  }
}

TEST_CASE("poisoned posterior closed form") {
  CHECK(poisoned_posterior(0.0, 0.4, 0.37) == doctest::Approx(0.37).epsilon(1e-15));
  CHECK(poisoned_posterior(1.0, 0.4, 0.37) == 1.0);
  CHECK(poisoned_posterior(0.1, 0.5, 0.5) ==
        doctest::Approx(13.0 / 22.0).epsilon(1e-14));
  CHECK_THROWS_AS(poisoned_posterior(0.0, 0.0, 0.5), std::invalid_argument);

  // Nondecreasing in p for clean posteriors <= 1.
  double prev = poisoned_posterior(0.0, 0.3, 0.2);
  for (int pi = 1; pi <= 20; ++pi) {
    const double cur = poisoned_posterior(0.05 * pi, 0.3, 0.2);
    CHECK(cur >= prev - 1e-15);
    prev = cur;
  }
}

TEST_CASE("certainty threshold endpoints of the query band") {
  CHECK(poisoned_certainty_threshold(0.1, 0.3, 0.0) ==
        doctest::Approx(0.37037037037037035).epsilon(1e-12));
  CHECK(poisoned_certainty_threshold(0.1, 0.7, 0.0) ==
        doctest::Approx(0.15873015873015872).epsilon(1e-12));
  // tau = p/(2t) zeroes the numerator.
  CHECK(std::abs(poisoned_certainty_threshold(0.2, 0.4, 0.2 / 0.8)) <= 1e-15);
  CHECK_THROWS_AS(poisoned_certainty_threshold(0.1, 0.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(poisoned_certainty_threshold(1.0, 0.5, 0.0),
                  std::invalid_argument);
}

TEST_CASE("band mass over the support") {
  TheoremParams params;
  params.p = 0.1;
  params.t0 = 0.3;
  params.t1 = 0.7;
  params.tau = 0.0;

  // All property points at crt = 0.25, inside (0.1587, 0.3704].
  const auto dist = make_dist({{1, 0}, {1, 1}, {0, 0}},
                              {0.3, 0.2, 0.5}, {0.375, 0.375, 0.9});
  CHECK(band_mass(dist, kFirstCoord, params) ==
        doctest::Approx(0.5).epsilon(1e-15));

  // Large tau inverts the band.
  TheoremParams inverted = params;
  inverted.tau = 0.3;
  CHECK(query_band(inverted).empty());
  CHECK(band_mass(dist, kFirstCoord, inverted) == 0.0);

  const auto no_property =
      make_dist({{0, 0}, {0, 1}}, {0.5, 0.5}, {0.375, 0.375});
  CHECK(band_mass(no_property, kFirstCoord, params) == 0.0);
}

TEST_CASE("chernoff query count") {
  CHECK(chernoff_query_count(0.01, 0.1) == 231);
  CHECK_THROWS_AS(chernoff_query_count(0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(chernoff_query_count(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("theoretical adversary distinguishes both hypotheses exactly") {
  const auto dplus = DistributionSource::from_finite(band_dplus());
  const auto dminus = DistributionSource::from_finite(band_dminus());
  TheoremParams params;
  params.p = 0.1;
  params.t0 = 0.3;
  params.t1 = 0.7;
  params.tau = 0.01;
  params.gamma = 0.1;
  params.delta_n = 0.01;

  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    CHECK(oracle_game_trial(dplus, dminus, kFirstCoord, params, 0, seed) == 0);
    CHECK(oracle_game_trial(dplus, dminus, kFirstCoord, params, 1, seed) == 1);
  }
}

TEST_CASE("band sampling reports budget exhaustion") {
  // No property point lies in the band: every crt is far outside.
  const auto dplus = DistributionSource::from_finite(
      make_dist({{1, 0}, {1, 1}}, {0.5, 0.5}, {0.05, 0.95}));
  TheoremParams params;
  params.p = 0.1;
  params.t0 = 0.3;
  params.t1 = 0.7;
  params.tau = 0.01;
  params.rejection_factor = 2;
  const StubModel constant_one([](const FeatureVector&) { return 1; });
  CHECK_THROWS_AS(
      theoretical_adversary(constant_one, dplus, kFirstCoord, params, 1),
      BandSamplingError);
}

TEST_CASE("theory verification suite passes") {
  const auto checks = run_theory_checks(2024);
  REQUIRE(checks.size() == 6);
  for (const auto& check : checks) {
    INFO(check.name, ": ", check.params, " residual ", check.max_residual);
    CHECK(check.pass);
  }
  // The grids honor the published sizes.
  CHECK(checks[0].cases >= 500);
  CHECK(checks[2].cases >= 1000);
  CHECK(checks[3].cases >= 100);
}
