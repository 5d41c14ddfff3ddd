#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "propinf/distribution.hpp"

namespace propinf {

/// The strict black-box prediction surface: a hard label per query, nothing
/// else. The attack and game layers interact with target models exclusively
/// through this interface.
class LabelOnlyModel {
 public:
  virtual ~LabelOnlyModel() = default;
  virtual int predict(const FeatureVector& x) const = 0;
};

/// Per-support-point argmax-posterior decision table for a finite
/// distribution. Posterior exactly 0.5 resolves to label 1.
class BayesClassifier final : public LabelOnlyModel {
 public:
  explicit BayesClassifier(std::shared_ptr<const FiniteDistribution> dist);

  int predict(const FeatureVector& x) const override;  // errors off-support
  int label_at(std::size_t support_index) const {
    return labels_[support_index];
  }
  const FiniteDistribution& source() const { return *dist_; }

 private:
  std::shared_ptr<const FiniteDistribution> dist_;
  std::vector<int> labels_;
};

struct TheoremParams {
  double p = 0.0;           // poison fraction
  double t0 = 0.0;          // candidate property rates, t0 < t1
  double t1 = 1.0;
  double tau = 0.0;         // margin parameter in [0,1]
  double gamma = 0.1;       // decision margin in [0, 1/2]
  double epsilon_n = 0.0;   // assumed learner excess-risk bound
  double delta_n = 0.01;    // assumed learner failure probability
  std::size_t rejection_factor = 1000;  // band-sampling budget multiplier
  void validate() const;
};

/// Signed certainty 1 - 2*Pr[Y=1 | X=x].
double certainty_from_posterior(double posterior);
double certainty(const FiniteDistribution& dist, const FeatureVector& x);

BayesClassifier bayes_optimal(const FiniteDistribution& dist);
BayesClassifier bayes_optimal(std::shared_ptr<const FiniteDistribution> dist);

/// Minimum achievable risk: sum_x mass(x) * min(posterior, 1-posterior).
double bayes_error(const FiniteDistribution& dist);

/// Pr[h(x) != y] under dist. h must be defined on the whole support.
double risk(const LabelOnlyModel& h, const FiniteDistribution& dist);

/// risk = bayes + excess with excess = E_x |h(x)-h*(x)| * |crt(x)|.
/// residual = risk - bayes - excess; |residual| <= 1e-12 by contract.
struct RiskDecomposition {
  double bayes = 0.0;
  double excess = 0.0;
  double residual = 0.0;
};
RiskDecomposition risk_decomposition(const LabelOnlyModel& h,
                                     const FiniteDistribution& dist);

/// Posterior of the poisoned mixture at a property point, in closed form:
///   p/(p + t(1-p)) + t(1-p)/(p + t(1-p)) * clean_posterior.
/// Errors when p = 0 and t = 0 (degenerate denominator).
double poisoned_posterior(double p, double t, double clean_posterior);

/// Clean-certainty threshold (p - 2*tau*t) / (t*(1-p)); for any property
/// point, poisoned_posterior >= 1/2 + tau*t/(p + t(1-p)) iff
/// crt(x) <= this threshold. Errors when t = 0 or p = 1.
double poisoned_certainty_threshold(double p, double t, double tau);

/// Clean-certainty interval (lower, upper] that separates the two candidate
/// rates: lower = (p + 2*tau*t1)/(t1*(1-p)), upper = (p - 2*tau*t0)/(t0*(1-p)).
struct CertaintyBand {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double crt) const { return crt > lower && crt <= upper; }
  bool empty() const { return !(lower < upper); }
};
CertaintyBand query_band(const TheoremParams& params);

/// Pr over X of { f(x)=1 and crt(x) in the band }. The attack needs this
/// to exceed required_band_mass(epsilon_n, tau).
double band_mass(const FiniteDistribution& dist, const PropertyPredicate& f,
                 const TheoremParams& params);

/// Band-mass lower bounds required by the attack guarantee; two published
/// forms that do not coincide (the second is the margin-explicit variant).
double required_band_mass(double epsilon_n, double tau);  // 2*eps/tau
double required_band_mass_margin(double epsilon_n, double tau,
                                 double gamma);  // eps/(tau*(1-2*gamma))

/// Number of band queries ceil(-ln(delta) / (2*gamma^2)).
std::size_t chernoff_query_count(double delta_n, double gamma);

/// Thrown when rejection sampling cannot collect enough band points within
/// the configured budget.
class BandSamplingError : public std::runtime_error {
 public:
  BandSamplingError(std::string message, std::size_t collected)
      : std::runtime_error(std::move(message)), collected_(collected) {}
  std::size_t collected() const { return collected_; }

 private:
  std::size_t collected_;
};

/// The label-only distinguisher: rejection-samples points of the property
/// conditional whose clean certainty lies in the band, queries the model on
/// chernoff_query_count of them and guesses rate t0 (bit 0) iff the mean
/// prediction exceeds 0.5. dplus must be finite-backed (exact certainty).
int theoretical_adversary(const LabelOnlyModel& model,
                          const DistributionSource& dplus,
                          const PropertyPredicate& f,
                          const TheoremParams& params, std::uint64_t seed);

/// One full round of the distinguishing game on exact distributions: the
/// clean mixture for the hidden rate is poisoned with the label-1 property
/// conditional, the model is the exact argmax classifier of the poisoned
/// mixture, and the adversary guesses the hidden bit.
int oracle_game_trial(const DistributionSource& dplus,
                      const DistributionSource& dminus,
                      const PropertyPredicate& f, const TheoremParams& params,
                      int hidden_bit, std::uint64_t seed);

/// One row of the theory verification report.
struct TheoryCheck {
  std::string name;
  std::string params;
  std::size_t cases = 0;
  double max_residual = 0.0;
  bool pass = false;
};

/// Exact verification suite: closed-form poisoned posterior vs mixture
/// enumeration, threshold biconditional, risk decomposition residuals,
/// exhaustive optimality, band prediction margins, and monotonicity.
std::vector<TheoryCheck> run_theory_checks(std::uint64_t seed);

/// CSV rows: name,params,max_residual,pass.
void write_theory_report(std::ostream& out,
                         const std::vector<TheoryCheck>& checks);

}  // namespace propinf
