#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "propinf/distribution.hpp"
#include "propinf/model.hpp"

namespace propinf {

/// Which (conditional, label) combination the poison points use.
enum class PoisonVariant {
  plus_one,   // (X+, 1)
  plus_zero,  // (X+, 0)
  minus_one,  // (X-, 1)
  minus_zero  // (X-, 0)
};

std::string to_string(PoisonVariant v);

/// The adversary's contributed points: p*n examples from one property
/// conditional, all carrying one label.
struct PoisonSet {
  Dataset examples;
  PoisonVariant variant = PoisonVariant::plus_one;
  int label() const {
    return variant == PoisonVariant::plus_one ||
                   variant == PoisonVariant::minus_one
               ? 1
               : 0;
  }
};

/// Black-box query points: `filtered_count` points that passed the ensemble
/// certainty filter, followed by the poison features.
struct QuerySet {
  std::vector<FeatureVector> points;
  std::size_t filtered_count = 0;
  /// Order-sensitive content hash; attack models refuse mismatched reuse.
  std::uint64_t fingerprint() const;
};

/// Linear meta-model over query-response vectors. Class 1 means "rate t1".
struct AttackModel {
  TrainedModel classifier;
  double l2_weight = 0.0;
  std::uint64_t query_fingerprint = 0;
  bool degenerate = false;  // shadow responses were inseparable

  void save(std::ostream& out) const;
  static AttackModel load(std::istream& in);
};

/// Knobs for query selection (the certainty-filter stage).
struct QueryConfig {
  std::size_t ensemble_count = 1000;  // r
  std::size_t query_count = 500;      // q
  std::size_t member_size = 1000;     // per-member training size (victim n)
  double certainty_limit = 0.4;
  std::size_t rejection_factor = 200;  // candidate budget = factor * q
  ModelSpec model;
};

/// Knobs for the shadow-model stage.
struct ShadowConfig {
  std::size_t shadow_count = 200;  // k per hypothesis
  std::size_t clean_size = 900;    // shadow clean set size, mirrors (1-p)n
  ModelSpec model;
  int attack_epochs = 200;  // epochs for the linear meta-model
};

/// Thrown when the certainty filter cannot collect enough query points
/// within the candidate budget; carries the number accepted so far.
class QuerySelectionError : public std::runtime_error {
 public:
  QuerySelectionError(std::string message, std::size_t accepted)
      : std::runtime_error(std::move(message)), accepted_(accepted) {}
  std::size_t accepted() const { return accepted_; }

 private:
  std::size_t accepted_;
};

/// Picks the poison distribution by the four-variant rule: sample p*n points
/// from D+ when t0 + t1 < 1 (else from D-), then relabel everything to 0 when
/// the sampled mean label exceeds 0.5 (else to 1). p = 0 yields an empty set.
PoisonSet select_poison(const PropertyPredicate& f, double t0, double t1,
                        double p, std::size_t n,
                        const DistributionSource& dplus,
                        const DistributionSource& dminus, std::uint64_t seed);

/// Trains the certainty-estimation ensemble: cfg.ensemble_count models, each
/// on a balanced dataset (floor(n/2) from D-, ceil(n/2) from D+).
std::vector<TrainedModel> train_query_ensemble(const QueryConfig& cfg,
                                               const DistributionSource& dplus,
                                               const DistributionSource& dminus,
                                               std::uint64_t seed,
                                               unsigned threads = 1);

/// Ensemble-estimated signed certainty |1 - 2 * (votes for 1)/r| at x.
double ensemble_certainty(const std::vector<TrainedModel>& ensemble,
                          const FeatureVector& x);

/// Samples candidates from (D- + D+)/2 and keeps those whose ensemble
/// certainty magnitude is within cfg.certainty_limit, until cfg.query_count
/// are found; the poison features are appended at the end.
QuerySet select_queries(const QueryConfig& cfg, const DistributionSource& dplus,
                        const DistributionSource& dminus,
                        const PoisonSet& poison, std::uint64_t seed,
                        unsigned threads = 1);

/// Trains k shadow models per hypothesis on D_t0/D_t1 samples unioned with
/// the poison set, gathers their 0/1 responses over the query set, and fits a
/// linear separator (t1-responses labeled 1) with L2 weight 2*sqrt(1/k).
AttackModel train_attack_model(const ShadowConfig& cfg, const PoisonSet& poison,
                               const QuerySet& queries, double t0, double t1,
                               const DistributionSource& dplus,
                               const DistributionSource& dminus,
                               std::uint64_t seed, unsigned threads = 1);

/// Queries the target on the query set (labels only) and returns the linear
/// model's decision: 1 means "rate t1", 0 means "rate t0".
int infer(const AttackModel& attack_model, const LabelOnlyModel& target,
          const QuerySet& queries);

/// Response vector of hard labels over the query set, in query order.
Eigen::VectorXd query_responses(const LabelOnlyModel& model,
                                const QuerySet& queries);

/// CSV serialization (documented column order: features then label for the
/// poison set; features only for queries).
void save_poison_csv(std::ostream& out, const PoisonSet& poison);
void save_queries_csv(std::ostream& out, const QuerySet& queries);
QuerySet load_queries_csv(std::istream& in);

}  // namespace propinf
