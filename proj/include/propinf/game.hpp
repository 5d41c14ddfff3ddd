#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "propinf/attack.hpp"
#include "propinf/distribution.hpp"
#include "propinf/model.hpp"

namespace propinf {

/// Full configuration for the distinguishing game between a challenger and
/// the poisoning adversary.
struct GameConfig {
  ModelSpec model;
  std::size_t n = 1000;  // total training size (poison included)
  double p = 0.1;        // poison fraction, in [0,1)
  double t0 = 0.3;
  double t1 = 0.7;
  DistributionSource dplus;
  DistributionSource dminus;
  std::optional<PropertyPredicate> property;
  // Attacker-side sources (shadow/ensemble/poison sampling). Defaults to the
  // victim sources; point these at a held-out partition for real datasets.
  std::optional<DistributionSource> adv_dplus;
  std::optional<DistributionSource> adv_dminus;

  std::size_t ensemble_count = 1000;  // r
  std::size_t query_count = 500;      // q
  std::size_t shadow_count = 200;     // k per hypothesis

  std::size_t trials = 10;       // per repetition block
  std::size_t repetitions = 5;   // attack artifacts rebuilt per block
  bool uniform_bits = false;     // i.i.d. hidden bits instead of balanced
  std::size_t test_size = 1000;  // held-out size for target quality metrics
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
  std::size_t poison_count() const;
  const DistributionSource& attacker_dplus() const {
    return adv_dplus ? *adv_dplus : dplus;
  }
  const DistributionSource& attacker_dminus() const {
    return adv_dminus ? *adv_dminus : dminus;
  }
};

struct TrialRecord {
  int hidden_bit = 0;
  int guess = 0;
  bool win = false;
  bool valid = true;  // false when target training failed
  QualityMetrics target_metrics;
  double wall_time_s = 0.0;
};

/// Everything the adversary builds before seeing any victim data.
struct AttackArtifacts {
  PoisonSet poison;
  QuerySet queries;
  AttackModel model;
};

struct RepetitionResult {
  std::size_t trials = 0;
  std::size_t wins = 0;
  std::size_t invalid = 0;
  double accuracy = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_model_accuracy = 0.0;
  double wall_time_s = 0.0;
  std::vector<TrialRecord> records;
};

struct ExperimentResult {
  std::size_t trials = 0;
  std::size_t wins = 0;
  std::size_t invalid = 0;
  double accuracy = 0.0;  // win rate over valid trials
  double ci_low = 0.0;    // Wilson 95% interval
  double ci_high = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_model_accuracy = 0.0;
  std::vector<RepetitionResult> repetitions;
};

struct SweepPoint {
  double value = 0.0;
  ExperimentResult result;
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepPoint> points;
};

/// Wilson 95% score interval for wins out of trials.
std::pair<double, double> binomial_interval(std::size_t wins,
                                            std::size_t trials);

/// Builds poison, queries and the attack meta-model from the attacker-side
/// sources only. Victim data never flows into this stage.
AttackArtifacts build_attack(const GameConfig& cfg, std::uint64_t seed);

/// One game round: the challenger samples (1-p)n clean points from D_{t_b},
/// trains on clean + poison, and the adversary guesses b from label-only
/// queries. The returned record also carries target quality metrics on a
/// fresh held-out sample from D_{t_b}.
TrialRecord run_trial(const GameConfig& cfg, const AttackArtifacts& artifacts,
                      int hidden_bit, std::uint64_t seed);

/// Repeats the game: per repetition block the attack artifacts are rebuilt,
/// then cfg.trials rounds run with balanced hidden bits (or uniform ones when
/// cfg.uniform_bits). Per-trial seeds derive from
/// (cfg.seed, repetition, trial). Trials within a block may run concurrently.
ExperimentResult run_experiment(const GameConfig& cfg);

/// Runs run_experiment for each value of one swept parameter with aligned
/// seeds. parameter is one of: poison_rate, shadow_count, train_size,
/// ensemble_size, architecture (value = hidden layer count, 0 = logistic).
SweepResult sweep(const GameConfig& base, const std::string& parameter,
                  const std::vector<double>& values);

/// Applies one sweep value to a config copy (shared by sweep and the CLI).
GameConfig apply_sweep_value(const GameConfig& base, const std::string& parameter,
                             double value);

/// Results CSV: one row per (value, repetition), columns
/// parameter,value,trials,wins,accuracy,ci_low,ci_high,
/// mean_precision,mean_recall,wall_time_s.
void write_results_csv(std::ostream& out, const SweepResult& sweep);
void write_results_csv(std::ostream& out, const std::string& parameter,
                       double value, const ExperimentResult& result);

/// The same CSV with the wall_time_s column blanked; two runs with the same
/// config must produce byte-identical normalized CSVs.
std::string normalize_results_csv(const std::string& csv);

}  // namespace propinf
