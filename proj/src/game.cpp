#include "propinf/game.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "propinf/parallel.hpp"

namespace propinf {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void write_csv_header(std::ostream& out) {
  out << "parameter,value,trials,wins,accuracy,ci_low,ci_high,"
         "mean_precision,mean_recall,wall_time_s\n";
}

// One row per repetition block, in block order.
void write_csv_rows(std::ostream& out, const std::string& parameter,
                    double value, const ExperimentResult& result) {
  char buffer[512];
  for (const RepetitionResult& rep : result.repetitions) {
    std::snprintf(buffer, sizeof(buffer),
                  "%s,%.10g,%zu,%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%.3f\n",
                  parameter.c_str(), value, rep.trials, rep.wins, rep.accuracy,
                  rep.ci_low, rep.ci_high, rep.mean_precision, rep.mean_recall,
                  rep.wall_time_s);
    out << buffer;
  }
}

}  // namespace

void GameConfig::validate() const {
  model.validate();
  if (!(0.0 <= t0 && t0 < t1 && t1 <= 1.0)) {
    throw std::invalid_argument("GameConfig: need 0 <= t0 < t1 <= 1");
  }
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::invalid_argument("GameConfig: p must lie in [0,1)");
  }
  if (n == 0) throw std::invalid_argument("GameConfig: n must be positive");
  if (trials == 0 || repetitions == 0) {
    throw std::invalid_argument("GameConfig: trials/repetitions must be >= 1");
  }
  if (query_count == 0 || ensemble_count == 0 || shadow_count == 0) {
    throw std::invalid_argument("GameConfig: attack parameters must be >= 1");
  }
  if (dplus.dim() != dminus.dim() || dplus.dim() == 0) {
    throw std::invalid_argument("GameConfig: conditional sources disagree");
  }
}

std::size_t GameConfig::poison_count() const {
  return static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
}

std::pair<double, double> binomial_interval(std::size_t wins,
                                            std::size_t trials) {
  if (trials == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double nd = static_cast<double>(trials);
  const double phat = static_cast<double>(wins) / nd;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nd;
  const double center = (phat + z2 / (2.0 * nd)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / nd + z2 / (4.0 * nd * nd)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

AttackArtifacts build_attack(const GameConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const DistributionSource& dplus = cfg.attacker_dplus();
  const DistributionSource& dminus = cfg.attacker_dminus();
  const PropertyPredicate f =
      cfg.property ? *cfg.property
                   : PropertyPredicate([](const FeatureVector&) { return true; },
                                       "opaque property");

  PoisonSet poison = select_poison(f, cfg.t0, cfg.t1, cfg.p, cfg.n, dplus,
                                   dminus, derive_seed(seed, {1u}));

  QueryConfig query_cfg;
  query_cfg.ensemble_count = cfg.ensemble_count;
  query_cfg.query_count = cfg.query_count;
  query_cfg.member_size = cfg.n;
  query_cfg.model = cfg.model;
  QuerySet queries = select_queries(query_cfg, dplus, dminus, poison,
                                    derive_seed(seed, {2u}), cfg.threads);

  ShadowConfig shadow_cfg;
  shadow_cfg.shadow_count = cfg.shadow_count;
  shadow_cfg.clean_size = cfg.n - cfg.poison_count();
  shadow_cfg.model = cfg.model;
  AttackModel model =
      train_attack_model(shadow_cfg, poison, queries, cfg.t0, cfg.t1, dplus,
                         dminus, derive_seed(seed, {3u}), cfg.threads);
  return AttackArtifacts{std::move(poison), std::move(queries),
                         std::move(model)};
}

TrialRecord run_trial(const GameConfig& cfg, const AttackArtifacts& artifacts,
                      int hidden_bit, std::uint64_t seed) {
  TrialRecord record;
  record.hidden_bit = hidden_bit;
  const double start = now_seconds();
  const double t = hidden_bit == 0 ? cfg.t0 : cfg.t1;
  const DistributionSource victim =
      property_mixture(cfg.dplus, cfg.dminus, t);
  const std::size_t clean_n = cfg.n - cfg.poison_count();
  try {
    Dataset training = sample(victim, clean_n, derive_seed(seed, {11u}));
    training.append(artifacts.poison.examples);
    const TrainedModel target =
        train(cfg.model, training, derive_seed(seed, {12u}));
    record.guess = infer(artifacts.model, target, artifacts.queries);
    record.win = record.guess == hidden_bit;
    const Dataset held_out =
        sample(victim, cfg.test_size, derive_seed(seed, {13u}));
    record.target_metrics = metrics(target, held_out);
  } catch (const TrainingError&) {
    record.valid = false;
  }
  record.wall_time_s = now_seconds() - start;
  return record;
}

ExperimentResult run_experiment(const GameConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  double precision_sum = 0.0;
  double recall_sum = 0.0;
  double model_accuracy_sum = 0.0;

  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
    const double rep_start = now_seconds();
    const AttackArtifacts artifacts =
        build_attack(cfg, derive_seed(cfg.seed, {0xA77Au, rep}));

    RepetitionResult block;
    block.records.resize(cfg.trials);
    parallel_for(cfg.trials, cfg.threads, [&](std::size_t i) {
      const std::uint64_t trial_seed =
          derive_seed(cfg.seed, {0x7125u, rep, i});
      int bit;
      if (cfg.uniform_bits) {
        Rng rng = make_rng(derive_seed(trial_seed, {0xB17u}));
        bit = bernoulli(rng, 0.5) ? 1 : 0;
      } else {
        bit = static_cast<int>((rep * cfg.trials + i) % 2);
      }
      block.records[i] = run_trial(cfg, artifacts, bit, trial_seed);
    });

    for (const TrialRecord& record : block.records) {
      if (!record.valid) {
        ++block.invalid;
        continue;
      }
      ++block.trials;
      if (record.win) ++block.wins;
      block.mean_precision += record.target_metrics.precision;
      block.mean_recall += record.target_metrics.recall;
      block.mean_model_accuracy += record.target_metrics.accuracy;
    }
    if (block.trials > 0) {
      block.accuracy =
          static_cast<double>(block.wins) / static_cast<double>(block.trials);
      std::tie(block.ci_low, block.ci_high) =
          binomial_interval(block.wins, block.trials);
      block.mean_precision /= static_cast<double>(block.trials);
      block.mean_recall /= static_cast<double>(block.trials);
      block.mean_model_accuracy /= static_cast<double>(block.trials);
    }
    block.wall_time_s = now_seconds() - rep_start;

    result.trials += block.trials;
    result.wins += block.wins;
    result.invalid += block.invalid;
    precision_sum += block.mean_precision * static_cast<double>(block.trials);
    recall_sum += block.mean_recall * static_cast<double>(block.trials);
    model_accuracy_sum +=
        block.mean_model_accuracy * static_cast<double>(block.trials);
    result.repetitions.push_back(std::move(block));
  }

  if (result.trials == 0) {
    throw std::runtime_error("run_experiment: all trials invalid");
  }
  result.accuracy =
      static_cast<double>(result.wins) / static_cast<double>(result.trials);
  std::tie(result.ci_low, result.ci_high) =
      binomial_interval(result.wins, result.trials);
  result.mean_precision = precision_sum / static_cast<double>(result.trials);
  result.mean_recall = recall_sum / static_cast<double>(result.trials);
  result.mean_model_accuracy =
      model_accuracy_sum / static_cast<double>(result.trials);
  return result;
}

GameConfig apply_sweep_value(const GameConfig& base,
                             const std::string& parameter, double value) {
  GameConfig cfg = base;
  if (parameter == "poison_rate") {
    cfg.p = value;
  } else if (parameter == "shadow_count") {
    cfg.shadow_count = static_cast<std::size_t>(value);
  } else if (parameter == "train_size") {
    cfg.n = static_cast<std::size_t>(value);
  } else if (parameter == "ensemble_size") {
    cfg.ensemble_count = static_cast<std::size_t>(value);
  } else if (parameter == "architecture") {
    // value = number of hidden layers drawn from the width ladder
    // 32,16,8,4,2 (0 means plain logistic regression).
    const int layers = static_cast<int>(value);
    if (layers < 0 || layers > 5) {
      throw std::invalid_argument("sweep: architecture value must be 0..5");
    }
    cfg.model.hidden.clear();
    if (layers == 0) {
      cfg.model.architecture = Architecture::logistic;
    } else {
      cfg.model.architecture = Architecture::mlp;
      const int ladder[5] = {32, 16, 8, 4, 2};
      for (int i = 5 - layers; i < 5; ++i) cfg.model.hidden.push_back(ladder[i]);
    }
  } else {
    throw std::invalid_argument("sweep: unknown parameter '" + parameter +
                                "' (expected poison_rate, shadow_count, "
                                "train_size, ensemble_size or architecture)");
  }
  return cfg;
}

SweepResult sweep(const GameConfig& base, const std::string& parameter,
                  const std::vector<double>& values) {
  if (values.empty()) {
    throw std::invalid_argument("sweep: no values");
  }
  SweepResult result;
  result.parameter = parameter;
  for (const double value : values) {
    const GameConfig cfg = apply_sweep_value(base, parameter, value);
    result.points.push_back(SweepPoint{value, run_experiment(cfg)});
  }
  return result;
}

void write_results_csv(std::ostream& out, const SweepResult& sweep) {
  write_csv_header(out);
  for (const auto& point : sweep.points) {
    write_csv_rows(out, sweep.parameter, point.value, point.result);
  }
}

void write_results_csv(std::ostream& out, const std::string& parameter,
                       double value, const ExperimentResult& result) {
  write_csv_header(out);
  write_csv_rows(out, parameter, value, result);
}

std::string normalize_results_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t cut = line.rfind(',');
    out << (cut == std::string::npos ? line : line.substr(0, cut)) << '\n';
  }
  return out.str();
}

}  // namespace propinf
