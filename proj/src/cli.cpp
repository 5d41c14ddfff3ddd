#include "propinf/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "propinf/bayes.hpp"
#include "propinf/io.hpp"
#include "propinf/synthetic.hpp"

namespace propinf {

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open output file '" + path + "'");
  }
  return out;
}

void print_experiment_summary(std::ostream& out, const ExperimentResult& r) {
  out << "trials " << r.trials << " (invalid " << r.invalid << "), wins "
      << r.wins << ", accuracy " << r.accuracy << " [" << r.ci_low << ", "
      << r.ci_high << "] 95% CI, target precision " << r.mean_precision
      << ", recall " << r.mean_recall << ", test accuracy "
      << r.mean_model_accuracy << '\n';
}

int cmd_generate(const ExperimentConfig& cfg, std::size_t count, double rate,
                 const std::string& out_path, const std::string& dist_path) {
  const GameConfig game = to_game_config(cfg);
  const DistributionSource source =
      property_mixture(game.dplus, game.dminus, rate);
  const Dataset data = sample(source, count, cfg.seed);
  std::vector<int> property_bits;
  if (game.property) {
    property_bits.reserve(data.size());
    for (const auto& ex : data) {
      property_bits.push_back((*game.property)(ex.x) ? 1 : 0);
    }
  }
  if (out_path.empty()) {
    write_dataset_csv(std::cout, data,
                      game.property ? &property_bits : nullptr);
  } else {
    auto out = open_output(out_path);
    write_dataset_csv(out, data, game.property ? &property_bits : nullptr);
    std::cerr << "wrote " << data.size() << " rows to " << out_path << '\n';
  }
  if (!dist_path.empty()) {
    const FiniteDistribution* joint = source.finite();
    if (joint == nullptr) {
      throw std::runtime_error(
          "generate: --dist-out requires a finite-backed source");
    }
    auto out = open_output(dist_path);
    joint->save(out);
  }
  return 0;
}

int cmd_attack(const ExperimentConfig& cfg, const std::string& prefix) {
  const GameConfig game = to_game_config(cfg);
  const AttackArtifacts artifacts = build_attack(game, cfg.seed);
  {
    auto out = open_output(prefix + "poison.csv");
    save_poison_csv(out, artifacts.poison);
  }
  {
    auto out = open_output(prefix + "queries.csv");
    save_queries_csv(out, artifacts.queries);
  }
  {
    auto out = open_output(prefix + "attack_model.txt");
    artifacts.model.save(out);
  }
  std::cout << "poison points " << artifacts.poison.examples.size()
            << " (variant " << to_string(artifacts.poison.variant)
            << "), queries " << artifacts.queries.points.size() << " ("
            << artifacts.queries.filtered_count << " filtered)"
            << (artifacts.model.degenerate ? ", attack model DEGENERATE" : "")
            << '\n';
  return 0;
}

int cmd_game(const ExperimentConfig& cfg, const std::string& out_path) {
  const GameConfig game = to_game_config(cfg);
  const ExperimentResult result = run_experiment(game);
  print_experiment_summary(std::cout, result);
  const std::string path = out_path.empty() ? cfg.out : out_path;
  if (!path.empty()) {
    auto out = open_output(path);
    write_results_csv(out, "poison_rate", cfg.p, result);
  }
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::string& parameter,
              const std::vector<double>& values, const std::string& out_path) {
  const GameConfig game = to_game_config(cfg);
  const SweepResult result = sweep(game, parameter, values);
  for (const auto& point : result.points) {
    std::cout << parameter << " = " << point.value << ": ";
    print_experiment_summary(std::cout, point.result);
  }
  const std::string path = out_path.empty() ? cfg.out : out_path;
  if (path.empty()) {
    write_results_csv(std::cout, result);
  } else {
    auto out = open_output(path);
    write_results_csv(out, result);
  }
  return 0;
}

int cmd_verify_theory(std::uint64_t seed, const std::string& out_path) {
  const std::vector<TheoryCheck> checks = run_theory_checks(seed);
  if (out_path.empty()) {
    write_theory_report(std::cout, checks);
  } else {
    auto out = open_output(out_path);
    write_theory_report(out, checks);
  }
  bool all_pass = true;
  for (const auto& check : checks) {
    std::cerr << (check.pass ? "pass" : "FAIL") << "  " << check.name << " ("
              << check.cases << " cases, max residual " << check.max_residual
              << ")\n";
    all_pass = all_pass && check.pass;
  }
  if (!all_pass) {
    std::cerr << "theory verification FAILED\n";
    return 1;
  }
  return 0;
}

int cmd_metrics(const std::string& model_path, const std::string& data_path) {
  std::ifstream model_in(model_path);
  if (!model_in) {
    throw std::runtime_error("cannot open model file '" + model_path + "'");
  }
  const TrainedModel model = TrainedModel::load(model_in);
  std::ifstream data_in(data_path);
  if (!data_in) {
    throw std::runtime_error("cannot open data file '" + data_path + "'");
  }
  const Dataset data = read_dataset_csv(data_in);
  const QualityMetrics m = metrics(model, data);
  std::cout << "accuracy " << m.accuracy << "\nprecision " << m.precision
            << (m.no_positives_predicted ? " (no positives predicted)" : "")
            << "\nrecall " << m.recall << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"black-box property inference under training-set poisoning"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 0;
  app.add_option("--config", config_path, "experiment config file (key=value)");
  app.add_option("--out", out_path, "output path");
  app.add_option("--seed", seed, "master seed")->each([&](const std::string&) {
    seed_set = true;
  });
  app.add_option("--threads", threads, "worker threads (0 = hardware)");

  auto* generate = app.add_subcommand(
      "generate", "sample a synthetic dataset / distribution table");
  std::size_t gen_count = 1000;
  double gen_rate = 0.5;
  std::string dist_path;
  generate->add_option("--n", gen_count, "rows to sample");
  generate->add_option("--rate", gen_rate, "property rate of the mixture");
  generate->add_option("--dist-out", dist_path,
                       "also write the exact distribution table here");

  auto* attack = app.add_subcommand(
      "attack", "build poison set, query set and attack model");
  std::string prefix = "attack_";
  attack->add_option("--prefix", prefix, "output file prefix");

  app.add_subcommand("game", "run the distinguishing game experiment");

  auto* sweep_cmd = app.add_subcommand("sweep", "sweep one parameter");
  std::string parameter;
  std::vector<double> values;
  sweep_cmd->add_option("--param", parameter,
                        "poison_rate|shadow_count|train_size|ensemble_size|"
                        "architecture")
      ->required();
  sweep_cmd->add_option("--values", values, "swept values")
      ->required()
      ->delimiter(',');

  app.add_subcommand("verify-theory",
                     "run the exact verification suite and emit a report");

  auto* metrics_cmd =
      app.add_subcommand("metrics", "evaluate a saved model on a CSV dataset");
  std::string model_path;
  std::string data_path;
  metrics_cmd->add_option("--model", model_path, "saved model file")
      ->required();
  metrics_cmd->add_option("--data", data_path, "dataset CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      return app.exit(e);  // --help and friends
    }
    app.exit(e);
    return 2;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = parse_config_file(config_path);
    if (seed_set) cfg.seed = seed;
    if (threads > 0) cfg.threads = threads;
    if (!out_path.empty()) cfg.out = out_path;

    if (generate->parsed()) {
      return cmd_generate(cfg, gen_count, gen_rate, out_path, dist_path);
    }
    if (attack->parsed()) return cmd_attack(cfg, prefix);
    if (app.get_subcommand("game")->parsed()) return cmd_game(cfg, out_path);
    if (sweep_cmd->parsed()) {
      return cmd_sweep(cfg, parameter, values, out_path);
    }
    if (app.get_subcommand("verify-theory")->parsed()) {
      return cmd_verify_theory(cfg.seed, out_path);
    }
    if (metrics_cmd->parsed()) return cmd_metrics(model_path, data_path);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace propinf
