#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "propinf/bayes.hpp"
#include "propinf/cli.hpp"
#include "propinf/io.hpp"
#include "propinf/synthetic.hpp"

using namespace propinf;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("propinf_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

int cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"propinf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("synthetic generation: conditionals, determinism, temperature 0") {
  SyntheticSpec spec = SyntheticSpec::default_task();
  const SyntheticTask task = generate_synthetic(spec);
  REQUIRE(task.joint != nullptr);

  // Conditional masses match the enumerated joint (property = feature 0,
  // rate 1/2): each conditional support point carries twice its joint mass.
  const FiniteDistribution* plus = task.dplus.finite();
  REQUIRE(plus != nullptr);
  CHECK(plus->support_size() * 2 == task.joint->support_size());
  for (std::size_t i = 0; i < plus->support_size(); ++i) {
    const auto at = task.joint->find(plus->point(i));
    REQUIRE(at.has_value());
    CHECK(plus->mass(i) ==
          doctest::Approx(task.joint->mass(*at) * 2.0).epsilon(1e-12));
    CHECK(plus->posterior(i) == task.joint->posterior(*at));
  }

  // The calibrated default sits near the intended ambiguity level.
  CHECK(bayes_error(*task.joint) == doctest::Approx(0.15).epsilon(0.15));
  const double positive_rate =
      task.joint->masses().dot(task.joint->posteriors());
  CHECK(positive_rate < 0.5);

  // Determinism: same spec, same sources.
  const SyntheticTask again = generate_synthetic(spec);
  CHECK(sample(task.dplus, 50, 3) == sample(again.dplus, 50, 3));

  SyntheticSpec frozen = spec;
  frozen.temperature = 0.0;
  const SyntheticTask crisp = generate_synthetic(frozen);
  for (std::size_t i = 0; i < crisp.joint->support_size(); ++i) {
    const double post = crisp.joint->posterior(i);
    CHECK((post == 0.0 || post == 1.0));
  }
  CHECK(bayes_error(*crisp.joint) == 0.0);
}

TEST_CASE("zero-mass property is rejected") {
  SyntheticSpec spec = SyntheticSpec::default_task();
  spec.features[0].rate = 0.0;
  CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
}

TEST_CASE("injected random feature is exactly independent") {
  const SyntheticTask base = generate_synthetic(SyntheticSpec::default_task());
  const auto source = DistributionSource::from_finite(base.joint);

  SUBCASE("matching base points keep their posteriors, rates form the pair") {
    const SyntheticTask low = inject_random_feature(source, 0.05);
    REQUIRE(low.joint != nullptr);
    CHECK(low.joint->property_mass(low.property) ==
          doctest::Approx(0.05).epsilon(1e-12));
    const FiniteDistribution* plus = low.dplus.finite();
    const FiniteDistribution* minus = low.dminus.finite();
    REQUIRE(plus != nullptr);
    for (std::size_t i = 0; i < plus->support_size(); ++i) {
      FeatureVector flipped = plus->point(i);
      flipped[flipped.size() - 1] = 0.0;
      const auto at = minus->find(flipped);
      REQUIRE(at.has_value());
      CHECK(plus->posterior(i) == minus->posterior(*at));
      CHECK(plus->mass(i) == doctest::Approx(minus->mass(*at)).epsilon(1e-12));
    }
  }

  SUBCASE("exact mutual information with (features, label) is zero") {
    const SyntheticTask task = inject_random_feature(source, 0.3);
    const FiniteDistribution& joint = *task.joint;
    const Eigen::Index last = joint.dim() - 1;
    // I(F; (X,Y)) over the exact joint; base masses come from marginalizing.
    double mi = 0.0;
    for (std::size_t i = 0; i < joint.support_size(); ++i) {
      FeatureVector zero = joint.point(i);
      zero[last] = 0.0;
      FeatureVector one = joint.point(i);
      one[last] = 1.0;
      const double base_mass =
          joint.mass(*joint.find(zero)) + joint.mass(*joint.find(one));
      const double f_mass = joint.point(i)[last] == 1.0 ? 0.3 : 0.7;
      for (const double y_weight :
           {joint.posterior(i), 1.0 - joint.posterior(i)}) {
        const double cell = joint.mass(i) * y_weight;
        if (cell <= 0.0) continue;
        mi += cell * std::log(cell / (base_mass * y_weight * f_mass));
      }
    }
    CHECK(std::abs(mi) <= 1e-12);
  }

  SUBCASE("empirical correlation with the label is tiny at rate 1/2") {
    const SyntheticTask task = inject_random_feature(source, 0.5);
    const Dataset big = sample(property_mixture(task.dplus, task.dminus, 0.5),
                               100000, 17);
    const Eigen::Index last = big.dim() - 1;
    double mean_f = 0.0, mean_y = 0.0;
    for (const auto& ex : big) {
      mean_f += ex.x[last];
      mean_y += ex.y;
    }
    mean_f /= static_cast<double>(big.size());
    mean_y /= static_cast<double>(big.size());
    double cov = 0.0, var_f = 0.0, var_y = 0.0;
    for (const auto& ex : big) {
      cov += (ex.x[last] - mean_f) * (ex.y - mean_y);
      var_f += (ex.x[last] - mean_f) * (ex.x[last] - mean_f);
      var_y += (ex.y - mean_y) * (ex.y - mean_y);
    }
    CHECK(std::abs(cov / std::sqrt(var_f * var_y)) < 0.05);
  }

  CHECK_THROWS_AS(inject_random_feature(source, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(inject_random_feature(source, 1.0), std::invalid_argument);
}

TEST_CASE("csv loading: rates, schema errors, line numbers") {
  TempDir tmp;
  const std::string path = tmp.file("data.csv");

  SUBCASE("4-row file with half the rows on the property") {
    write_file(path,
               "a,b,label,property\n"
               "0.5,1,1,1\n"
               "0.25,0,0,0\n"
               "1,1,1,1\n"
               "0,0,0,0\n");
    CsvDatasetDescriptor desc;
    desc.path = path;
    desc.property_column = "property";
    desc.holdout_fraction = 0.0;
    const CsvDataset csv = load_csv(desc);
    CHECK(csv.property_rate == 0.5);
    CHECK(csv.data.size() == 4);
    CHECK(csv.data.dim() == 2);
    // With-replacement conditionals emit rows from the right side.
    Rng rng = make_rng(1);
    for (int i = 0; i < 20; ++i) {
      CHECK(csv.dplus.draw(rng).y == 1);
      CHECK(csv.dminus.draw(rng).y == 0);
    }
  }

  SUBCASE("missing label column is named") {
    write_file(path, "a,b\n1,2\n");
    CsvDatasetDescriptor desc;
    desc.path = path;
    desc.label_column = "income";
    CHECK_THROWS_WITH_AS(load_csv(desc), doctest::Contains("income"),
                         std::runtime_error);
  }

  SUBCASE("malformed rows carry their line number") {
    write_file(path, "a,label\n1,1\nnot_a_number,0\n");
    CsvDatasetDescriptor desc;
    desc.path = path;
    CHECK_THROWS_WITH_AS(load_csv(desc), doctest::Contains("line 3"),
                         std::runtime_error);
  }

  SUBCASE("non-binary labels are rejected") {
    write_file(path, "a,label\n1,2\n");
    CsvDatasetDescriptor desc;
    desc.path = path;
    CHECK_THROWS_WITH_AS(load_csv(desc), doctest::Contains("label"),
                         std::runtime_error);
  }
}

TEST_CASE("dataset csv round trip") {
  Rng rng = make_rng(7);
  Dataset data(3);
  for (int i = 0; i < 64; ++i) {
    FeatureVector x(3);
    x << uniform01(rng), -uniform01(rng) * 3.75, uniform01(rng) * 1e-3;
    data.add(x, bernoulli(rng, 0.4) ? 1 : 0);
  }
  std::stringstream buffer;
  write_dataset_csv(buffer, data);
  const Dataset loaded = read_dataset_csv(buffer);
  CHECK(loaded == data);
}

TEST_CASE("config round trip is the identity") {
  ExperimentConfig cfg;
  cfg.source = ExperimentConfig::Source::synthetic;
  cfg.inject_rate = 0.25;
  cfg.n = 321;
  cfg.p = 0.07;
  cfg.t0 = 0.2;
  cfg.t1 = 0.9;
  cfg.model.architecture = Architecture::mlp;
  cfg.model.hidden = {32, 16, 8};
  cfg.model.epochs = 17;
  cfg.seed = 987654321;
  cfg.trials = 6;
  cfg.out = "results.csv";

  std::stringstream first;
  write_config(first, cfg);
  const ExperimentConfig parsed = parse_config(first);
  CHECK(parsed == cfg);
  std::stringstream second;
  write_config(second, parsed);
  std::stringstream round(second.str());
  CHECK(parse_config(round) == cfg);

  std::istringstream commented("# comment\nn = 55 # trailing\n\nbad_key = 1\n");
  CHECK_THROWS_WITH_AS(parse_config(commented), doctest::Contains("bad_key"),
                       std::runtime_error);
}

TEST_CASE("cli: usage errors, verify-theory, generate and metrics") {
  TempDir tmp;

  CHECK(cli({"definitely-not-a-command"}) == 2);
  CHECK(cli({}) == 2);

  const std::string report = tmp.file("report.csv");
  CHECK(cli({"--out", report, "verify-theory"}) == 0);
  std::ifstream in(report);
  std::string header;
  std::getline(in, header);
  CHECK(header == "check,params,cases,max_residual,pass");

  const std::string data = tmp.file("data.csv");
  CHECK(cli({"--out", data, "--seed", "5", "generate", "--n", "200",
             "--rate", "0.3"}) == 0);
  std::ifstream csv(data);
  const Dataset loaded = read_dataset_csv(csv);
  CHECK(loaded.size() == 200);
  CHECK(loaded.dim() == 9);  // 8 base features + injected property

  // Train a tiny model by hand, save it, and score it through the CLI.
  const std::string model_path = tmp.file("model.txt");
  {
    Dataset train_data(9);
    std::ifstream again(data);
    const Dataset full = read_dataset_csv(again);
    ModelSpec spec;
    spec.epochs = 10;
    const TrainedModel model = train(spec, full, 3);
    std::ofstream out(model_path);
    model.save(out);
  }
  CHECK(cli({"metrics", "--model", model_path, "--data", data}) == 0);
  CHECK(cli({"metrics", "--model", tmp.file("missing.txt"), "--data", data}) ==
        1);
}

TEST_CASE("cli game writes the results csv") {
  TempDir tmp;
  const std::string config = tmp.file("game.cfg");
  write_file(config,
             "n = 160\n"
             "p = 0.15\n"
             "t0 = 0.2\n"
             "t1 = 0.8\n"
             "ensemble = 12\n"
             "queries = 24\n"
             "shadows = 12\n"
             "trials = 2\n"
             "repetitions = 1\n"
             "test_size = 100\n"
             "epochs = 12\n"
             "seed = 11\n");
  const std::string out = tmp.file("results.csv");
  CHECK(cli({"--config", config, "--out", out, "game"}) == 0);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("parameter,value,trials", 0) == 0);
  std::string row;
  CHECK(std::getline(in, row).good());
}
