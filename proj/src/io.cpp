#include "propinf/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include "propinf/synthetic.hpp"

namespace propinf {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) cells.push_back(cell);
  if (!line.empty() && line.back() == sep) cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& cell, std::size_t line_number) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("csv line " + std::to_string(line_number) +
                             ": cannot parse '" + cell + "' as a number");
  }
  if (used != cell.size()) {
    throw std::runtime_error("csv line " + std::to_string(line_number) +
                             ": trailing characters in '" + cell + "'");
  }
  return value;
}

int parse_bit(const std::string& cell, std::size_t line_number,
              const std::string& what) {
  const double v = parse_double(cell, line_number);
  if (v != 0.0 && v != 1.0) {
    throw std::runtime_error("csv line " + std::to_string(line_number) + ": " +
                             what + " must be 0 or 1, got '" + cell + "'");
  }
  return static_cast<int>(v);
}

// Empirical with-replacement sampler over a fixed list of rows.
DistributionSource empirical_source(std::vector<LabeledExample> rows,
                                    Eigen::Index dim, const std::string& what) {
  if (rows.empty()) {
    throw std::runtime_error("load_csv: empty conditional (" + what + ")");
  }
  auto shared = std::make_shared<std::vector<LabeledExample>>(std::move(rows));
  return DistributionSource::generative(
      [shared](Rng& rng) {
        return (*shared)[uniform_index(rng, shared->size())];
      },
      dim);
}

}  // namespace

CsvDataset load_csv(const CsvDatasetDescriptor& desc) {
  std::ifstream in(desc.path);
  if (!in) {
    throw std::runtime_error("load_csv: cannot open '" + desc.path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("load_csv: empty file '" + desc.path + "'");
  }
  const std::vector<std::string> header = split(trim(line), ',');
  auto column_index = [&header](const std::string& name) -> std::ptrdiff_t {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };

  const std::ptrdiff_t label_at = column_index(desc.label_column);
  if (label_at < 0) {
    throw std::runtime_error("load_csv: missing label column '" +
                             desc.label_column + "'");
  }
  std::ptrdiff_t property_at = -1;
  if (!desc.property_column.empty()) {
    property_at = column_index(desc.property_column);
    if (property_at < 0) {
      throw std::runtime_error("load_csv: missing property column '" +
                               desc.property_column + "'");
    }
  }

  std::vector<std::ptrdiff_t> feature_at;
  if (desc.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto idx = static_cast<std::ptrdiff_t>(c);
      if (idx != label_at && idx != property_at) feature_at.push_back(idx);
    }
  } else {
    for (const std::string& name : desc.feature_columns) {
      const std::ptrdiff_t idx = column_index(name);
      if (idx < 0) {
        throw std::runtime_error("load_csv: missing feature column '" + name +
                                 "'");
      }
      feature_at.push_back(idx);
    }
  }
  if (feature_at.empty()) {
    throw std::runtime_error("load_csv: no feature columns");
  }
  const Eigen::Index d = static_cast<Eigen::Index>(feature_at.size());

  CsvDataset out;
  out.data = Dataset(d);
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const std::vector<std::string> cells = split(trimmed, ',');
    if (cells.size() != header.size()) {
      throw std::runtime_error(
          "csv line " + std::to_string(line_number) + ": expected " +
          std::to_string(header.size()) + " cells, got " +
          std::to_string(cells.size()));
    }
    FeatureVector x(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      x[j] = parse_double(cells[static_cast<std::size_t>(feature_at[j])],
                          line_number);
    }
    const int y = parse_bit(cells[static_cast<std::size_t>(label_at)],
                            line_number, "label");
    out.data.add(std::move(x), y);
    if (property_at >= 0) {
      out.property_bits.push_back(parse_bit(
          cells[static_cast<std::size_t>(property_at)], line_number,
          "property"));
    }
  }
  if (out.data.empty()) {
    throw std::runtime_error("load_csv: no data rows in '" + desc.path + "'");
  }

  if (property_at >= 0) {
    double rate = 0.0;
    for (int bit : out.property_bits) rate += bit;
    out.property_rate = rate / static_cast<double>(out.data.size());

    // Partition rows: the first holdout_fraction of a seeded shuffle feeds
    // the attacker-side samplers, the rest are the victim pool.
    std::vector<std::size_t> order(out.data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = make_rng(derive_seed(desc.split_seed, {0x5EEDu}));
    shuffle(order, rng);
    const std::size_t holdout_n = static_cast<std::size_t>(
        std::llround(desc.holdout_fraction * static_cast<double>(order.size())));

    std::vector<LabeledExample> main_plus, main_minus, hold_plus, hold_minus;
    for (std::size_t r = 0; r < order.size(); ++r) {
      const std::size_t row = order[r];
      const bool holdout = r < holdout_n;
      const LabeledExample& ex = out.data[row];
      auto& bucket = out.property_bits[row] == 1
                         ? (holdout ? hold_plus : main_plus)
                         : (holdout ? hold_minus : main_minus);
      bucket.push_back(ex);
    }
    out.dplus = empirical_source(main_plus, d, "property=1, victim partition");
    out.dminus =
        empirical_source(main_minus, d, "property=0, victim partition");
    if (holdout_n == 0) {
      out.holdout_dplus = out.dplus;
      out.holdout_dminus = out.dminus;
    } else {
      out.holdout_dplus =
          empirical_source(hold_plus, d, "property=1, holdout partition");
      out.holdout_dminus =
          empirical_source(hold_minus, d, "property=0, holdout partition");
    }
  }
  return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& data,
                       const std::vector<int>* property_bits) {
  if (property_bits && property_bits->size() != data.size()) {
    throw std::invalid_argument("write_dataset_csv: property size mismatch");
  }
  const Eigen::Index d = data.dim();
  for (Eigen::Index j = 0; j < d; ++j) out << 'f' << j << ',';
  out << "label";
  if (property_bits) out << ",property";
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out << data[i].x[j] << ',';
    out << data[i].y;
    if (property_bits) out << ',' << (*property_bits)[i];
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("read_dataset_csv: empty stream");
  }
  const std::vector<std::string> header = split(trim(line), ',');
  const auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end()) {
    throw std::runtime_error("read_dataset_csv: missing label column");
  }
  const std::size_t label_at =
      static_cast<std::size_t>(label_it - header.begin());
  std::vector<std::size_t> feature_at;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_at && header[c] != "property") feature_at.push_back(c);
  }
  Dataset data(static_cast<Eigen::Index>(feature_at.size()));
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const std::vector<std::string> cells = split(trimmed, ',');
    if (cells.size() != header.size()) {
      throw std::runtime_error("read_dataset_csv: line " +
                               std::to_string(line_number) + " malformed");
    }
    FeatureVector x(static_cast<Eigen::Index>(feature_at.size()));
    for (std::size_t j = 0; j < feature_at.size(); ++j) {
      x[static_cast<Eigen::Index>(j)] =
          parse_double(cells[feature_at[j]], line_number);
    }
    data.add(std::move(x), parse_bit(cells[label_at], line_number, "label"));
  }
  return data;
}

namespace {

bool parse_bool_value(const std::string& value, const std::string& key) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw std::runtime_error("config: key '" + key + "' expects 0/1, got '" +
                           value + "'");
}

std::vector<int> parse_int_list(const std::string& value) {
  std::vector<int> out;
  for (const std::string& cell : split(value, ',')) {
    const std::string t = trim(cell);
    if (!t.empty()) out.push_back(std::stoi(t));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::size_t comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_number) +
                               ": expected key = value");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    try {
      if (key == "source") {
        if (value == "synthetic") {
          cfg.source = ExperimentConfig::Source::synthetic;
        } else if (value == "csv") {
          cfg.source = ExperimentConfig::Source::csv;
        } else {
          throw std::runtime_error("expected synthetic|csv");
        }
      } else if (key == "inject") {
        cfg.inject = parse_bool_value(value, key);
      } else if (key == "inject_rate") {
        cfg.inject_rate = std::stod(value);
      } else if (key == "property_feature") {
        cfg.property_feature = std::stoi(value);
      } else if (key == "csv_path") {
        cfg.csv.path = value;
      } else if (key == "label_column") {
        cfg.csv.label_column = value;
      } else if (key == "property_column") {
        cfg.csv.property_column = value;
      } else if (key == "feature_columns") {
        cfg.csv.feature_columns.clear();
        for (const auto& cell : split(value, ',')) {
          const std::string t = trim(cell);
          if (!t.empty()) cfg.csv.feature_columns.push_back(t);
        }
      } else if (key == "holdout_fraction") {
        cfg.csv.holdout_fraction = std::stod(value);
      } else if (key == "split_seed") {
        cfg.csv.split_seed = std::stoull(value);
      } else if (key == "arch") {
        cfg.model.architecture = architecture_from_string(value);
      } else if (key == "hidden") {
        cfg.model.hidden = parse_int_list(value);
      } else if (key == "lr") {
        cfg.model.learning_rate = std::stod(value);
      } else if (key == "epochs") {
        cfg.model.epochs = std::stoi(value);
      } else if (key == "batch") {
        cfg.model.batch_size = std::stoi(value);
      } else if (key == "l2") {
        cfg.model.l2 = std::stod(value);
      } else if (key == "n") {
        cfg.n = std::stoull(value);
      } else if (key == "p") {
        cfg.p = std::stod(value);
      } else if (key == "t0") {
        cfg.t0 = std::stod(value);
      } else if (key == "t1") {
        cfg.t1 = std::stod(value);
      } else if (key == "ensemble") {
        cfg.ensemble_count = std::stoull(value);
      } else if (key == "queries") {
        cfg.query_count = std::stoull(value);
      } else if (key == "shadows") {
        cfg.shadow_count = std::stoull(value);
      } else if (key == "trials") {
        cfg.trials = std::stoull(value);
      } else if (key == "repetitions") {
        cfg.repetitions = std::stoull(value);
      } else if (key == "test_size") {
        cfg.test_size = std::stoull(value);
      } else if (key == "uniform_bits") {
        cfg.uniform_bits = parse_bool_value(value, key);
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "threads") {
        cfg.threads = static_cast<unsigned>(std::stoul(value));
      } else if (key == "out") {
        cfg.out = value;
      } else {
        throw std::runtime_error("unknown key");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("config line " + std::to_string(line_number) +
                               " (key '" + key + "'): " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file '" + path + "'");
  }
  return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
  out.precision(17);
  out << "source = "
      << (cfg.source == ExperimentConfig::Source::synthetic ? "synthetic"
                                                            : "csv")
      << '\n';
  out << "inject = " << (cfg.inject ? 1 : 0) << '\n';
  out << "inject_rate = " << cfg.inject_rate << '\n';
  out << "property_feature = " << cfg.property_feature << '\n';
  if (!cfg.csv.path.empty()) out << "csv_path = " << cfg.csv.path << '\n';
  out << "label_column = " << cfg.csv.label_column << '\n';
  if (!cfg.csv.property_column.empty()) {
    out << "property_column = " << cfg.csv.property_column << '\n';
  }
  if (!cfg.csv.feature_columns.empty()) {
    out << "feature_columns = ";
    for (std::size_t i = 0; i < cfg.csv.feature_columns.size(); ++i) {
      out << cfg.csv.feature_columns[i]
          << (i + 1 == cfg.csv.feature_columns.size() ? "" : ",");
    }
    out << '\n';
  }
  out << "holdout_fraction = " << cfg.csv.holdout_fraction << '\n';
  out << "split_seed = " << cfg.csv.split_seed << '\n';
  out << "arch = " << to_string(cfg.model.architecture) << '\n';
  if (!cfg.model.hidden.empty()) {
    out << "hidden = ";
    for (std::size_t i = 0; i < cfg.model.hidden.size(); ++i) {
      out << cfg.model.hidden[i]
          << (i + 1 == cfg.model.hidden.size() ? "" : ",");
    }
    out << '\n';
  }
  out << "lr = " << cfg.model.learning_rate << '\n';
  out << "epochs = " << cfg.model.epochs << '\n';
  out << "batch = " << cfg.model.batch_size << '\n';
  out << "l2 = " << cfg.model.l2 << '\n';
  out << "n = " << cfg.n << '\n';
  out << "p = " << cfg.p << '\n';
  out << "t0 = " << cfg.t0 << '\n';
  out << "t1 = " << cfg.t1 << '\n';
  out << "ensemble = " << cfg.ensemble_count << '\n';
  out << "queries = " << cfg.query_count << '\n';
  out << "shadows = " << cfg.shadow_count << '\n';
  out << "trials = " << cfg.trials << '\n';
  out << "repetitions = " << cfg.repetitions << '\n';
  out << "test_size = " << cfg.test_size << '\n';
  out << "uniform_bits = " << (cfg.uniform_bits ? 1 : 0) << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "threads = " << cfg.threads << '\n';
  if (!cfg.out.empty()) out << "out = " << cfg.out << '\n';
}

GameConfig to_game_config(const ExperimentConfig& cfg) {
  GameConfig game;
  game.model = cfg.model;
  game.n = cfg.n;
  game.p = cfg.p;
  game.t0 = cfg.t0;
  game.t1 = cfg.t1;
  game.ensemble_count = cfg.ensemble_count;
  game.query_count = cfg.query_count;
  game.shadow_count = cfg.shadow_count;
  game.trials = cfg.trials;
  game.repetitions = cfg.repetitions;
  game.test_size = cfg.test_size;
  game.uniform_bits = cfg.uniform_bits;
  game.seed = cfg.seed;
  game.threads = cfg.threads;

  if (cfg.source == ExperimentConfig::Source::synthetic) {
    SyntheticSpec spec = SyntheticSpec::default_task();
    spec.seed = cfg.seed;
    if (cfg.inject) {
      const SyntheticTask base = generate_synthetic(spec);
      if (!base.joint) {
        throw std::runtime_error("to_game_config: synthetic base not finite");
      }
      const SyntheticTask task = inject_random_feature(
          DistributionSource::from_finite(base.joint), cfg.inject_rate);
      game.dplus = task.dplus;
      game.dminus = task.dminus;
      game.property = task.property;
    } else {
      spec.property_feature = cfg.property_feature;
      const SyntheticTask task = generate_synthetic(spec);
      game.dplus = task.dplus;
      game.dminus = task.dminus;
      game.property = task.property;
    }
  } else {
    const CsvDataset csv = load_csv(cfg.csv);
    if (cfg.csv.property_column.empty()) {
      throw std::runtime_error(
          "to_game_config: csv source requires a property column");
    }
    game.dplus = csv.dplus;
    game.dminus = csv.dminus;
    game.adv_dplus = csv.holdout_dplus;
    game.adv_dminus = csv.holdout_dminus;
  }
  return game;
}

}  // namespace propinf
