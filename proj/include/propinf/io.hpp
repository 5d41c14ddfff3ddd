#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "propinf/data.hpp"
#include "propinf/distribution.hpp"
#include "propinf/game.hpp"
#include "propinf/model.hpp"

namespace propinf {

/// Schema for ingesting a pre-featurized CSV dataset. Feature columns default
/// to every column except the label and property columns; list them
/// explicitly to include the property column among the features.
struct CsvDatasetDescriptor {
  std::string path;
  std::string label_column = "label";
  std::string property_column;  // empty: no property column
  std::vector<std::string> feature_columns;
  // Fraction of rows reserved as the attacker-side partition used for shadow
  // and ensemble sampling (disjoint from victim rows).
  double holdout_fraction = 1.0 / 3.0;
  std::uint64_t split_seed = 0;
  bool operator==(const CsvDatasetDescriptor&) const = default;
};

/// A loaded CSV dataset with empirical with-replacement conditional samplers
/// for the main (victim) and holdout (attacker) partitions.
struct CsvDataset {
  Dataset data;                    // every row, in file order
  std::vector<int> property_bits;  // per row; empty without a property column
  double property_rate = 0.0;
  DistributionSource dplus;
  DistributionSource dminus;
  DistributionSource holdout_dplus;
  DistributionSource holdout_dminus;
};

/// Parses and validates the file; reports malformed rows with their line
/// number, rejects non-binary label/property values and missing columns.
CsvDataset load_csv(const CsvDatasetDescriptor& desc);

/// Canonical dataset CSV: header f0..f{d-1},label[,property]; numeric feature
/// columns; label in {0,1}. Doubles round-trip exactly.
void write_dataset_csv(std::ostream& out, const Dataset& data,
                       const std::vector<int>* property_bits = nullptr);
Dataset read_dataset_csv(std::istream& in);

/// Experiment configuration: flat key=value text with '#' comments.
struct ExperimentConfig {
  enum class Source { synthetic, csv };
  Source source = Source::synthetic;

  // synthetic task (the calibrated default spec)
  bool inject = true;        // append an independent random binary property
  double inject_rate = 0.5;  // its marginal rate in the base distribution
  int property_feature = 0;  // property coordinate when inject = false

  CsvDatasetDescriptor csv;

  ModelSpec model;
  std::size_t n = 1000;
  double p = 0.1;
  double t0 = 0.3;
  double t1 = 0.7;
  std::size_t ensemble_count = 200;
  std::size_t query_count = 500;
  std::size_t shadow_count = 200;
  std::size_t trials = 10;
  std::size_t repetitions = 5;
  std::size_t test_size = 1000;
  bool uniform_bits = false;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);
void write_config(std::ostream& out, const ExperimentConfig& cfg);

/// Builds the game configuration, materializing the data sources.
GameConfig to_game_config(const ExperimentConfig& cfg);

}  // namespace propinf
