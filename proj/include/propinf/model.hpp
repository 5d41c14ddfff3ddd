#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "propinf/bayes.hpp"
#include "propinf/data.hpp"
#include "propinf/distribution.hpp"

namespace propinf {

enum class Architecture { logistic, mlp };

std::string to_string(Architecture a);
Architecture architecture_from_string(const std::string& name);

struct ModelSpec {
  Architecture architecture = Architecture::logistic;
  std::vector<int> hidden;       // hidden layer widths for mlp, e.g. {32,16,8}
  double learning_rate = 0.1;    // decayed by 1/sqrt(epoch)
  int epochs = 50;
  int batch_size = 32;
  double l2 = 1e-4;
  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

struct QualityMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  // Precision is reported as 0 with this flag set when the model predicted
  // no positives at all; sweeps must not crash on that case.
  bool no_positives_predicted = false;
};

/// Thrown when training diverges (non-finite parameters/loss) or an ensemble
/// member fails; the message carries the member index where applicable.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trained classifier. The only prediction surface is the hard label;
/// scores and margins are deliberately not exposed. Immutable and shareable
/// once trained.
class TrainedModel final : public LabelOnlyModel {
 public:
  int predict(const FeatureVector& x) const override;

  Eigen::Index dim() const { return scale_min_.size(); }
  const ModelSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }

  /// Documented text format: spec, min-max scaler, parameter arrays.
  /// Round-trips exactly.
  void save(std::ostream& out) const;
  static TrainedModel load(std::istream& in);

 private:
  TrainedModel() = default;
  friend TrainedModel train(const ModelSpec&, const Dataset&, std::uint64_t);

  ModelSpec spec_;
  std::uint64_t seed_ = 0;
  Eigen::VectorXd scale_min_;
  Eigen::VectorXd scale_factor_;            // 1/(max-min), 0 for constants
  std::vector<Eigen::MatrixXd> weights_;    // per layer, rows = outputs
  std::vector<Eigen::VectorXd> biases_;
};

/// Minimizes L2-regularized logistic loss by minibatch SGD. Deterministic
/// given (spec, data order, seed): shuffling and initialization both derive
/// from the seed. Min-max feature scaling is fit on the training data and
/// stored in the model.
TrainedModel train(const ModelSpec& spec, const Dataset& data,
                   std::uint64_t seed);

/// Confusion-matrix metrics with label 1 as the positive class.
QualityMetrics metrics(const LabelOnlyModel& model, const Dataset& data);

/// Trains `count` models, each on a freshly sampled dataset that draws
/// sizes[j] examples from sources[j]. Member seeds derive deterministically
/// from the master seed; members are independent, may train concurrently and
/// are returned in index order.
std::vector<TrainedModel> train_ensemble(
    const ModelSpec& spec, const std::vector<DistributionSource>& sources,
    const std::vector<std::size_t>& sizes, std::size_t count,
    std::uint64_t seed, unsigned threads = 1);

}  // namespace propinf
