#include "propinf/model.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "propinf/parallel.hpp"

namespace propinf {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  out << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << v[i];
  out << '\n';
}

Eigen::VectorXd read_vector(std::istream& in) {
  Eigen::Index n = 0;
  if (!(in >> n) || n < 0) {
    throw std::runtime_error("TrainedModel::load: bad vector length");
  }
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(in >> v[i])) {
      throw std::runtime_error("TrainedModel::load: truncated vector");
    }
  }
  return v;
}

}  // namespace

std::string to_string(Architecture a) {
  return a == Architecture::logistic ? "logistic" : "mlp";
}

Architecture architecture_from_string(const std::string& name) {
  if (name == "logistic") return Architecture::logistic;
  if (name == "mlp") return Architecture::mlp;
  throw std::invalid_argument("unknown architecture: " + name);
}

void ModelSpec::validate() const {
  if (architecture == Architecture::mlp && hidden.empty()) {
    throw std::invalid_argument("ModelSpec: mlp requires hidden layer sizes");
  }
  for (int width : hidden) {
    if (width <= 0) {
      throw std::invalid_argument("ModelSpec: hidden sizes must be positive");
    }
  }
  if (!(learning_rate > 0.0) || epochs <= 0 || batch_size <= 0 || l2 < 0.0) {
    throw std::invalid_argument("ModelSpec: hyperparameters must be positive");
  }
}

int TrainedModel::predict(const FeatureVector& x) const {
  if (x.size() != dim()) {
    throw std::invalid_argument("TrainedModel::predict: dimension mismatch");
  }
  Eigen::VectorXd a = (x - scale_min_).cwiseProduct(scale_factor_);
  for (std::size_t layer = 0; layer + 1 < weights_.size(); ++layer) {
    a = (weights_[layer] * a + biases_[layer]).cwiseMax(0.0);
  }
  const double margin = (weights_.back() * a + biases_.back())(0);
  return margin >= 0.0 ? 1 : 0;  // ties resolve to label 1
}

void TrainedModel::save(std::ostream& out) const {
  out.precision(17);
  out << "propinf-model 1\n";
  out << "architecture " << to_string(spec_.architecture) << '\n';
  out << "hidden";
  for (int h : spec_.hidden) out << ' ' << h;
  out << '\n';
  out << "learning_rate " << spec_.learning_rate << '\n';
  out << "epochs " << spec_.epochs << '\n';
  out << "batch_size " << spec_.batch_size << '\n';
  out << "l2 " << spec_.l2 << '\n';
  out << "seed " << seed_ << '\n';
  out << "scale_min ";
  write_vector(out, scale_min_);
  out << "scale_factor ";
  write_vector(out, scale_factor_);
  out << "layers " << weights_.size() << '\n';
  for (std::size_t layer = 0; layer < weights_.size(); ++layer) {
    const auto& w = weights_[layer];
    out << "weight " << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        out << w(r, c) << (c + 1 == w.cols() ? '\n' : ' ');
      }
    }
    out << "bias ";
    write_vector(out, biases_[layer]);
  }
}

TrainedModel TrainedModel::load(std::istream& in) {
  TrainedModel model;
  std::string token;
  int version = 0;
  if (!(in >> token >> version) || token != "propinf-model" || version != 1) {
    throw std::runtime_error("TrainedModel::load: bad magic/version");
  }
  auto expect = [&in](const std::string& wanted) {
    std::string got;
    if (!(in >> got) || got != wanted) {
      throw std::runtime_error("TrainedModel::load: expected '" + wanted +
                               "'");
    }
  };
  expect("architecture");
  in >> token;
  model.spec_.architecture = architecture_from_string(token);
  expect("hidden");
  {
    std::string rest;
    std::getline(in, rest);
    std::istringstream hs(rest);
    int width = 0;
    while (hs >> width) model.spec_.hidden.push_back(width);
  }
  expect("learning_rate");
  in >> model.spec_.learning_rate;
  expect("epochs");
  in >> model.spec_.epochs;
  expect("batch_size");
  in >> model.spec_.batch_size;
  expect("l2");
  in >> model.spec_.l2;
  expect("seed");
  in >> model.seed_;
  expect("scale_min");
  model.scale_min_ = read_vector(in);
  expect("scale_factor");
  model.scale_factor_ = read_vector(in);
  expect("layers");
  std::size_t layers = 0;
  in >> layers;
  for (std::size_t layer = 0; layer < layers; ++layer) {
    expect("weight");
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> rows >> cols)) {
      throw std::runtime_error("TrainedModel::load: bad weight shape");
    }
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(in >> w(r, c))) {
          throw std::runtime_error("TrainedModel::load: truncated weights");
        }
      }
    }
    model.weights_.push_back(std::move(w));
    expect("bias");
    model.biases_.push_back(read_vector(in));
  }
  if (model.weights_.empty()) {
    throw std::runtime_error("TrainedModel::load: no layers");
  }
  if (!in) throw std::runtime_error("TrainedModel::load: truncated file");
  return model;
}

TrainedModel train(const ModelSpec& spec, const Dataset& data,
                   std::uint64_t seed) {
  spec.validate();
  if (data.empty()) {
    throw std::invalid_argument("train: empty dataset");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  const Eigen::Index d = data.dim();

  TrainedModel model;
  model.spec_ = spec;
  model.seed_ = seed;

  // Min-max scaling fit on the training split only.
  Eigen::MatrixXd features = data.feature_matrix();
  model.scale_min_ = features.colwise().minCoeff();
  Eigen::VectorXd range =
      features.colwise().maxCoeff().transpose() - model.scale_min_;
  model.scale_factor_ = range.unaryExpr(
      [](double r) { return r > 0.0 ? 1.0 / r : 0.0; });
  Eigen::MatrixXd x =
      (features.rowwise() - model.scale_min_.transpose()).array().rowwise() *
      model.scale_factor_.transpose().array();
  const Eigen::VectorXd y = data.label_vector();

  // Layer shapes: hidden (mlp only) then the single output unit.
  std::vector<Eigen::Index> widths;
  widths.push_back(d);
  if (spec.architecture == Architecture::mlp) {
    for (int h : spec.hidden) widths.push_back(h);
  }
  widths.push_back(1);

  Rng rng = make_rng(derive_seed(seed, {0x11u}));
  const std::size_t layer_count = widths.size() - 1;
  model.weights_.resize(layer_count);
  model.biases_.resize(layer_count);
  for (std::size_t layer = 0; layer < layer_count; ++layer) {
    const Eigen::Index fan_in = widths[layer];
    const Eigen::Index fan_out = widths[layer + 1];
    model.weights_[layer].resize(fan_out, fan_in);
    model.biases_[layer] = Eigen::VectorXd::Zero(fan_out);
    if (layer_count == 1) {
      model.weights_[layer].setZero();  // logistic starts at the origin
    } else {
      const double bound =
          std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (Eigen::Index r = 0; r < fan_out; ++r) {
        for (Eigen::Index c = 0; c < fan_in; ++c) {
          model.weights_[layer](r, c) = (2.0 * uniform01(rng) - 1.0) * bound;
        }
      }
    }
  }

  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  std::vector<Eigen::MatrixXd> activations(layer_count + 1);
  for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
    const double lr =
        spec.learning_rate / std::sqrt(static_cast<double>(epoch));
    shuffle(order, rng);
    for (Eigen::Index start = 0; start < n; start += spec.batch_size) {
      const Eigen::Index m =
          std::min<Eigen::Index>(spec.batch_size, n - start);
      Eigen::MatrixXd xb(m, d);
      Eigen::VectorXd yb(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t row = order[static_cast<std::size_t>(start + i)];
        xb.row(i) = x.row(static_cast<Eigen::Index>(row));
        yb[i] = y[static_cast<Eigen::Index>(row)];
      }
      // Forward: ReLU hidden layers, sigmoid output.
      activations[0] = std::move(xb);
      for (std::size_t layer = 0; layer < layer_count; ++layer) {
        Eigen::MatrixXd z =
            activations[layer] * model.weights_[layer].transpose();
        z.rowwise() += model.biases_[layer].transpose();
        activations[layer + 1] =
            layer + 1 == layer_count ? sigmoid(z) : relu(z);
      }
      // Backward: delta through the sigmoid cross-entropy then ReLU masks.
      Eigen::MatrixXd delta =
          (activations[layer_count].col(0) - yb) / static_cast<double>(m);
      for (std::size_t layer = layer_count; layer-- > 0;) {
        const Eigen::MatrixXd grad_w =
            delta.transpose() * activations[layer] +
            spec.l2 * model.weights_[layer];
        const Eigen::VectorXd grad_b = delta.colwise().sum().transpose();
        if (layer > 0) {
          delta = (delta * model.weights_[layer])
                      .cwiseProduct((activations[layer].array() > 0.0)
                                        .cast<double>()
                                        .matrix());
        }
        model.weights_[layer] -= lr * grad_w;
        model.biases_[layer] -= lr * grad_b;
      }
    }
    for (std::size_t layer = 0; layer < layer_count; ++layer) {
      if (!model.weights_[layer].allFinite() ||
          !model.biases_[layer].allFinite()) {
        throw TrainingError("train: diverged (non-finite parameters) at epoch " +
                            std::to_string(epoch));
      }
    }
  }
  return model;
}

QualityMetrics metrics(const LabelOnlyModel& model, const Dataset& data) {
  if (data.empty()) {
    throw std::invalid_argument("metrics: empty dataset");
  }
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& ex : data) {
    const int label = model.predict(ex.x);
    if (label == 1 && ex.y == 1) ++tp;
    if (label == 1 && ex.y == 0) ++fp;
    if (label == 0 && ex.y == 0) ++tn;
    if (label == 0 && ex.y == 1) ++fn;
  }
  QualityMetrics out;
  out.accuracy = static_cast<double>(tp + tn) / static_cast<double>(data.size());
  if (tp + fp == 0) {
    out.precision = 0.0;
    out.no_positives_predicted = true;
  } else {
    out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  out.recall = tp + fn == 0
                   ? 0.0
                   : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return out;
}

std::vector<TrainedModel> train_ensemble(
    const ModelSpec& spec, const std::vector<DistributionSource>& sources,
    const std::vector<std::size_t>& sizes, std::size_t count,
    std::uint64_t seed, unsigned threads) {
  if (count == 0) {
    throw std::invalid_argument("train_ensemble: count must be >= 1");
  }
  if (sources.size() != sizes.size() || sources.empty()) {
    throw std::invalid_argument("train_ensemble: sources/sizes mismatch");
  }
  std::vector<std::optional<TrainedModel>> slots(count);
  parallel_for(count, threads, [&](std::size_t i) {
    const std::uint64_t member = derive_seed(seed, {0xE5u, i});
    try {
      Dataset data(sources.front().dim());
      for (std::size_t j = 0; j < sources.size(); ++j) {
        data.append(sample(sources[j], sizes[j], derive_seed(member, {j})));
      }
      slots[i] = train(spec, data, derive_seed(member, {0x77u}));
    } catch (const std::exception& e) {
      throw TrainingError("ensemble member " + std::to_string(i) + ": " +
                          e.what());
    }
  });
  std::vector<TrainedModel> models;
  models.reserve(count);
  for (auto& slot : slots) models.push_back(std::move(*slot));
  return models;
}

}  // namespace propinf
