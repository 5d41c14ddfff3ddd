#include "propinf/attack.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "propinf/parallel.hpp"

namespace propinf {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(std::uint64_t hash, const void* bytes, std::size_t len) {
  const auto* data = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < len; ++i) {
    hash ^= data[i];
    hash *= kFnvPrime;
  }
  return hash;
}

}  // namespace

std::string to_string(PoisonVariant v) {
  switch (v) {
    case PoisonVariant::plus_one:
      return "(X+,1)";
    case PoisonVariant::plus_zero:
      return "(X+,0)";
    case PoisonVariant::minus_one:
      return "(X-,1)";
    case PoisonVariant::minus_zero:
      return "(X-,0)";
  }
  return "?";
}

std::uint64_t QuerySet::fingerprint() const {
  std::uint64_t hash = kFnvOffset;
  const std::uint64_t count = points.size();
  const std::uint64_t filtered = filtered_count;
  hash = fnv1a(hash, &count, sizeof(count));
  hash = fnv1a(hash, &filtered, sizeof(filtered));
  for (const auto& x : points) {
    hash = fnv1a(hash, x.data(),
                 static_cast<std::size_t>(x.size()) * sizeof(double));
  }
  return hash;
}

PoisonSet select_poison(const PropertyPredicate& f, double t0, double t1,
                        double p, std::size_t n,
                        const DistributionSource& dplus,
                        const DistributionSource& dminus, std::uint64_t seed) {
  (void)f;  // the rule depends on the conditionals only, f documents intent
  if (!(0.0 <= t0 && t0 < t1 && t1 <= 1.0)) {
    throw std::invalid_argument("select_poison: need 0 <= t0 < t1 <= 1");
  }
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::invalid_argument("select_poison: p must lie in [0,1)");
  }
  const std::size_t m =
      static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
  if (p > 0.0 && m == 0) {
    throw std::invalid_argument(
        "select_poison: p*n rounds to zero poison points");
  }
  const bool use_plus = t0 + t1 < 1.0;
  const DistributionSource& source = use_plus ? dplus : dminus;
  Dataset sampled = sample(source, m, derive_seed(seed, {0xA1u}));
  double alpha = 0.0;
  for (const auto& ex : sampled) alpha += ex.y;
  alpha = m > 0 ? alpha / static_cast<double>(m) : 0.0;
  const int label = alpha > 0.5 ? 0 : 1;

  PoisonSet poison;
  poison.variant = use_plus
                       ? (label == 1 ? PoisonVariant::plus_one
                                     : PoisonVariant::plus_zero)
                       : (label == 1 ? PoisonVariant::minus_one
                                     : PoisonVariant::minus_zero);
  poison.examples = Dataset(source.dim());
  for (const auto& ex : sampled) poison.examples.add(ex.x, label);
  return poison;
}

std::vector<TrainedModel> train_query_ensemble(const QueryConfig& cfg,
                                               const DistributionSource& dplus,
                                               const DistributionSource& dminus,
                                               std::uint64_t seed,
                                               unsigned threads) {
  if (cfg.ensemble_count == 0) {
    throw std::invalid_argument("train_query_ensemble: ensemble_count >= 1");
  }
  const std::size_t half = cfg.member_size / 2;
  return train_ensemble(cfg.model, {dminus, dplus},
                        {half, cfg.member_size - half}, cfg.ensemble_count,
                        derive_seed(seed, {0xB2u}), threads);
}

double ensemble_certainty(const std::vector<TrainedModel>& ensemble,
                          const FeatureVector& x) {
  if (ensemble.empty()) {
    throw std::invalid_argument("ensemble_certainty: empty ensemble");
  }
  double votes = 0.0;
  for (const auto& model : ensemble) votes += model.predict(x);
  return std::abs(1.0 - 2.0 * votes / static_cast<double>(ensemble.size()));
}

QuerySet select_queries(const QueryConfig& cfg, const DistributionSource& dplus,
                        const DistributionSource& dminus,
                        const PoisonSet& poison, std::uint64_t seed,
                        unsigned threads) {
  if (cfg.query_count == 0) {
    throw std::invalid_argument("select_queries: query_count must be >= 1");
  }
  const std::vector<TrainedModel> ensemble =
      train_query_ensemble(cfg, dplus, dminus, seed, threads);
  const DistributionSource candidates = property_mixture(dplus, dminus, 0.5);

  QuerySet queries;
  Rng rng = make_rng(derive_seed(seed, {0xC3u}));
  const std::size_t budget = cfg.rejection_factor * cfg.query_count;
  for (std::size_t attempt = 0;
       attempt < budget && queries.points.size() < cfg.query_count; ++attempt) {
    FeatureVector x = candidates.draw(rng).x;
    if (ensemble_certainty(ensemble, x) <= cfg.certainty_limit) {
      queries.points.push_back(std::move(x));
    }
  }
  if (queries.points.size() < cfg.query_count) {
    throw QuerySelectionError(
        "select_queries: candidate budget (" + std::to_string(budget) +
            ") exhausted with " + std::to_string(queries.points.size()) + "/" +
            std::to_string(cfg.query_count) + " accepted",
        queries.points.size());
  }
  queries.filtered_count = queries.points.size();
  for (const auto& ex : poison.examples) {
    queries.points.push_back(ex.x);
  }
  return queries;
}

Eigen::VectorXd query_responses(const LabelOnlyModel& model,
                                const QuerySet& queries) {
  Eigen::VectorXd responses(static_cast<Eigen::Index>(queries.points.size()));
  for (std::size_t i = 0; i < queries.points.size(); ++i) {
    responses[static_cast<Eigen::Index>(i)] = model.predict(queries.points[i]);
  }
  return responses;
}

AttackModel train_attack_model(const ShadowConfig& cfg, const PoisonSet& poison,
                               const QuerySet& queries, double t0, double t1,
                               const DistributionSource& dplus,
                               const DistributionSource& dminus,
                               std::uint64_t seed, unsigned threads) {
  if (cfg.shadow_count == 0) {
    throw std::invalid_argument("train_attack_model: shadow_count must be >= 1");
  }
  if (queries.points.empty()) {
    throw std::invalid_argument("train_attack_model: empty query set");
  }
  const std::size_t k = cfg.shadow_count;
  const DistributionSource hypothesis[2] = {
      property_mixture(dplus, dminus, t0),
      property_mixture(dplus, dminus, t1),
  };

  // 2k shadow models: index h*k+i trains on D_{t_h} clean data + poison.
  std::vector<Eigen::VectorXd> responses(2 * k);
  parallel_for(2 * k, threads, [&](std::size_t idx) {
    const std::size_t h = idx / k;
    const std::size_t i = idx % k;
    try {
      Dataset data =
          sample(hypothesis[h], cfg.clean_size, derive_seed(seed, {h, i, 1u}));
      data.append(poison.examples);
      const TrainedModel shadow =
          train(cfg.model, data, derive_seed(seed, {h, i, 2u}));
      responses[idx] = query_responses(shadow, queries);
    } catch (const std::exception& e) {
      throw TrainingError("shadow model " + std::to_string(i) +
                          " (hypothesis " + std::to_string(h) + "): " +
                          e.what());
    }
  });

  bool degenerate = true;
  for (const auto& r : responses) {
    if (r != responses.front()) {
      degenerate = false;
      break;
    }
  }

  Dataset meta(static_cast<Eigen::Index>(queries.points.size()));
  for (std::size_t idx = 0; idx < 2 * k; ++idx) {
    meta.add(responses[idx], idx / k == 0 ? 0 : 1);
  }

  ModelSpec linear;
  linear.architecture = Architecture::logistic;
  linear.epochs = cfg.attack_epochs;
  linear.l2 = 2.0 * std::sqrt(1.0 / static_cast<double>(k));

  AttackModel attack{train(linear, meta, derive_seed(seed, {0xD4u})),
                     linear.l2, queries.fingerprint(), degenerate};
  return attack;
}

int infer(const AttackModel& attack_model, const LabelOnlyModel& target,
          const QuerySet& queries) {
  if (attack_model.query_fingerprint != queries.fingerprint()) {
    throw std::invalid_argument(
        "infer: query set does not match the attack model's fingerprint");
  }
  if (attack_model.classifier.dim() !=
      static_cast<Eigen::Index>(queries.points.size())) {
    throw std::invalid_argument("infer: query dimensionality mismatch");
  }
  return attack_model.classifier.predict(query_responses(target, queries));
}

void AttackModel::save(std::ostream& out) const {
  out << "propinf-attack-model 1\n";
  out << "l2_weight ";
  out.precision(17);
  out << l2_weight << '\n';
  out << "query_fingerprint " << query_fingerprint << '\n';
  out << "degenerate " << (degenerate ? 1 : 0) << '\n';
  classifier.save(out);
}

AttackModel AttackModel::load(std::istream& in) {
  std::string token;
  int version = 0;
  if (!(in >> token >> version) || token != "propinf-attack-model" ||
      version != 1) {
    throw std::runtime_error("AttackModel::load: bad magic/version");
  }
  auto expect = [&in](const std::string& wanted) {
    std::string got;
    if (!(in >> got) || got != wanted) {
      throw std::runtime_error("AttackModel::load: expected '" + wanted + "'");
    }
  };
  double l2 = 0.0;
  std::uint64_t fingerprint = 0;
  int degenerate = 0;
  expect("l2_weight");
  in >> l2;
  expect("query_fingerprint");
  in >> fingerprint;
  expect("degenerate");
  in >> degenerate;
  if (!in) throw std::runtime_error("AttackModel::load: truncated header");
  return AttackModel{TrainedModel::load(in), l2, fingerprint, degenerate != 0};
}

void save_poison_csv(std::ostream& out, const PoisonSet& poison) {
  const Eigen::Index d = poison.examples.dim();
  out << "# variant " << to_string(poison.variant) << '\n';
  for (Eigen::Index j = 0; j < d; ++j) out << 'f' << j << ',';
  out << "label\n";
  out.precision(17);
  for (const auto& ex : poison.examples) {
    for (Eigen::Index j = 0; j < d; ++j) out << ex.x[j] << ',';
    out << ex.y << '\n';
  }
}

void save_queries_csv(std::ostream& out, const QuerySet& queries) {
  if (queries.points.empty()) {
    throw std::invalid_argument("save_queries_csv: empty query set");
  }
  const Eigen::Index d = queries.points.front().size();
  out << "# filtered " << queries.filtered_count << '\n';
  for (Eigen::Index j = 0; j < d; ++j) {
    out << 'f' << j << (j + 1 == d ? '\n' : ',');
  }
  out.precision(17);
  for (const auto& x : queries.points) {
    for (Eigen::Index j = 0; j < d; ++j) {
      out << x[j] << (j + 1 == d ? '\n' : ',');
    }
  }
}

QuerySet load_queries_csv(std::istream& in) {
  QuerySet queries;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# filtered ", 0) != 0) {
    throw std::runtime_error("load_queries_csv: missing filtered header");
  }
  queries.filtered_count = std::stoull(line.substr(11));
  if (!std::getline(in, line)) {
    throw std::runtime_error("load_queries_csv: missing column header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> values;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    FeatureVector x(static_cast<Eigen::Index>(values.size()));
    for (std::size_t j = 0; j < values.size(); ++j) {
      x[static_cast<Eigen::Index>(j)] = values[j];
    }
    queries.points.push_back(std::move(x));
  }
  return queries;
}

}  // namespace propinf
