#include "propinf/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace propinf {

namespace {

// Exact-equality lookup key: the raw bytes of the coordinates, with -0.0
// normalized to +0.0 so numerically equal points collide.
template <class Derived>
std::string point_key(const Eigen::DenseBase<Derived>& row) {
  std::string key(static_cast<std::size_t>(row.size()) * sizeof(double), '\0');
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    const double v = row(j) == 0.0 ? 0.0 : row(j);
    std::memcpy(key.data() + static_cast<std::size_t>(j) * sizeof(double), &v,
                sizeof(double));
  }
  return key;
}

}  // namespace

FiniteDistribution::FiniteDistribution(Eigen::MatrixXd points,
                                       Eigen::VectorXd masses,
                                       Eigen::VectorXd posteriors)
    : points_(std::move(points)),
      masses_(std::move(masses)),
      posteriors_(std::move(posteriors)) {
  const Eigen::Index k = points_.rows();
  if (k == 0) {
    throw std::invalid_argument("FiniteDistribution: empty support");
  }
  if (masses_.size() != k || posteriors_.size() != k) {
    throw std::invalid_argument(
        "FiniteDistribution: masses/posteriors size mismatch");
  }
  if (!points_.allFinite()) {
    throw std::invalid_argument("FiniteDistribution: non-finite support point");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(masses_[i] >= 0.0)) {
      throw std::invalid_argument("FiniteDistribution: negative mass");
    }
    if (!(posteriors_[i] >= 0.0 && posteriors_[i] <= 1.0)) {
      throw std::invalid_argument(
          "FiniteDistribution: posterior outside [0,1]");
    }
    total += masses_[i];
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw std::invalid_argument("FiniteDistribution: masses sum to " +
                                std::to_string(total) + ", expected 1");
  }
  cdf_.resize(static_cast<std::size_t>(k));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    acc += masses_[i];
    cdf_[static_cast<std::size_t>(i)] = acc;
  }
  cdf_.back() = 1.0;
  index_.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    auto [it, inserted] =
        index_.emplace(point_key(points_.row(i)), static_cast<std::size_t>(i));
    if (!inserted) {
      throw std::invalid_argument(
          "FiniteDistribution: duplicate support point");
    }
  }
}

std::optional<std::size_t> FiniteDistribution::find(
    const FeatureVector& x) const {
  if (x.size() != dim()) return std::nullopt;
  const auto it = index_.find(point_key(x));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double FiniteDistribution::posterior_at(const FeatureVector& x) const {
  const auto i = find(x);
  if (!i) {
    throw std::invalid_argument(
        "FiniteDistribution: point not in support");
  }
  return posterior(*i);
}

double FiniteDistribution::property_mass(const PropertyPredicate& f) const {
  double total = 0.0;
  for (std::size_t i = 0; i < support_size(); ++i) {
    if (f(point(i))) total += mass(i);
  }
  return total;
}

LabeledExample FiniteDistribution::draw(Rng& rng) const {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t i = static_cast<std::size_t>(
      std::min<std::ptrdiff_t>(it - cdf_.begin(),
                               static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
  LabeledExample ex;
  ex.x = point(i);
  ex.y = bernoulli(rng, posterior(i)) ? 1 : 0;
  return ex;
}

void FiniteDistribution::save(std::ostream& out) const {
  out << "# finite labeled distribution: one row per support point\n";
  out << "# columns: f0 .. f" << (dim() - 1) << " mass posterior\n";
  out << support_size() << ' ' << dim() << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < support_size(); ++i) {
    for (Eigen::Index j = 0; j < dim(); ++j) {
      out << points_(static_cast<Eigen::Index>(i), j) << ' ';
    }
    out << mass(i) << ' ' << posterior(i) << '\n';
  }
}

FiniteDistribution FiniteDistribution::load(std::istream& in) {
  std::string line;
  std::size_t k = 0;
  Eigen::Index d = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream header(line);
    if (!(header >> k >> d)) {
      throw std::runtime_error("FiniteDistribution::load: bad header");
    }
    break;
  }
  if (k == 0) {
    throw std::runtime_error("FiniteDistribution::load: missing header");
  }
  Eigen::MatrixXd points(static_cast<Eigen::Index>(k), d);
  Eigen::VectorXd masses(static_cast<Eigen::Index>(k));
  Eigen::VectorXd posteriors(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::getline(in, line)) {
      throw std::runtime_error("FiniteDistribution::load: truncated table");
    }
    std::istringstream row(line);
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!(row >> points(static_cast<Eigen::Index>(i), j))) {
        throw std::runtime_error("FiniteDistribution::load: bad row " +
                                 std::to_string(i));
      }
    }
    if (!(row >> masses[static_cast<Eigen::Index>(i)] >>
          posteriors[static_cast<Eigen::Index>(i)])) {
      throw std::runtime_error("FiniteDistribution::load: bad row " +
                               std::to_string(i));
    }
  }
  return FiniteDistribution(std::move(points), std::move(masses),
                            std::move(posteriors));
}

bool FiniteDistribution::operator==(const FiniteDistribution& other) const {
  return points_ == other.points_ && masses_ == other.masses_ &&
         posteriors_ == other.posteriors_;
}

DistributionSource DistributionSource::from_finite(FiniteDistribution dist) {
  return from_finite(
      std::make_shared<const FiniteDistribution>(std::move(dist)));
}

DistributionSource DistributionSource::from_finite(
    std::shared_ptr<const FiniteDistribution> dist) {
  if (!dist) {
    throw std::invalid_argument("DistributionSource: null distribution");
  }
  DistributionSource src;
  src.dim_ = dist->dim();
  src.finite_ = std::move(dist);
  return src;
}

DistributionSource DistributionSource::generative(Sampler sampler,
                                                  Eigen::Index dim) {
  if (!sampler) {
    throw std::invalid_argument("DistributionSource: null sampler");
  }
  DistributionSource src;
  src.sampler_ = std::move(sampler);
  src.dim_ = dim;
  return src;
}

LabeledExample DistributionSource::draw(Rng& rng) const {
  if (finite_) return finite_->draw(rng);
  if (!sampler_) {
    throw std::logic_error("DistributionSource: draw() on an empty source");
  }
  return sampler_(rng);
}

void MixtureSpec::validate() const {
  if (components.empty()) {
    throw std::invalid_argument("MixtureSpec: no components");
  }
  double total = 0.0;
  for (const auto& [src, w] : components) {
    if (!(w >= 0.0)) {
      throw std::invalid_argument("MixtureSpec: negative weight");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw std::invalid_argument("MixtureSpec: weights sum to " +
                                std::to_string(total) + ", expected 1");
  }
}

FiniteDistribution condition(const FiniteDistribution& dist,
                             const PropertyPredicate& f, int value) {
  if (value != 0 && value != 1) {
    throw std::invalid_argument("condition: value must be 0 or 1");
  }
  std::vector<std::size_t> keep;
  double event_mass = 0.0;
  for (std::size_t i = 0; i < dist.support_size(); ++i) {
    if (static_cast<int>(f(dist.point(i))) == value) {
      keep.push_back(i);
      event_mass += dist.mass(i);
    }
  }
  if (keep.empty() || event_mass <= 0.0) {
    throw std::invalid_argument("condition: empty conditional (event " +
                                f.description() + "=" + std::to_string(value) +
                                " has zero mass)");
  }
  Eigen::MatrixXd points(static_cast<Eigen::Index>(keep.size()), dist.dim());
  Eigen::VectorXd masses(static_cast<Eigen::Index>(keep.size()));
  Eigen::VectorXd posteriors(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    points.row(static_cast<Eigen::Index>(r)) =
        dist.points().row(static_cast<Eigen::Index>(keep[r]));
    masses[static_cast<Eigen::Index>(r)] = dist.mass(keep[r]) / event_mass;
    posteriors[static_cast<Eigen::Index>(r)] = dist.posterior(keep[r]);
  }
  return FiniteDistribution(std::move(points), std::move(masses),
                            std::move(posteriors));
}

FiniteDistribution mix_finite(
    const std::vector<std::pair<const FiniteDistribution*, double>>& parts) {
  // Union of supports in first-seen order; shared points merge by summed mass
  // and mass-weighted posterior.
  std::unordered_map<std::string, std::size_t> where;
  std::vector<FeatureVector> points;
  std::vector<double> masses;
  std::vector<double> weighted_posterior;  // sum of w*m*posterior
  Eigen::Index d = -1;
  for (const auto& [dist, w] : parts) {
    if (w == 0.0) continue;
    if (d < 0) {
      d = dist->dim();
    } else if (dist->dim() != d) {
      throw std::invalid_argument("mix: component dimension mismatch");
    }
    for (std::size_t i = 0; i < dist->support_size(); ++i) {
      const FeatureVector x = dist->point(i);
      const double m = w * dist->mass(i);
      auto [it, inserted] = where.emplace(point_key(x), points.size());
      if (inserted) {
        points.push_back(x);
        masses.push_back(m);
        weighted_posterior.push_back(m * dist->posterior(i));
      } else {
        masses[it->second] += m;
        weighted_posterior[it->second] += m * dist->posterior(i);
      }
    }
  }
  if (points.empty()) {
    throw std::invalid_argument("mix: all components have zero weight");
  }
  Eigen::MatrixXd pm(static_cast<Eigen::Index>(points.size()), d);
  Eigen::VectorXd mv(static_cast<Eigen::Index>(points.size()));
  Eigen::VectorXd pv(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    pm.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
    mv[static_cast<Eigen::Index>(i)] = masses[i];
    pv[static_cast<Eigen::Index>(i)] =
        masses[i] > 0.0 ? weighted_posterior[i] / masses[i] : 0.0;
  }
  return FiniteDistribution(std::move(pm), std::move(mv), std::move(pv));
}

DistributionSource mix(const MixtureSpec& spec) {
  spec.validate();
  bool all_finite = true;
  for (const auto& [src, w] : spec.components) {
    if (w > 0.0 && src.finite() == nullptr) {
      all_finite = false;
      break;
    }
  }
  if (all_finite) {
    std::vector<std::pair<const FiniteDistribution*, double>> parts;
    for (const auto& [src, w] : spec.components) {
      if (w > 0.0) parts.emplace_back(src.finite(), w);
    }
    return DistributionSource::from_finite(mix_finite(parts));
  }
  // Generative fallback: pick a component by weight, then sample it.
  auto components = spec.components;
  Eigen::Index d = components.front().first.dim();
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& [src, w] : components) {
    acc += w;
    cumulative.push_back(acc);
  }
  cumulative.back() = 1.0;
  return DistributionSource::generative(
      [components, cumulative](Rng& rng) {
        const double u = uniform01(rng);
        std::size_t i = static_cast<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), u) -
            cumulative.begin());
        if (i >= components.size()) i = components.size() - 1;
        return components[i].first.draw(rng);
      },
      d);
}

FiniteDistribution poisoned(const FiniteDistribution& clean, double p,
                            const FiniteDistribution& adversarial) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("poisoned: p must lie in [0,1]");
  }
  return mix_finite({{&clean, 1.0 - p}, {&adversarial, p}});
}

FiniteDistribution adversary_distribution(const FiniteDistribution& conditional,
                                          int label) {
  if (label != 0 && label != 1) {
    throw std::invalid_argument("adversary_distribution: label must be 0 or 1");
  }
  Eigen::VectorXd posteriors = Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(conditional.support_size()),
      static_cast<double>(label));
  return FiniteDistribution(conditional.points(), conditional.masses(),
                            std::move(posteriors));
}

PropertyPredicate complement(const PropertyPredicate& f) {
  return PropertyPredicate([f](const FeatureVector& x) { return !f(x); },
                           "not(" + f.description() + ")");
}

FiniteDistribution label_flipped(const FiniteDistribution& dist) {
  return FiniteDistribution(
      dist.points(), dist.masses(),
      Eigen::VectorXd::Ones(dist.posteriors().size()) - dist.posteriors());
}

Dataset sample(const DistributionSource& src, std::size_t n,
               std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Dataset data(src.dim());
  for (std::size_t i = 0; i < n; ++i) {
    data.add(src.draw(rng));
  }
  return data;
}

DistributionSource property_mixture(const DistributionSource& dplus,
                                    const DistributionSource& dminus,
                                    double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("property_mixture: t must lie in [0,1]");
  }
  MixtureSpec spec;
  spec.components.emplace_back(dplus, t);
  spec.components.emplace_back(dminus, 1.0 - t);
  return mix(spec);
}

}  // namespace propinf
