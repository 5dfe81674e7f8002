#include "alice/data.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace alice::data {

void GmmSpec::validate() const {
  if (means.empty()) throw std::invalid_argument("GmmSpec: no components");
  if (!(std_dev > 0.0)) throw std::invalid_argument("GmmSpec: std_dev must be > 0");
  if (weights.size() != means.size())
    throw std::invalid_argument("GmmSpec: " + std::to_string(weights.size()) + " weights for " +
                                std::to_string(means.size()) + " components");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("GmmSpec: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("GmmSpec: weights must sum to 1");
}

GmmSpec GmmSpec::uniform(std::vector<std::array<double, 2>> means, double std_dev) {
  GmmSpec s;
  s.std_dev = std_dev;
  s.weights.assign(means.size(), 1.0 / static_cast<double>(means.size()));
  s.means = std::move(means);
  return s;
}

GmmSpec gmm5() {
  return GmmSpec::uniform({{0.0, 0.0}, {2.0, 2.0}, {-2.0, 2.0}, {2.0, -2.0}, {-2.0, -2.0}}, 0.2);
}

GmmSpec gmm2() { return GmmSpec::uniform({{1.0, 1.0}, {-1.0, -1.0}}, 0.2); }

LabeledBatch sample_gmm(const GmmSpec& spec, int n, std::mt19937_64& rng) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("sample_gmm: n must be >= 1");
  std::discrete_distribution<int> comp(spec.weights.begin(), spec.weights.end());
  std::normal_distribution<double> n01(0.0, 1.0);
  LabeledBatch out;
  out.n = n;
  out.points.resize(static_cast<std::size_t>(n) * 2);
  out.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const int c = comp(rng);
    out.labels[i] = c;
    out.points[2 * i] = spec.means[c][0] + spec.std_dev * n01(rng);
    out.points[2 * i + 1] = spec.means[c][1] + spec.std_dev * n01(rng);
  }
  return out;
}

std::vector<double> sample_prior(int n, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(n) * dim);
  for (double& v : out) v = n01(rng);
  return out;
}

namespace {

int nearest_component(const GmmSpec& spec, double x, double y) {
  int best = 0;
  double best_d = 1e300;
  for (std::size_t c = 0; c < spec.means.size(); ++c) {
    const double dx = x - spec.means[c][0], dy = y - spec.means[c][1];
    const double d = dx * dx + dy * dy;
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

PairingToy build_pairing_toy(std::uint64_t seed, int n_train, int n_test) {
  constexpr std::array<std::array<double, 2>, 5> kAnchors = {
      {{0.0, 0.0}, {1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}, {-1.0, 1.0}}};
  const int n_anchor = static_cast<int>(kAnchors.size());
  if (n_train <= n_anchor) throw std::invalid_argument("build_pairing_toy: n_train too small");

  const GmmSpec sx = gmm5();
  const GmmSpec sz = gmm2();
  std::mt19937_64 rng(seed);

  PairingToy toy;
  LabeledBatch x_rest = sample_gmm(sx, n_train - n_anchor, rng);
  LabeledBatch z_rest = sample_gmm(sz, n_train - n_anchor, rng);
  toy.x_test = sample_gmm(sx, n_test, rng);
  toy.z_test = sample_gmm(sz, n_test, rng);

  // anchors occupy the first rows of both training sets
  toy.x_train.n = toy.z_train.n = n_train;
  toy.anchors.n = n_anchor;
  for (int i = 0; i < n_anchor; ++i) {
    const auto& a = kAnchors[i];
    toy.x_train.points.insert(toy.x_train.points.end(), {a[0], a[1]});
    toy.x_train.labels.push_back(nearest_component(sx, a[0], a[1]));
    toy.z_train.points.insert(toy.z_train.points.end(), {-a[0], -a[1]});
    toy.z_train.labels.push_back(nearest_component(sz, -a[0], -a[1]));
    toy.anchors.x.insert(toy.anchors.x.end(), {a[0], a[1]});
    toy.anchors.z.insert(toy.anchors.z.end(), {-a[0], -a[1]});
    toy.anchors.indices.push_back(i);
  }
  toy.x_train.points.insert(toy.x_train.points.end(), x_rest.points.begin(), x_rest.points.end());
  toy.x_train.labels.insert(toy.x_train.labels.end(), x_rest.labels.begin(), x_rest.labels.end());
  toy.z_train.points.insert(toy.z_train.points.end(), z_rest.points.begin(), z_rest.points.end());
  toy.z_train.labels.insert(toy.z_train.labels.end(), z_rest.labels.begin(), z_rest.labels.end());
  return toy;
}

std::vector<double> interpolation_path(const EncodeFn& encode, const std::array<double, 2>& x_first,
                                       const std::array<double, 2>& x_last, int m) {
  if (m < 2) throw std::invalid_argument("interpolation_path: m must be >= 2");
  const std::vector<double> z_first = encode(x_first);
  const std::vector<double> z_last = encode(x_last);
  if (z_first.size() != z_last.size() || z_first.empty())
    throw std::invalid_argument("interpolation_path: encoder returned inconsistent codes");
  const std::size_t dim = z_first.size();
  std::vector<double> path(static_cast<std::size_t>(m) * dim);
  for (int i = 0; i < m; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(m - 1);
    for (std::size_t d = 0; d < dim; ++d)
      path[i * dim + d] = (1.0 - t) * z_first[d] + t * z_last[d];
  }
  return path;
}

}  // namespace alice::data
