#include "alice/infotheory.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace alice::info {

namespace {

double xlogx(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

void validate_table(int nx, int nz, const std::vector<double>& p) {
  if (nx < 1 || nz < 1) {
    throw std::invalid_argument("DiscreteJoint: support sizes must be >= 1, got " +
                                std::to_string(nx) + "x" + std::to_string(nz));
  }
  if (p.size() != static_cast<std::size_t>(nx) * nz) {
    throw std::invalid_argument("DiscreteJoint: table has " + std::to_string(p.size()) +
                                " entries, expected " + std::to_string(nx * nz));
  }
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::invalid_argument("DiscreteJoint: negative or NaN entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("DiscreteJoint: entries sum to " + std::to_string(sum) +
                                ", expected 1");
  }
}

}  // namespace

DiscreteJoint::DiscreteJoint(int nx_, int nz_, std::vector<double> table)
    : nx(nx_), nz(nz_), p(std::move(table)) {
  validate_table(nx, nz, p);
}

std::vector<double> DiscreteJoint::marginal_x() const {
  std::vector<double> m(nx, 0.0);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nz; ++j) m[i] += at(i, j);
  return m;
}

std::vector<double> DiscreteJoint::marginal_z() const {
  std::vector<double> m(nz, 0.0);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nz; ++j) m[j] += at(i, j);
  return m;
}

DiscreteJoint random_joint(int nx, int nz, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> t(static_cast<std::size_t>(nx) * nz);
  double sum = 0.0;
  for (double& v : t) {
    v = u(rng);
    sum += v;
  }
  for (double& v : t) v /= sum;
  // renormalize exactly enough for the 1e-12 invariant
  double s2 = std::accumulate(t.begin(), t.end(), 0.0);
  for (double& v : t) v /= s2;
  return DiscreteJoint(nx, nz, std::move(t));
}

double conditional_entropy(const DiscreteJoint& j, Direction dir) {
  // H(x|z) = -sum_{x,z} p(x,z) log [p(x,z)/p(z)]
  const std::vector<double> m = dir == Direction::XGivenZ ? j.marginal_z() : j.marginal_x();
  double h = 0.0;
  for (int i = 0; i < j.nx; ++i) {
    for (int k = 0; k < j.nz; ++k) {
      const double pij = j.at(i, k);
      if (pij <= 0.0) continue;
      const double denom = dir == Direction::XGivenZ ? m[k] : m[i];
      h -= pij * std::log(pij / denom);
    }
  }
  return h;
}

double entropy(const std::vector<double>& dist) {
  double h = 0.0;
  for (double v : dist) h -= xlogx(v);
  return h;
}

double joint_entropy(const DiscreteJoint& j) { return entropy(j.p); }

double mutual_information(const DiscreteJoint& j) {
  const std::vector<double> mx = j.marginal_x();
  const std::vector<double> mz = j.marginal_z();
  double mi = 0.0;
  for (int i = 0; i < j.nx; ++i) {
    for (int k = 0; k < j.nz; ++k) {
      const double pij = j.at(i, k);
      if (pij <= 0.0) continue;
      mi += pij * std::log(pij / (mx[i] * mz[k]));
    }
  }
  return mi;
}

double variation_of_information(const DiscreteJoint& j) {
  return conditional_entropy(j, Direction::XGivenZ) +
         conditional_entropy(j, Direction::ZGivenX);
}

DiscreteJoint delta_joint(double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta_joint: delta must lie in [0,1], got " +
                                std::to_string(delta));
  }
  const double d = delta / 2.0;
  const double o = (1.0 - delta) / 2.0;
  return DiscreteJoint(2, 2, {d, o, o, d});
}

bool ali_saddle_check(const DiscreteJoint& j, const std::vector<double>& qx,
                      const std::vector<double>& pz, double tol) {
  if (qx.size() != static_cast<std::size_t>(j.nx) ||
      pz.size() != static_cast<std::size_t>(j.nz))
    return false;
  const std::vector<double> mx = j.marginal_x();
  const std::vector<double> mz = j.marginal_z();
  for (int i = 0; i < j.nx; ++i)
    if (std::abs(mx[i] - qx[i]) > tol) return false;
  for (int k = 0; k < j.nz; ++k)
    if (std::abs(mz[k] - pz[k]) > tol) return false;
  return true;
}

double pointwise_optimal_discriminator(double a, double b) {
  if (a < 0.0 || b < 0.0 || a + b <= 0.0) {
    throw std::invalid_argument("pointwise_optimal_discriminator: need a,b >= 0 and a+b > 0 (a=" +
                                std::to_string(a) + ", b=" + std::to_string(b) + ")");
  }
  return a / (a + b);
}

CycleBound cycle_bound_gap(const DiscreteJoint& q, const std::vector<double>& p_cond) {
  if (p_cond.size() != q.p.size()) {
    throw std::invalid_argument("cycle_bound_gap: conditional table has " +
                                std::to_string(p_cond.size()) + " entries, expected " +
                                std::to_string(q.p.size()));
  }
  for (int k = 0; k < q.nz; ++k) {
    double col = 0.0;
    for (int i = 0; i < q.nx; ++i) {
      const double v = p_cond[i * static_cast<std::size_t>(q.nz) + k];
      if (!(v >= 0.0)) throw std::invalid_argument("cycle_bound_gap: negative conditional entry");
      col += v;
    }
    if (std::abs(col - 1.0) > 1e-9) {
      throw std::invalid_argument("cycle_bound_gap: column " + std::to_string(k) +
                                  " of p(x|z) sums to " + std::to_string(col));
    }
  }
  CycleBound r{};
  r.entropy = conditional_entropy(q, Direction::XGivenZ);
  double bound = 0.0;
  for (int i = 0; i < q.nx; ++i) {
    for (int k = 0; k < q.nz; ++k) {
      const double qik = q.at(i, k);
      if (qik <= 0.0) continue;
      const double pik = p_cond[i * static_cast<std::size_t>(q.nz) + k];
      bound -= qik * std::log(pik);  // q > 0 with p == 0 gives +inf, which is correct
    }
  }
  r.bound = bound;
  r.gap = r.bound - r.entropy;
  return r;
}

}  // namespace alice::info
