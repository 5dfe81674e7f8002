#pragma once

#include <random>
#include <vector>

namespace alice::info {

/// Finite-support joint probability table over (x, z).
/// Entries are nonnegative and sum to 1 within 1e-12; all entropies are in nats.
struct DiscreteJoint {
  int nx = 0;
  int nz = 0;
  std::vector<double> p;  // row-major, p[i * nz + j] = P(x = i, z = j)

  DiscreteJoint() = default;
  DiscreteJoint(int nx, int nz, std::vector<double> table);

  double at(int i, int j) const { return p[i * static_cast<std::size_t>(nz) + j]; }
  std::vector<double> marginal_x() const;
  std::vector<double> marginal_z() const;
};

/// Uniformly random joint on an nx-by-nz support (entries ~ U(0,1), normalized).
DiscreteJoint random_joint(int nx, int nz, std::mt19937_64& rng);

enum class Direction { XGivenZ, ZGivenX };

/// H(x|z) or H(z|x) under the joint, with 0 log 0 := 0.
double conditional_entropy(const DiscreteJoint& j, Direction dir);

double entropy(const std::vector<double>& dist);
double joint_entropy(const DiscreteJoint& j);
double mutual_information(const DiscreteJoint& j);

/// VI(x,z) = H(x|z) + H(z|x).
double variation_of_information(const DiscreteJoint& j);

/// The one-parameter family of 2x2 joints with uniform marginals:
///   [[d/2, (1-d)/2], [(1-d)/2, d/2]]
/// Every member matches the same marginals; conditional entropy varies with d
/// and vanishes only at the deterministic endpoints d in {0, 1}.
DiscreteJoint delta_joint(double delta);

/// True iff the joint's marginals equal (qx, pz) within tol, i.e. the joint is
/// an admissible solution of the marginal-matching (adversarial) objective.
bool ali_saddle_check(const DiscreteJoint& j, const std::vector<double>& qx,
                      const std::vector<double>& pz, double tol = 1e-12);

/// argmax_t of a*log(t) + b*log(1-t) on (0,1), which is a / (a + b).
/// Requires a, b >= 0 and a + b > 0.
double pointwise_optimal_discriminator(double a, double b);

struct CycleBound {
  double bound;    // -sum_q q(x,z) log p(x|z)
  double entropy;  // H_q(x|z)
  double gap;      // bound - entropy = E_{q(z)} KL(q(x|z) || p(x|z)) >= 0
};

/// Evaluates the cross-entropy upper bound on H_q(x|z) induced by a model
/// conditional p(x|z). p_cond is nx-by-nz row-major; each column must be a
/// valid distribution over x.
CycleBound cycle_bound_gap(const DiscreteJoint& q, const std::vector<double>& p_cond);

}  // namespace alice::info
