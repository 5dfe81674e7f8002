#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "alice/infotheory.hpp"
#include "testutil.hpp"

using namespace alice::info;

namespace {

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h;
}

// random conditional table p(x|z), columns normalized
std::vector<double> random_conditional(int nx, int nz, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> p(static_cast<std::size_t>(nx) * nz);
  for (int j = 0; j < nz; ++j) {
    double sum = 0.0;
    for (int i = 0; i < nx; ++i) {
      p[i * nz + j] = u(rng);
      sum += p[i * nz + j];
    }
    for (int i = 0; i < nx; ++i) p[i * nz + j] /= sum;
  }
  return p;
}

}  // namespace

TEST_CASE("joint validation") {
  CHECK_THROWS(DiscreteJoint(2, 2, {0.5, 0.5, 0.5, 0.5}));
  CHECK_THROWS(DiscreteJoint(2, 2, {1.2, -0.2, 0.0, 0.0}));
  CHECK_THROWS(DiscreteJoint(2, 2, {1.0, 0.0}));
  CHECK_NOTHROW(DiscreteJoint(2, 2, {0.25, 0.25, 0.25, 0.25}));
}

TEST_CASE("conditional entropy on known tables") {
  const DiscreteJoint uniform(2, 2, {0.25, 0.25, 0.25, 0.25});
  CHECK(conditional_entropy(uniform, Direction::XGivenZ) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const DiscreteJoint diag = delta_joint(1.0);
  CHECK(conditional_entropy(diag, Direction::XGivenZ) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(conditional_entropy(diag, Direction::ZGivenX) == doctest::Approx(0.0).epsilon(1e-12));

  // direct evaluation of the binary entropy at delta = 0.3
  const DiscreteJoint d03 = delta_joint(0.3);
  const double expected = binary_entropy(0.3);
  CHECK(std::abs(conditional_entropy(d03, Direction::XGivenZ) - expected) < 1e-12);
  CHECK(expected == doctest::Approx(0.6109).epsilon(1e-4));
}

TEST_CASE("mutual information and VI on known tables") {
  const DiscreteJoint indep(2, 2, {0.25, 0.25, 0.25, 0.25});
  CHECK(std::abs(mutual_information(indep)) < 1e-12);

  const DiscreteJoint diag = delta_joint(1.0);
  CHECK(mutual_information(diag) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(std::abs(variation_of_information(diag)) < 1e-12);

  std::mt19937_64 rng(5);
  const DiscreteJoint j45 = random_joint(4, 5, rng);
  const double vi_def = variation_of_information(j45);
  const double vi_identity = joint_entropy(j45) - mutual_information(j45);
  CHECK(std::abs(vi_def - vi_identity) < 1e-12);
}

TEST_CASE("information identities on random joints") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(1, 8);
  for (int t = 0; t < 1000; ++t) {
    const DiscreteJoint j = random_joint(size(rng), size(rng), rng);
    const double vi = variation_of_information(j);
    const double mi = mutual_information(j);
    const double hx = entropy(j.marginal_x());
    const double hz = entropy(j.marginal_z());
    const double hxz = joint_entropy(j);
    CHECK(std::abs(vi - (hxz - mi)) < 1e-12);
    CHECK(std::abs(vi - (hx + hz - 2.0 * mi)) < 1e-12);
  }
}

TEST_CASE("delta family tables") {
  const DiscreteJoint d1 = delta_joint(1.0);
  CHECK(d1.p == std::vector<double>{0.5, 0.0, 0.0, 0.5});
  const DiscreteJoint d0 = delta_joint(0.0);
  CHECK(d0.p == std::vector<double>{0.0, 0.5, 0.5, 0.0});
  const DiscreteJoint dh = delta_joint(0.5);
  for (double v : dh.p) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS(delta_joint(-0.1));
  CHECK_THROWS(delta_joint(1.1));

  for (double delta : {0.0, 0.1, 0.25, 0.5, 0.77, 1.0}) {
    const DiscreteJoint j = delta_joint(delta);
    for (double m : j.marginal_x()) CHECK(m == doctest::Approx(0.5).epsilon(1e-15));
    for (double m : j.marginal_z()) CHECK(m == doctest::Approx(0.5).epsilon(1e-15));
    const double h = binary_entropy(delta);
    CHECK(std::abs(conditional_entropy(j, Direction::XGivenZ) - h) < 1e-12);
    CHECK(std::abs(conditional_entropy(j, Direction::ZGivenX) - h) < 1e-12);
    // symmetric under delta <-> 1 - delta
    const DiscreteJoint jr = delta_joint(1.0 - delta);
    CHECK(std::abs(conditional_entropy(jr, Direction::XGivenZ) -
                   conditional_entropy(j, Direction::XGivenZ)) < 1e-12);
  }
}

TEST_CASE("marginal-matching saddle membership") {
  const std::vector<double> half{0.5, 0.5};
  for (int i = 0; i <= 10; ++i) {
    CHECK(ali_saddle_check(delta_joint(i / 10.0), half, half));
  }
  CHECK_FALSE(ali_saddle_check(DiscreteJoint(2, 2, {0.6, 0.0, 0.0, 0.4}), half, half));

  // conditional entropy over the family is minimized exactly at the endpoints
  double h0 = conditional_entropy(delta_joint(0.0), Direction::XGivenZ);
  double h1 = conditional_entropy(delta_joint(1.0), Direction::XGivenZ);
  CHECK(h0 == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(h1 == doctest::Approx(0.0).epsilon(1e-15));
  for (int i = 1; i < 10; ++i)
    CHECK(conditional_entropy(delta_joint(i / 10.0), Direction::XGivenZ) > 0.0);
}

TEST_CASE("pointwise optimal discriminator") {
  CHECK(pointwise_optimal_discriminator(3.0, 3.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pointwise_optimal_discriminator(1.0, 3.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS(pointwise_optimal_discriminator(0.0, 0.0));
  CHECK_THROWS(pointwise_optimal_discriminator(-1.0, 2.0));

  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int t = 0; t < 100; ++t) {
    const double a = u(rng), b = u(rng);
    const double closed = pointwise_optimal_discriminator(a, b);
    const double numeric = testutil::golden_max(
        [&](long double t_) { return a * std::log(t_) + b * std::log(1.0L - t_); }, 1e-12L,
        1.0L - 1e-12L);
    CHECK(std::abs(closed - numeric) < 1e-9);
  }
}

TEST_CASE("cycle bound and its gap") {
  // matched conditionals: zero gap
  std::mt19937_64 rng(7);
  const DiscreteJoint q = random_joint(3, 4, rng);
  const std::vector<double> qz = q.marginal_z();
  std::vector<double> q_cond(q.p.size());
  for (int i = 0; i < q.nx; ++i)
    for (int j = 0; j < q.nz; ++j) q_cond[i * q.nz + j] = q.at(i, j) / qz[j];
  const CycleBound matched = cycle_bound_gap(q, q_cond);
  CHECK(std::abs(matched.gap) < 1e-12);

  // q deterministic, p uniform: bound ln 2, entropy 0
  const DiscreteJoint diag = delta_joint(1.0);
  const std::vector<double> uniform_cond{0.5, 0.5, 0.5, 0.5};
  const CycleBound r = cycle_bound_gap(diag, uniform_cond);
  CHECK(r.bound == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(r.entropy == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.gap == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  CHECK_THROWS(cycle_bound_gap(diag, std::vector<double>{0.9, 0.5, 0.5, 0.5}));
  CHECK_THROWS(cycle_bound_gap(diag, std::vector<double>{0.5, 0.5}));

  // randomized property: gap >= 0, and equals the expected KL exactly
  std::uniform_int_distribution<int> size(1, 6);
  for (int t = 0; t < 1000; ++t) {
    const int nx = size(rng), nz = size(rng);
    const DiscreteJoint qt = random_joint(nx, nz, rng);
    const std::vector<double> pc = random_conditional(nx, nz, rng);
    const CycleBound b = cycle_bound_gap(qt, pc);
    CHECK(b.gap >= -1e-12);
    // independent evaluation of E_{q(z)} KL(q(x|z) || p(x|z))
    const std::vector<double> mz = qt.marginal_z();
    double expected_kl = 0.0;
    for (int j = 0; j < nz; ++j) {
      if (mz[j] <= 0.0) continue;
      double kl = 0.0;
      for (int i = 0; i < nx; ++i) {
        const double qc = qt.at(i, j) / mz[j];
        if (qc > 0.0) kl += qc * std::log(qc / pc[i * nz + j]);
      }
      expected_kl += mz[j] * kl;
    }
    CHECK(std::abs(b.gap - expected_kl) < 1e-9);
  }
}

TEST_CASE("conditional entropy bounds and determinism endpoint") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const DiscreteJoint j = random_joint(4, 3, rng);
    const double h = conditional_entropy(j, Direction::XGivenZ);
    CHECK(h >= -1e-12);
    CHECK(h <= std::log(4.0) + 1e-12);
  }

  // each column a point mass: H(x|z) = 0, and the matched bound pins both
  // entropies at zero
  const DiscreteJoint det(3, 2, {0.5, 0.0, 0.0, 0.0, 0.0, 0.5});
  CHECK(std::abs(conditional_entropy(det, Direction::XGivenZ)) < 1e-15);
  std::vector<double> det_cond{1.0, 0.0, 0.0, 0.0, 0.0, 1.0};
  const CycleBound b = cycle_bound_gap(det, det_cond);
  CHECK(std::abs(b.gap) < 1e-15);
  CHECK(std::abs(b.bound) < 1e-15);
  CHECK(std::abs(b.entropy) < 1e-15);
}
