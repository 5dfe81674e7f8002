#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace alice::data {

struct GmmSpec {
  std::vector<std::array<double, 2>> means;
  double std_dev = 0.2;
  std::vector<double> weights;  // must sum to 1

  void validate() const;
  static GmmSpec uniform(std::vector<std::array<double, 2>> means, double std_dev);
};

/// The 5-component benchmark mixture: means (0,0), (2,2), (-2,2), (2,-2),
/// (-2,-2), std 0.2, uniform weights.
GmmSpec gmm5();
/// Two symmetric components at (1,1) and (-1,-1), std 0.2; the z-domain of the
/// pairing toy.
GmmSpec gmm2();

struct LabeledBatch {
  int n = 0;
  std::vector<double> points;  // (n, 2) row-major
  std::vector<int> labels;     // component index per point
};

LabeledBatch sample_gmm(const GmmSpec& spec, int n, std::mt19937_64& rng);

/// n x dim standard-normal draws, row-major.
std::vector<double> sample_prior(int n, int dim, std::mt19937_64& rng);

struct PairedSet {
  int n = 0;
  std::vector<double> x;     // (n, 2), aligned with z
  std::vector<double> z;     // (n, 2)
  std::vector<int> indices;  // positions of the supervised rows in the full dataset
};

/// Cross-domain toy: x ~ 5-component GMM, z ~ 2-component GMM, with five
/// pre-specified anchor pairs occupying the first five dataset rows. Each
/// anchor x-point is paired with the z-point of opposite sign:
/// (0,0), (1,1), (-1,-1), (1,-1), (-1,1) in x map to their negations in z.
struct PairingToy {
  LabeledBatch x_train, x_test;
  LabeledBatch z_train, z_test;
  PairedSet anchors;
};

PairingToy build_pairing_toy(std::uint64_t seed, int n_train = 2048, int n_test = 1024);

/// Encodes both endpoints and returns m latent points spaced evenly on the
/// segment between the two codes, endpoints included; (m, latent_dim)
/// row-major. encode maps one (1,2) point to its latent code.
using EncodeFn = std::function<std::vector<double>(const std::array<double, 2>&)>;
std::vector<double> interpolation_path(const EncodeFn& encode, const std::array<double, 2>& x_first,
                                       const std::array<double, 2>& x_last, int m);

}  // namespace alice::data
