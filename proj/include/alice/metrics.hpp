#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "alice/data.hpp"
#include "alice/nets.hpp"

namespace alice::metrics {

/// Offline 3-layer classifier mapping 2-D points to component probabilities.
/// Trained once on labeled mixture data; evaluations reject it unless test
/// accuracy reached 99.5%.
class ToyClassifier {
 public:
  ToyClassifier() = default;

  static ToyClassifier fit(const data::LabeledBatch& train, const data::LabeledBatch& test,
                           int num_classes, std::uint64_t seed = 7);

  /// (n, K) softmax probabilities for (n, 2) points.
  std::vector<double> predict_proba(const std::vector<double>& points, int n) const;
  std::vector<int> predict(const std::vector<double>& points, int n) const;

  int num_classes() const { return num_classes_; }
  double test_accuracy() const { return test_accuracy_; }
  double final_train_loss() const { return final_train_loss_; }
  bool validated() const { return test_accuracy_ >= 0.995; }

  void save(const std::string& path) const;
  static ToyClassifier load(const std::string& path);

 private:
  nets::Mlp net_;
  int num_classes_ = 0;
  double test_accuracy_ = 0.0;
  double final_train_loss_ = 0.0;
};

enum class IcpForm {
  /// exp(E_x KL(p(y|x) || p(y))): bounded by the class count, 1 when all
  /// predictions agree. This is the form consistent with the oracle value.
  Standard,
  /// exp(E_x KL(p(y) || p(y|x))): the swapped direction, kept for comparison.
  Swapped,
};

struct IcpResult {
  double score = 0.0;
  double std_dev = 0.0;  // over bootstrap resamples
};

/// Classifier-based sample quality/diversity score for (n, 2) samples.
/// Throws if the classifier is not validated.
IcpResult icp_score(const ToyClassifier& clf, const std::vector<double>& samples, int n,
                    IcpForm form = IcpForm::Standard, int bootstrap_reps = 50,
                    std::uint64_t bootstrap_seed = 17);

/// ICP from a precomputed (n, K) prediction table.
IcpResult icp_from_probs(const std::vector<double>& probs, int n, int num_classes,
                         IcpForm form = IcpForm::Standard, int bootstrap_reps = 50,
                         std::uint64_t bootstrap_seed = 17);

/// Mean over the test set of ||x - x_hat||^2 along the reconstruction cycle
/// x -> encoder -> decoder -> x_hat, averaged over `draws` noise draws.
double reconstruction_mse(nets::StochasticMap& encoder, nets::StochasticMap& decoder,
                          const std::vector<double>& x, int n, std::mt19937_64& rng,
                          int draws = 1);

struct PurityResult {
  double purity = 0.0;
  bool degenerate = false;  // all encodings (numerically) identical
  std::vector<int> cluster_sizes;
};

/// K-means the encodings (n, dim) and scores the fraction of points whose
/// cluster's majority label matches their own.
PurityResult cluster_purity(const std::vector<double>& encodings, int n, int dim,
                            const std::vector<int>& labels, int k, std::uint64_t seed = 23);

struct EvalReport {
  double icp = 0.0;
  double icp_std = 0.0;
  double mse = 0.0;
  double purity = 0.0;
  bool purity_degenerate = false;
  std::vector<int> component_counts;  // generated-sample predictions per class
};

}  // namespace alice::metrics
