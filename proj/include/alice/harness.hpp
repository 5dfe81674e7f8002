#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alice/data.hpp"
#include "alice/metrics.hpp"
#include "alice/nets.hpp"
#include "alice/objectives.hpp"

#include "json.hpp"

namespace alice::harness {

struct OptimConfig {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct NetSize {
  int layers = 2;
  int neurons = 256;
};

struct RunConfig {
  obj::ObjectiveSpec objective;
  NetSize dec_size, enc_size, disc_size;
  nets::Activation gen_activation = nets::Activation::Tanh;
  nets::Activation disc_activation = nets::Activation::Relu;
  int noise_dim = 2;  // generator noise inputs; 0 = deterministic mappings
  int latent_dim = 2;
  OptimConfig optim;
  int batch_size = 100;
  int epochs = 200;
  int d_updates = 1;  // discriminator steps per iteration
  int g_updates = 1;  // generator steps per iteration
  std::uint64_t seed = 0;
  std::string dataset = "gmm5";  // gmm5 | pairing
  int n_train = 2048;
  int n_test = 1024;
  double dae_corruption_std = 0.0;  // > 0 selects denoising-autoencoder training
  double divergence_logit = 1e4;
  int n_anchors = 5;  // pairing dataset: paired rows (0 = unsupervised, may exceed 5)
  int mse_draws = 1;
  std::string method = "custom";

  void validate() const;
};

/// Named presets: "alice" (joint matching + explicit l2 cycle, lambda 1),
/// "ali" (joint matching only), "dae" (denoising autoencoder baseline).
RunConfig apply_method(RunConfig base, const std::string& method);

struct EpochStats {
  int epoch = 0;
  double generator_total = 0.0;
  std::map<std::string, double> d_objectives;
};

enum class RunStatus { Completed, Diverged };

struct RunRecord {
  std::string config_hash;
  std::string method;
  std::uint64_t seed = 0;
  std::vector<EpochStats> curve;
  metrics::EvalReport eval;
  double correspondence_accuracy = -1.0;  // pairing dataset only
  double wall_time_sec = 0.0;
  RunStatus status = RunStatus::Completed;
  std::string note;
};

/// Alternating minimax loop: per iteration, d_updates discriminator ascent
/// steps on each active discriminator, then g_updates generator descent steps
/// on the composed objective, each on a fresh minibatch. A non-finite loss or
/// an absolute logit above the divergence threshold ends the run with
/// Diverged status; the record is still produced.
RunRecord train(const RunConfig& cfg, const metrics::ToyClassifier* classifier);

struct GridSpec {
  std::vector<int> dec_layers{2}, enc_layers{2}, disc_layers{2};
  std::vector<int> dec_neurons{256}, enc_neurons{256}, disc_neurons{256};
  std::vector<int> d_updates{1}, g_updates{1};
  RunConfig base;

  std::size_t size() const;
  std::vector<RunConfig> expand() const;
};

/// Every config x method, in parallel across worker threads. Individual run
/// failures are recorded as diverged entries; the grid never aborts. The
/// result always holds exactly size*methods records, ordered (config, method).
std::vector<RunRecord> grid_search(const GridSpec& grid, const std::vector<std::string>& methods,
                                   const metrics::ToyClassifier* classifier, int threads = 0);

struct SweepEntry {
  double lambda = 0.0;
  std::vector<RunRecord> records;  // one per seed
  double median_icp = 0.0;
  double median_mse = 0.0;
};

struct SweepSummary {
  std::vector<SweepEntry> entries;
  double best_icp_lambda = 0.0;
  double best_mse_lambda = 0.0;
};

/// One run per (lambda, seed); lambda 0 disables the cycle term entirely.
SweepSummary lambda_sweep(const RunConfig& base, const std::vector<double>& lambdas,
                          const std::vector<std::uint64_t>& seeds,
                          const metrics::ToyClassifier* classifier, int threads = 0);

enum class PairingVariant { ExplicitBoth, AdversarialMap, AdversarialCycle, AdversarialBoth };
PairingVariant pairing_variant_from_string(const std::string& name);

/// Trains the composite objective (joint + cycle + map) on the two-domain toy
/// with n_anchors paired rows and reports held-out correspondence accuracy:
/// the fraction of test x from the sign-definite components whose encoding
/// lands nearer the opposite-sign z component than the same-sign one.
RunRecord pairing_experiment(int n_anchors, PairingVariant variant, std::uint64_t seed,
                             const metrics::ToyClassifier* classifier = nullptr,
                             const RunConfig* base = nullptr);

double median(std::vector<double> v);

// --- persistence ---

std::string config_hash(const RunConfig& cfg);

void to_json(nlohmann::json& j, const RunConfig& cfg);
void from_json(const nlohmann::json& j, RunConfig& cfg);
void to_json(nlohmann::json& j, const RunRecord& rec);
void from_json(const nlohmann::json& j, RunRecord& rec);
void to_json(nlohmann::json& j, const GridSpec& grid);
void from_json(const nlohmann::json& j, GridSpec& grid);

void save_record(const std::string& path, const RunRecord& rec);
RunRecord load_record(const std::string& path);

/// Aggregate CSV: method, config_hash, seed, icp, icp_std, mse, purity, status.
void write_aggregate_csv(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> load_records_from_dir(const std::string& dir);

}  // namespace alice::harness
