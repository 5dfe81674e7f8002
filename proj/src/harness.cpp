#include "alice/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <thread>

namespace alice {

// ADL serializers for the enums and specs used inside RunConfig.
namespace obj {
NLOHMANN_JSON_SERIALIZE_ENUM(CycleMode, {{CycleMode::None, "none"},
                                         {CycleMode::ExplicitL1, "explicit-l1"},
                                         {CycleMode::ExplicitL2, "explicit-l2"},
                                         {CycleMode::Adversarial, "adversarial"}})
NLOHMANN_JSON_SERIALIZE_ENUM(CycleSides, {{CycleSides::XOnly, "x-only"},
                                          {CycleSides::ZOnly, "z-only"},
                                          {CycleSides::Both, "both"}})
NLOHMANN_JSON_SERIALIZE_ENUM(MapMode, {{MapMode::None, "none"},
                                       {MapMode::ExplicitL2, "explicit-l2"},
                                       {MapMode::ExplicitCrossEntropy, "explicit-cross-entropy"},
                                       {MapMode::AdversarialConditional, "adversarial-conditional"}})

void to_json(nlohmann::json& j, const ObjectiveSpec& s) {
  j = {{"use_ali", s.use_ali},          {"cycle_mode", s.cycle_mode},
       {"cycle_sides", s.cycle_sides},  {"map_mode", s.map_mode},
       {"lambda_cycle", s.lambda_cycle},{"lambda_map", s.lambda_map},
       {"feature_matching", s.feature_matching},
       {"k", s.k},                      {"non_saturating", s.non_saturating}};
}

void from_json(const nlohmann::json& j, ObjectiveSpec& s) {
  s.use_ali = j.value("use_ali", s.use_ali);
  s.cycle_mode = j.value("cycle_mode", s.cycle_mode);
  s.cycle_sides = j.value("cycle_sides", s.cycle_sides);
  s.map_mode = j.value("map_mode", s.map_mode);
  s.lambda_cycle = j.value("lambda_cycle", s.lambda_cycle);
  s.lambda_map = j.value("lambda_map", s.lambda_map);
  s.feature_matching = j.value("feature_matching", s.feature_matching);
  s.k = j.value("k", s.k);
  s.non_saturating = j.value("non_saturating", s.non_saturating);
}
}  // namespace obj

namespace nets {
NLOHMANN_JSON_SERIALIZE_ENUM(Activation, {{Activation::Tanh, "tanh"}, {Activation::Relu, "relu"}})
}

namespace metrics {
void to_json(nlohmann::json& j, const EvalReport& e) {
  j = {{"icp", e.icp},       {"icp_std", e.icp_std},
       {"mse", e.mse},       {"purity", e.purity},
       {"purity_degenerate", e.purity_degenerate},
       {"component_counts", e.component_counts}};
}
void from_json(const nlohmann::json& j, EvalReport& e) {
  e.icp = j.value("icp", 0.0);
  e.icp_std = j.value("icp_std", 0.0);
  e.mse = j.value("mse", 0.0);
  e.purity = j.value("purity", 0.0);
  e.purity_degenerate = j.value("purity_degenerate", false);
  e.component_counts = j.value("component_counts", std::vector<int>{});
}
}  // namespace metrics

namespace harness {

using nlohmann::json;

namespace {

constexpr int kXDim = 2;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

nets::MlpConfig make_net_config(int input_dim, int noise_dim, const NetSize& size,
                                int output_dim, nets::Activation act, std::uint64_t seed) {
  nets::MlpConfig cfg;
  cfg.input_dim = input_dim;
  cfg.noise_dim = noise_dim;
  cfg.hidden.assign(size.layers, size.neurons);
  cfg.output_dim = output_dim;
  cfg.activation = act;
  cfg.seed = seed;
  return cfg;
}

struct Models {
  nets::StochasticMap decoder, encoder;
  std::optional<nets::Discriminator> joint, cycle_x, cycle_z, cond_x, cond_z;
  obj::ModelSet set;
  ad::Adam gen_opt, disc_opt;
};

std::unique_ptr<Models> build_models(const RunConfig& cfg) {
  auto m = std::make_unique<Models>();
  const int zd = cfg.latent_dim;
  const auto& o = cfg.objective;
  const std::uint64_t s = cfg.seed;

  m->decoder = nets::StochasticMap(
      make_net_config(zd, cfg.noise_dim, cfg.dec_size, kXDim, cfg.gen_activation, splitmix64(s ^ 1)),
      "dec");
  m->encoder = nets::StochasticMap(
      make_net_config(kXDim, cfg.noise_dim, cfg.enc_size, zd, cfg.gen_activation, splitmix64(s ^ 2)),
      "enc");
  m->set.decoder = &m->decoder;
  m->set.encoder = &m->encoder;

  auto disc = [&](int in, const char* name, std::uint64_t salt) {
    return nets::Discriminator(
        make_net_config(in, 0, cfg.disc_size, 1, cfg.disc_activation, splitmix64(s ^ salt)), name);
  };
  if (o.use_ali) {
    m->joint.emplace(disc(kXDim + zd, "d_joint", 3));
    m->set.joint = &*m->joint;
  }
  if (o.cycle_mode == obj::CycleMode::Adversarial) {
    if (o.cycle_sides != obj::CycleSides::ZOnly) {
      m->cycle_x.emplace(disc(2 * kXDim, "d_cycle_x", 4));
      m->set.cycle_x = &*m->cycle_x;
    }
    if (o.cycle_sides != obj::CycleSides::XOnly) {
      m->cycle_z.emplace(disc(2 * zd, "d_cycle_z", 5));
      m->set.cycle_z = &*m->cycle_z;
    }
  }
  if (o.map_mode == obj::MapMode::AdversarialConditional) {
    m->cond_x.emplace(disc(kXDim + zd, "d_cond_x", 6));
    m->set.cond_x = &*m->cond_x;
    m->cond_z.emplace(disc(zd + kXDim, "d_cond_z", 7));
    m->set.cond_z = &*m->cond_z;
  }

  ad::AdamConfig ac{cfg.optim.lr, cfg.optim.beta1, cfg.optim.beta2, cfg.optim.eps};
  m->gen_opt = ad::Adam(m->set.generator_parameters(), ac);
  m->disc_opt = ad::Adam(m->set.discriminator_parameters(), ac);
  return m;
}

/// Shuffled row stream over a fixed dataset, reshuffling on wrap.
class RowStream {
 public:
  RowStream(int n, std::uint64_t seed) : n_(n), rng_(seed), order_(n) {
    for (int i = 0; i < n; ++i) order_[i] = i;
    std::shuffle(order_.begin(), order_.end(), rng_);
  }
  int next() {
    if (pos_ == n_) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      pos_ = 0;
    }
    return order_[pos_++];
  }

 private:
  int n_, pos_ = 0;
  std::mt19937_64 rng_;
  std::vector<int> order_;
};

struct Dataset {
  data::LabeledBatch x_train, x_test;
  data::LabeledBatch z_train, z_test;  // pairing dataset only
  data::PairedSet pairs;
  bool z_from_prior = true;
};

Dataset build_dataset(const RunConfig& cfg) {
  Dataset d;
  std::mt19937_64 rng(splitmix64(cfg.seed ^ 11));
  if (cfg.dataset == "gmm5") {
    const data::GmmSpec spec = data::gmm5();
    d.x_train = data::sample_gmm(spec, cfg.n_train, rng);
    d.x_test = data::sample_gmm(spec, cfg.n_test, rng);
    d.z_from_prior = true;
  } else if (cfg.dataset == "pairing") {
    data::PairingToy toy = data::build_pairing_toy(splitmix64(cfg.seed ^ 12), cfg.n_train, cfg.n_test);
    d.x_train = std::move(toy.x_train);
    d.x_test = std::move(toy.x_test);
    d.z_train = std::move(toy.z_train);
    d.z_test = std::move(toy.z_test);
    d.z_from_prior = false;
    const int want = std::min(cfg.n_anchors, cfg.n_train);
    if (want > 0) {
      d.pairs = std::move(toy.anchors);
      // extra supervision beyond the five pre-specified pairs: sign-flipped
      // training points
      for (int i = d.pairs.n; i < want; ++i) {
        const double px = d.x_train.points[2 * i], py = d.x_train.points[2 * i + 1];
        d.pairs.x.insert(d.pairs.x.end(), {px, py});
        d.pairs.z.insert(d.pairs.z.end(), {-px, -py});
        d.pairs.indices.push_back(i);
      }
      d.pairs.n = want;
    }
  } else {
    throw std::invalid_argument("RunConfig: unknown dataset '" + cfg.dataset + "'");
  }
  return d;
}

struct BatchMaker {
  const RunConfig& cfg;
  const Dataset& data;
  RowStream x_rows, z_rows, pair_rows;
  std::mt19937_64 prior_rng;

  BatchMaker(const RunConfig& c, const Dataset& d)
      : cfg(c),
        data(d),
        x_rows(d.x_train.n, splitmix64(c.seed ^ 21)),
        z_rows(std::max(d.z_train.n, 1), splitmix64(c.seed ^ 22)),
        pair_rows(std::max(d.pairs.n, 1), splitmix64(c.seed ^ 23)),
        prior_rng(splitmix64(c.seed ^ 24)) {}

  obj::TrainBatch next() {
    obj::TrainBatch b;
    b.batch = cfg.batch_size;
    b.x_dim = kXDim;
    b.z_dim = cfg.latent_dim;
    b.x.resize(static_cast<std::size_t>(b.batch) * kXDim);
    for (int i = 0; i < b.batch; ++i) {
      const int r = x_rows.next();
      b.x[2 * i] = data.x_train.points[2 * r];
      b.x[2 * i + 1] = data.x_train.points[2 * r + 1];
    }
    if (data.z_from_prior) {
      b.z = data::sample_prior(b.batch, cfg.latent_dim, prior_rng);
    } else {
      b.z.resize(static_cast<std::size_t>(b.batch) * cfg.latent_dim);
      for (int i = 0; i < b.batch; ++i) {
        const int r = z_rows.next();
        for (int j = 0; j < cfg.latent_dim; ++j)
          b.z[i * cfg.latent_dim + j] = data.z_train.points[r * cfg.latent_dim + j];
      }
    }
    if (cfg.objective.map_mode != obj::MapMode::None && data.pairs.n > 0) {
      const int take = std::min(data.pairs.n, cfg.batch_size);
      b.n_paired = take;
      b.paired_x.resize(static_cast<std::size_t>(take) * kXDim);
      b.paired_z.resize(static_cast<std::size_t>(take) * cfg.latent_dim);
      for (int i = 0; i < take; ++i) {
        const int r = data.pairs.n <= cfg.batch_size ? i : pair_rows.next();
        for (int j = 0; j < kXDim; ++j) b.paired_x[i * kXDim + j] = data.pairs.x[r * kXDim + j];
        for (int j = 0; j < cfg.latent_dim; ++j)
          b.paired_z[i * cfg.latent_dim + j] = data.pairs.z[r * cfg.latent_dim + j];
      }
    }
    return b;
  }
};

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

// fraction of sign-definite test x whose encoding lands nearer the
// opposite-sign z component; components (2,2) and (-2,-2) are the
// unambiguous ones, (0,0) and the mixed-sign pair are skipped
double correspondence_accuracy(nets::StochasticMap& encoder, const data::LabeledBatch& x_test,
                               std::mt19937_64& rng) {
  const std::vector<double> z = encoder.sample_values(x_test.points, x_test.n, rng);
  const int zd = encoder.config().output_dim;
  int total = 0, correct = 0;
  for (int i = 0; i < x_test.n; ++i) {
    int target;  // index into gmm2 means {(1,1), (-1,-1)}
    if (x_test.labels[i] == 1) target = 1;       // (2,2) -> (-1,-1)
    else if (x_test.labels[i] == 4) target = 0;  // (-2,-2) -> (1,1)
    else continue;
    const double zx = z[i * zd], zy = z[i * zd + 1];
    const double d_pos = (zx - 1) * (zx - 1) + (zy - 1) * (zy - 1);
    const double d_neg = (zx + 1) * (zx + 1) + (zy + 1) * (zy + 1);
    const int nearest = d_pos <= d_neg ? 0 : 1;
    ++total;
    correct += nearest == target;
  }
  return total > 0 ? static_cast<double>(correct) / total : 0.0;
}

metrics::EvalReport evaluate(const RunConfig& cfg, Models& m, const Dataset& d,
                             const metrics::ToyClassifier* classifier, std::mt19937_64& rng) {
  metrics::EvalReport report;

  std::vector<double> z_eval;
  if (d.z_from_prior) z_eval = data::sample_prior(cfg.n_test, cfg.latent_dim, rng);
  else z_eval = d.z_test.points;
  const int n_gen = d.z_from_prior ? cfg.n_test : d.z_test.n;
  std::vector<double> samples = m.decoder.sample_values(z_eval, n_gen, rng);
  for (double& v : samples) v = finite_or(v, 1e6);

  if (classifier != nullptr) {
    const auto icp = metrics::icp_score(*classifier, samples, n_gen);
    report.icp = icp.score;
    report.icp_std = icp.std_dev;
    report.component_counts.assign(classifier->num_classes(), 0);
    for (int c : classifier->predict(samples, n_gen)) report.component_counts[c]++;
  }

  report.mse = finite_or(
      metrics::reconstruction_mse(m.encoder, m.decoder, d.x_test.points, d.x_test.n, rng,
                                  cfg.mse_draws),
      1e12);

  std::vector<double> enc = m.encoder.sample_values(d.x_test.points, d.x_test.n, rng);
  bool enc_finite = true;
  for (double v : enc) enc_finite = enc_finite && std::isfinite(v);
  if (enc_finite) {
    const int k = 5;
    auto purity = metrics::cluster_purity(enc, d.x_test.n, cfg.latent_dim, d.x_test.labels, k,
                                          splitmix64(cfg.seed ^ 31));
    report.purity = purity.purity;
    report.purity_degenerate = purity.degenerate;
  } else {
    report.purity = 0.0;
    report.purity_degenerate = true;
  }
  return report;
}

}  // namespace

void RunConfig::validate() const {
  objective.validate();
  if (batch_size < 1) throw std::invalid_argument("RunConfig: batch_size must be >= 1");
  if (epochs < 0) throw std::invalid_argument("RunConfig: epochs must be >= 0");
  if (d_updates < 1 || g_updates < 1)
    throw std::invalid_argument("RunConfig: update frequencies must be >= 1");
  if (n_train < batch_size) throw std::invalid_argument("RunConfig: n_train below batch_size");
  if (latent_dim < 1) throw std::invalid_argument("RunConfig: latent_dim must be >= 1");
  if (dataset != "gmm5" && dataset != "pairing")
    throw std::invalid_argument("RunConfig: unknown dataset '" + dataset + "'");
  if (objective.map_mode != obj::MapMode::None && dataset != "pairing")
    throw std::invalid_argument("RunConfig: map term needs the pairing dataset");
  if (objective.map_mode != obj::MapMode::None && n_anchors < 1)
    throw std::invalid_argument("RunConfig: map term needs n_anchors >= 1");
  if (dae_corruption_std < 0.0)
    throw std::invalid_argument("RunConfig: dae_corruption_std must be >= 0");
}

RunConfig apply_method(RunConfig base, const std::string& method) {
  base.method = method;
  if (method == "alice") {
    base.objective = obj::ObjectiveSpec{};
    base.objective.use_ali = true;
    base.objective.cycle_mode = obj::CycleMode::ExplicitL2;
    base.objective.cycle_sides = obj::CycleSides::XOnly;
    base.objective.lambda_cycle = 1.0;
    base.dae_corruption_std = 0.0;
  } else if (method == "ali") {
    base.objective = obj::ObjectiveSpec{};
    base.objective.use_ali = true;
    base.objective.cycle_mode = obj::CycleMode::None;
    base.dae_corruption_std = 0.0;
  } else if (method == "dae") {
    base.objective = obj::ObjectiveSpec{};
    base.objective.use_ali = false;
    base.objective.cycle_mode = obj::CycleMode::ExplicitL2;
    base.objective.cycle_sides = obj::CycleSides::XOnly;
    base.dae_corruption_std = 0.1;
    base.noise_dim = 0;                           // deterministic autoencoder pair
    base.gen_activation = nets::Activation::Relu; // plain autoencoder nets
    base.d_updates = 1;                           // no discriminators to update
  } else if (method != "custom") {
    throw std::invalid_argument("apply_method: unknown method '" + method + "'");
  }
  return base;
}

RunRecord train(const RunConfig& cfg, const metrics::ToyClassifier* classifier) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  RunRecord rec;
  rec.config_hash = config_hash(cfg);
  rec.method = cfg.method;
  rec.seed = cfg.seed;

  Dataset dataset = build_dataset(cfg);
  auto models = build_models(cfg);
  BatchMaker batches(cfg, dataset);
  std::mt19937_64 rng(splitmix64(cfg.seed ^ 41));

  const bool dae_style = cfg.dae_corruption_std > 0.0;
  const bool needs_d = cfg.objective.use_ali ||
                       cfg.objective.cycle_mode == obj::CycleMode::Adversarial ||
                       cfg.objective.map_mode == obj::MapMode::AdversarialConditional;
  const int iters_per_epoch = std::max(1, cfg.n_train / cfg.batch_size);

  bool alive = true;
  for (int epoch = 0; epoch < cfg.epochs && alive; ++epoch) {
    EpochStats stats;
    stats.epoch = epoch;
    int g_count = 0;
    std::map<std::string, double> d_acc;
    int d_count = 0;

    for (int it = 0; it < iters_per_epoch && alive; ++it) {
      if (needs_d && !dae_style) {
        for (int u = 0; u < cfg.d_updates && alive; ++u) {
          obj::TrainBatch b = batches.next();
          obj::LossReport rep =
              obj::compose_objective(cfg.objective, models->set, b, rng, obj::Phase::Discriminators);
          if (!rep.all_finite() || rep.max_abs_logit > cfg.divergence_logit) {
            alive = false;
            rec.note = "non-finite or exploding discriminator pass";
            break;
          }
          models->disc_opt.step();
          for (const auto& [k, v] : rep.d_objectives) d_acc[k] += v;
          ++d_count;
        }
      }
      for (int u = 0; u < cfg.g_updates && alive; ++u) {
        obj::TrainBatch b = batches.next();
        double g_total;
        if (dae_style) {
          ad::Tape tape;
          ad::Tensor X = tape.input({b.batch, b.x_dim}, b.x);
          ad::Tensor x_hat = nets::dae_forward(tape, models->encoder, models->decoder, X,
                                               cfg.dae_corruption_std, rng);
          ad::Tensor loss = obj::cycle_explicit_loss(tape, X, x_hat, 2);
          g_total = loss.scalar();
          if (!std::isfinite(g_total)) {
            alive = false;
            rec.note = "non-finite reconstruction loss";
            break;
          }
          models->gen_opt.zero_grad();
          tape.backward(loss);
          models->gen_opt.step();
        } else {
          obj::LossReport rep =
              obj::compose_objective(cfg.objective, models->set, b, rng, obj::Phase::Generators);
          g_total = rep.generator_total;
          if (!rep.all_finite() || rep.max_abs_logit > cfg.divergence_logit) {
            alive = false;
            rec.note = "non-finite or exploding generator pass";
            break;
          }
          models->gen_opt.step();
        }
        stats.generator_total += g_total;
        ++g_count;
      }
    }

    if (g_count > 0) stats.generator_total /= g_count;
    if (d_count > 0)
      for (auto& [k, v] : d_acc) stats.d_objectives[k] = v / d_count;
    rec.curve.push_back(std::move(stats));
  }
  rec.status = alive ? RunStatus::Completed : RunStatus::Diverged;

  std::mt19937_64 eval_rng(splitmix64(cfg.seed ^ 42));
  rec.eval = evaluate(cfg, *models, dataset, classifier, eval_rng);
  if (cfg.dataset == "pairing")
    rec.correspondence_accuracy = correspondence_accuracy(models->encoder, dataset.x_test, eval_rng);

  rec.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::size_t GridSpec::size() const {
  return dec_layers.size() * enc_layers.size() * disc_layers.size() * dec_neurons.size() *
         enc_neurons.size() * disc_neurons.size() * d_updates.size() * g_updates.size();
}

std::vector<RunConfig> GridSpec::expand() const {
  std::vector<RunConfig> out;
  out.reserve(size());
  for (int dl : dec_layers)
    for (int el : enc_layers)
      for (int cl : disc_layers)
        for (int dn : dec_neurons)
          for (int en : enc_neurons)
            for (int cn : disc_neurons)
              for (int du : d_updates)
                for (int gu : g_updates) {
                  RunConfig c = base;
                  c.dec_size = {dl, dn};
                  c.enc_size = {el, en};
                  c.disc_size = {cl, cn};
                  c.d_updates = du;
                  c.g_updates = gu;
                  out.push_back(std::move(c));
                }
  return out;
}

namespace {

void run_tasks(std::vector<RunConfig> tasks, std::vector<RunRecord>& records,
               const metrics::ToyClassifier* classifier, int threads) {
  records.resize(tasks.size());
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        records[i] = train(tasks[i], classifier);
      } catch (const std::exception& e) {
        RunRecord failed;
        failed.config_hash = config_hash(tasks[i]);
        failed.method = tasks[i].method;
        failed.seed = tasks[i].seed;
        failed.status = RunStatus::Diverged;
        failed.note = std::string("run failed: ") + e.what();
        records[i] = std::move(failed);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<RunRecord> grid_search(const GridSpec& grid, const std::vector<std::string>& methods,
                                   const metrics::ToyClassifier* classifier, int threads) {
  const std::vector<RunConfig> configs = grid.expand();
  if (configs.empty()) throw std::invalid_argument("grid_search: empty grid");
  std::vector<RunConfig> tasks;
  tasks.reserve(configs.size() * methods.size());
  std::uint64_t idx = 0;
  for (const RunConfig& c : configs)
    for (const std::string& m : methods) {
      RunConfig t = apply_method(c, m);
      t.seed = grid.base.seed + idx++;
      tasks.push_back(std::move(t));
    }
  std::vector<RunRecord> records;
  run_tasks(std::move(tasks), records, classifier, threads);
  return records;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SweepSummary lambda_sweep(const RunConfig& base, const std::vector<double>& lambdas,
                          const std::vector<std::uint64_t>& seeds,
                          const metrics::ToyClassifier* classifier, int threads) {
  if (base.objective.cycle_mode != obj::CycleMode::ExplicitL1 &&
      base.objective.cycle_mode != obj::CycleMode::ExplicitL2)
    throw std::invalid_argument("lambda_sweep: base config must use an explicit cycle term");

  std::vector<RunConfig> tasks;
  for (double lam : lambdas)
    for (std::uint64_t s : seeds) {
      RunConfig c = base;
      c.seed = s;
      if (lam == 0.0) {
        c.objective.cycle_mode = obj::CycleMode::None;  // the term is absent, plain ALI
        c.objective.lambda_cycle = 0.0;
      } else {
        c.objective.lambda_cycle = lam;
      }
      c.method = "lambda=" + std::to_string(lam);
      tasks.push_back(std::move(c));
    }

  std::vector<RunRecord> records;
  run_tasks(std::move(tasks), records, classifier, threads);

  SweepSummary summary;
  double best_icp = -1e300, best_mse = 1e300;
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    SweepEntry entry;
    entry.lambda = lambdas[li];
    std::vector<double> icps, mses;
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      const RunRecord& r = records[li * seeds.size() + si];
      icps.push_back(r.eval.icp);
      mses.push_back(r.eval.mse);
      entry.records.push_back(r);
    }
    entry.median_icp = median(icps);
    entry.median_mse = median(mses);
    if (entry.median_icp > best_icp) {
      best_icp = entry.median_icp;
      summary.best_icp_lambda = entry.lambda;
    }
    if (entry.median_mse < best_mse) {
      best_mse = entry.median_mse;
      summary.best_mse_lambda = entry.lambda;
    }
    summary.entries.push_back(std::move(entry));
  }
  return summary;
}

PairingVariant pairing_variant_from_string(const std::string& name) {
  if (name == "explicit") return PairingVariant::ExplicitBoth;
  if (name == "adversarial-map") return PairingVariant::AdversarialMap;
  if (name == "adversarial-cycle") return PairingVariant::AdversarialCycle;
  if (name == "adversarial") return PairingVariant::AdversarialBoth;
  throw std::invalid_argument("pairing variant must be one of: explicit, adversarial-map, "
                              "adversarial-cycle, adversarial (got '" + name + "')");
}

RunRecord pairing_experiment(int n_anchors, PairingVariant variant, std::uint64_t seed,
                             const metrics::ToyClassifier* classifier, const RunConfig* base) {
  RunConfig cfg = base != nullptr ? *base : RunConfig{};
  cfg.dataset = "pairing";
  cfg.seed = seed;
  cfg.n_anchors = n_anchors;
  cfg.method = "pairing";
  cfg.objective = obj::ObjectiveSpec{};
  cfg.objective.use_ali = true;
  cfg.objective.cycle_sides = obj::CycleSides::Both;
  const bool adv_cycle =
      variant == PairingVariant::AdversarialCycle || variant == PairingVariant::AdversarialBoth;
  const bool adv_map =
      variant == PairingVariant::AdversarialMap || variant == PairingVariant::AdversarialBoth;
  cfg.objective.cycle_mode = adv_cycle ? obj::CycleMode::Adversarial : obj::CycleMode::ExplicitL2;
  cfg.objective.feature_matching = adv_cycle;
  if (n_anchors > 0)
    cfg.objective.map_mode =
        adv_map ? obj::MapMode::AdversarialConditional : obj::MapMode::ExplicitL2;
  else
    cfg.objective.map_mode = obj::MapMode::None;
  return train(cfg, classifier);
}

// --- persistence ---

namespace {
NLOHMANN_JSON_SERIALIZE_ENUM(RunStatus,
                             {{RunStatus::Completed, "completed"}, {RunStatus::Diverged, "diverged"}})
}

void to_json(json& j, const RunConfig& cfg) {
  j = {{"objective", cfg.objective},
       {"dec", {{"layers", cfg.dec_size.layers}, {"neurons", cfg.dec_size.neurons}}},
       {"enc", {{"layers", cfg.enc_size.layers}, {"neurons", cfg.enc_size.neurons}}},
       {"disc", {{"layers", cfg.disc_size.layers}, {"neurons", cfg.disc_size.neurons}}},
       {"gen_activation", cfg.gen_activation},
       {"disc_activation", cfg.disc_activation},
       {"noise_dim", cfg.noise_dim},
       {"latent_dim", cfg.latent_dim},
       {"optim",
        {{"lr", cfg.optim.lr}, {"beta1", cfg.optim.beta1}, {"beta2", cfg.optim.beta2},
         {"eps", cfg.optim.eps}}},
       {"batch_size", cfg.batch_size},
       {"epochs", cfg.epochs},
       {"d_updates", cfg.d_updates},
       {"g_updates", cfg.g_updates},
       {"seed", cfg.seed},
       {"dataset", cfg.dataset},
       {"n_train", cfg.n_train},
       {"n_test", cfg.n_test},
       {"dae_corruption_std", cfg.dae_corruption_std},
       {"divergence_logit", cfg.divergence_logit},
       {"n_anchors", cfg.n_anchors},
       {"mse_draws", cfg.mse_draws},
       {"method", cfg.method}};
}

void from_json(const json& j, RunConfig& cfg) {
  if (j.contains("objective")) j.at("objective").get_to(cfg.objective);
  auto size = [&](const char* key, NetSize& out) {
    if (!j.contains(key)) return;
    out.layers = j.at(key).value("layers", out.layers);
    out.neurons = j.at(key).value("neurons", out.neurons);
  };
  size("dec", cfg.dec_size);
  size("enc", cfg.enc_size);
  size("disc", cfg.disc_size);
  cfg.gen_activation = j.value("gen_activation", cfg.gen_activation);
  cfg.disc_activation = j.value("disc_activation", cfg.disc_activation);
  cfg.noise_dim = j.value("noise_dim", cfg.noise_dim);
  cfg.latent_dim = j.value("latent_dim", cfg.latent_dim);
  if (j.contains("optim")) {
    const json& o = j.at("optim");
    cfg.optim.lr = o.value("lr", cfg.optim.lr);
    cfg.optim.beta1 = o.value("beta1", cfg.optim.beta1);
    cfg.optim.beta2 = o.value("beta2", cfg.optim.beta2);
    cfg.optim.eps = o.value("eps", cfg.optim.eps);
  }
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.d_updates = j.value("d_updates", cfg.d_updates);
  cfg.g_updates = j.value("g_updates", cfg.g_updates);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.dataset = j.value("dataset", cfg.dataset);
  cfg.n_train = j.value("n_train", cfg.n_train);
  cfg.n_test = j.value("n_test", cfg.n_test);
  cfg.dae_corruption_std = j.value("dae_corruption_std", cfg.dae_corruption_std);
  cfg.divergence_logit = j.value("divergence_logit", cfg.divergence_logit);
  cfg.n_anchors = j.value("n_anchors", cfg.n_anchors);
  cfg.mse_draws = j.value("mse_draws", cfg.mse_draws);
  cfg.method = j.value("method", cfg.method);
}

std::string config_hash(const RunConfig& cfg) {
  json j;
  to_json(j, cfg);
  const std::size_t h = std::hash<std::string>{}(j.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016zx", h);
  return buf;
}

void to_json(json& j, const RunRecord& rec) {
  json curve = json::array();
  for (const EpochStats& s : rec.curve)
    curve.push_back({{"epoch", s.epoch},
                     {"generator_total", s.generator_total},
                     {"d_objectives", s.d_objectives}});
  j = {{"config_hash", rec.config_hash},
       {"method", rec.method},
       {"seed", rec.seed},
       {"curve", curve},
       {"eval", rec.eval},
       {"correspondence_accuracy", rec.correspondence_accuracy},
       {"wall_time_sec", rec.wall_time_sec},
       {"status", rec.status},
       {"note", rec.note}};
}

void from_json(const json& j, RunRecord& rec) {
  rec.config_hash = j.value("config_hash", "");
  rec.method = j.value("method", "");
  rec.seed = j.value("seed", std::uint64_t{0});
  rec.curve.clear();
  for (const json& s : j.value("curve", json::array())) {
    EpochStats e;
    e.epoch = s.value("epoch", 0);
    e.generator_total = s.value("generator_total", 0.0);
    e.d_objectives = s.value("d_objectives", std::map<std::string, double>{});
    rec.curve.push_back(std::move(e));
  }
  if (j.contains("eval")) j.at("eval").get_to(rec.eval);
  rec.correspondence_accuracy = j.value("correspondence_accuracy", -1.0);
  rec.wall_time_sec = j.value("wall_time_sec", 0.0);
  rec.status = j.value("status", RunStatus::Completed);
  rec.note = j.value("note", "");
}

void to_json(json& j, const GridSpec& grid) {
  j = {{"dec_layers", grid.dec_layers},   {"enc_layers", grid.enc_layers},
       {"disc_layers", grid.disc_layers}, {"dec_neurons", grid.dec_neurons},
       {"enc_neurons", grid.enc_neurons}, {"disc_neurons", grid.disc_neurons},
       {"d_updates", grid.d_updates},     {"g_updates", grid.g_updates},
       {"base", grid.base}};
}

void from_json(const json& j, GridSpec& grid) {
  grid.dec_layers = j.value("dec_layers", grid.dec_layers);
  grid.enc_layers = j.value("enc_layers", grid.enc_layers);
  grid.disc_layers = j.value("disc_layers", grid.disc_layers);
  grid.dec_neurons = j.value("dec_neurons", grid.dec_neurons);
  grid.enc_neurons = j.value("enc_neurons", grid.enc_neurons);
  grid.disc_neurons = j.value("disc_neurons", grid.disc_neurons);
  grid.d_updates = j.value("d_updates", grid.d_updates);
  grid.g_updates = j.value("g_updates", grid.g_updates);
  if (j.contains("base")) j.at("base").get_to(grid.base);
}

void save_record(const std::string& path, const RunRecord& rec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_record: cannot write " + path);
  json j;
  to_json(j, rec);
  out << j.dump(2);
}

RunRecord load_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_record: cannot read " + path);
  RunRecord rec;
  from_json(json::parse(in), rec);
  return rec;
}

void write_aggregate_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_aggregate_csv: cannot write " + path);
  out << "method,config_hash,seed,icp,icp_std,mse,purity,status,accuracy\n";
  for (const RunRecord& r : records) {
    out << r.method << ',' << r.config_hash << ',' << r.seed << ',' << r.eval.icp << ','
        << r.eval.icp_std << ',' << r.eval.mse << ',' << r.eval.purity << ','
        << (r.status == RunStatus::Completed ? "completed" : "diverged") << ','
        << r.correspondence_accuracy << '\n';
  }
}

std::vector<RunRecord> load_records_from_dir(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".json") paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  std::vector<RunRecord> out;
  for (const std::string& p : paths) out.push_back(load_record(p));
  return out;
}

}  // namespace harness
}  // namespace alice
