#include "alice/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alice/checkpoint.hpp"

namespace alice::metrics {

namespace {

std::vector<double> softmax_rows(const std::vector<double>& logits, int n, int k) {
  std::vector<double> out(logits.size());
  for (int r = 0; r < n; ++r) {
    const double* row = logits.data() + static_cast<std::size_t>(r) * k;
    double* orow = out.data() + static_cast<std::size_t>(r) * k;
    double mx = row[0];
    for (int j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      orow[j] = std::exp(row[j] - mx);
      sum += orow[j];
    }
    for (int j = 0; j < k; ++j) orow[j] /= sum;
  }
  return out;
}

constexpr std::uint64_t kClassifierNameTag = 0x9e3779b9;

}  // namespace

ToyClassifier ToyClassifier::fit(const data::LabeledBatch& train, const data::LabeledBatch& test,
                                 int num_classes, std::uint64_t seed) {
  ToyClassifier clf;
  clf.num_classes_ = num_classes;
  nets::MlpConfig cfg;
  cfg.input_dim = 2;
  cfg.noise_dim = 0;
  cfg.hidden = {64, 64};
  cfg.output_dim = num_classes;
  cfg.activation = nets::Activation::Relu;
  cfg.seed = seed ^ kClassifierNameTag;
  clf.net_ = nets::Mlp(cfg, "classifier");

  ad::Adam opt(clf.net_.parameters(), {.lr = 1e-3, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8});
  std::mt19937_64 rng(seed);
  const int batch = 256;
  std::vector<int> order(train.n);
  for (int i = 0; i < train.n; ++i) order[i] = i;

  double loss = 1e300;
  for (int epoch = 0; epoch < 400 && loss > 1e-3; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start + batch <= train.n; start += batch) {
      std::vector<double> xb(static_cast<std::size_t>(batch) * 2);
      std::vector<int> yb(batch);
      for (int i = 0; i < batch; ++i) {
        const int idx = order[start + i];
        xb[2 * i] = train.points[2 * idx];
        xb[2 * i + 1] = train.points[2 * idx + 1];
        yb[i] = train.labels[idx];
      }
      ad::Tape tape;
      ad::Tensor logits = clf.net_.forward(tape, tape.input({batch, 2}, xb));
      ad::Tensor xent = tape.cross_entropy_with_logits(logits, yb);
      opt.zero_grad();
      tape.backward(xent);
      opt.step();
    }
    // full-set training loss, the <1e-3 stopping criterion
    ad::Tape tape;
    ad::Tensor logits = clf.net_.forward(tape, tape.input({train.n, 2}, train.points));
    loss = tape.cross_entropy_with_logits(logits, train.labels).scalar();
  }
  clf.final_train_loss_ = loss;

  const std::vector<int> pred = clf.predict(test.points, test.n);
  int correct = 0;
  for (int i = 0; i < test.n; ++i) correct += pred[i] == test.labels[i];
  clf.test_accuracy_ = static_cast<double>(correct) / test.n;
  return clf;
}

std::vector<double> ToyClassifier::predict_proba(const std::vector<double>& points, int n) const {
  return softmax_rows(net_.eval(points, n), n, num_classes_);
}

std::vector<int> ToyClassifier::predict(const std::vector<double>& points, int n) const {
  const std::vector<double> probs = predict_proba(points, n);
  std::vector<int> out(n);
  for (int r = 0; r < n; ++r) {
    const double* row = probs.data() + static_cast<std::size_t>(r) * num_classes_;
    out[r] = static_cast<int>(std::max_element(row, row + num_classes_) - row);
  }
  return out;
}

void ToyClassifier::save(const std::string& path) const {
  checkpoint::save(path, net_.parameters(),
                   {{"num_classes", static_cast<double>(num_classes_)},
                    {"test_accuracy", test_accuracy_},
                    {"final_train_loss", final_train_loss_}});
}

ToyClassifier ToyClassifier::load(const std::string& path) {
  ToyClassifier clf;
  // shape metadata comes from the fixed architecture; values from the file
  nets::MlpConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden = {64, 64};
  cfg.output_dim = 5;
  cfg.activation = nets::Activation::Relu;
  clf.net_ = nets::Mlp(cfg, "classifier");
  auto meta = checkpoint::load(path, clf.net_.parameters());
  clf.num_classes_ = static_cast<int>(meta.at("num_classes"));
  clf.test_accuracy_ = meta.at("test_accuracy");
  if (meta.count("final_train_loss")) clf.final_train_loss_ = meta.at("final_train_loss");
  return clf;
}

IcpResult icp_from_probs(const std::vector<double>& probs, int n, int num_classes, IcpForm form,
                         int bootstrap_reps, std::uint64_t bootstrap_seed) {
  if (n < 1) throw std::invalid_argument("icp_from_probs: empty sample set");
  const int k = num_classes;

  auto score_subset = [&](const std::vector<int>& idx) {
    std::vector<double> marginal(k, 0.0);
    for (int i : idx) {
      const double* row = probs.data() + static_cast<std::size_t>(i) * k;
      for (int j = 0; j < k; ++j) marginal[j] += row[j];
    }
    for (double& v : marginal) v /= static_cast<double>(idx.size());
    double mean_kl = 0.0;
    for (int i : idx) {
      const double* row = probs.data() + static_cast<std::size_t>(i) * k;
      double kl = 0.0;
      for (int j = 0; j < k; ++j) {
        if (form == IcpForm::Standard) {
          if (row[j] > 0.0) kl += row[j] * std::log(row[j] / marginal[j]);
        } else {
          if (marginal[j] > 0.0) kl += marginal[j] * std::log(marginal[j] / row[j]);
        }
      }
      mean_kl += kl;
    }
    return std::exp(mean_kl / static_cast<double>(idx.size()));
  };

  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  IcpResult r;
  r.score = score_subset(all);

  if (bootstrap_reps > 1) {
    std::mt19937_64 rng(bootstrap_seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<double> scores(bootstrap_reps);
    std::vector<int> idx(n);
    for (int b = 0; b < bootstrap_reps; ++b) {
      for (int i = 0; i < n; ++i) idx[i] = pick(rng);
      scores[b] = score_subset(idx);
    }
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= bootstrap_reps;
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    r.std_dev = std::sqrt(var / (bootstrap_reps - 1));
  }
  return r;
}

IcpResult icp_score(const ToyClassifier& clf, const std::vector<double>& samples, int n,
                    IcpForm form, int bootstrap_reps, std::uint64_t bootstrap_seed) {
  if (!clf.validated())
    throw std::invalid_argument("icp_score: classifier test accuracy " +
                                std::to_string(clf.test_accuracy()) +
                                " is below the 0.995 validation threshold");
  return icp_from_probs(clf.predict_proba(samples, n), n, clf.num_classes(), form,
                        bootstrap_reps, bootstrap_seed);
}

double reconstruction_mse(nets::StochasticMap& encoder, nets::StochasticMap& decoder,
                          const std::vector<double>& x, int n, std::mt19937_64& rng, int draws) {
  if (draws < 1) throw std::invalid_argument("reconstruction_mse: draws must be >= 1");
  double total = 0.0;
  for (int d = 0; d < draws; ++d) {
    const std::vector<double> code = encoder.sample_values(x, n, rng);
    const std::vector<double> rec = decoder.sample_values(code, n, rng);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double diff = x[i] - rec[i];
      sum += diff * diff;
    }
    total += sum / static_cast<double>(n);
  }
  return total / static_cast<double>(draws);
}

PurityResult cluster_purity(const std::vector<double>& encodings, int n, int dim,
                            const std::vector<int>& labels, int k, std::uint64_t seed) {
  if (labels.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("cluster_purity: labels do not match points");

  PurityResult res;
  // degenerate encodings: spread below numerical noise
  double lo = 1e300, hi = -1e300;
  for (double v : encodings) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi - lo > 1e-9)) {
    res.degenerate = true;
    res.purity = 0.0;
    return res;
  }

  std::mt19937_64 rng(seed);
  std::vector<int> best_assign(n, 0);
  double best_inertia = 1e300;

  for (int restart = 0; restart < 5; ++restart) {
    // k-means++ seeding
    std::vector<double> centers(static_cast<std::size_t>(k) * dim);
    std::uniform_int_distribution<int> pick(0, n - 1);
    int first = pick(rng);
    std::copy_n(encodings.begin() + static_cast<std::size_t>(first) * dim, dim, centers.begin());
    std::vector<double> d2(n, 1e300);
    for (int c = 1; c < k; ++c) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        double dd = 0.0;
        for (int j = 0; j < dim; ++j) {
          const double diff = encodings[i * dim + j] - centers[(c - 1) * dim + j];
          dd += diff * diff;
        }
        d2[i] = std::min(d2[i], dd);
        sum += d2[i];
      }
      std::uniform_real_distribution<double> u(0.0, sum);
      double target = u(rng), acc = 0.0;
      int chosen = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
      std::copy_n(encodings.begin() + static_cast<std::size_t>(chosen) * dim, dim,
                  centers.begin() + static_cast<std::size_t>(c) * dim);
    }

    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        int best = 0;
        double bd = 1e300;
        for (int c = 0; c < k; ++c) {
          double dd = 0.0;
          for (int j = 0; j < dim; ++j) {
            const double diff = encodings[i * dim + j] - centers[c * dim + j];
            dd += diff * diff;
          }
          if (dd < bd) {
            bd = dd;
            best = c;
          }
        }
        if (assign[i] != best) {
          assign[i] = best;
          changed = true;
        }
      }
      std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
      std::vector<int> counts(k, 0);
      for (int i = 0; i < n; ++i) {
        counts[assign[i]]++;
        for (int j = 0; j < dim; ++j) sums[assign[i] * dim + j] += encodings[i * dim + j];
      }
      for (int c = 0; c < k; ++c)
        if (counts[c] > 0)
          for (int j = 0; j < dim; ++j) centers[c * dim + j] = sums[c * dim + j] / counts[c];
      if (!changed) break;
    }

    double inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < dim; ++j) {
        const double diff = encodings[i * dim + j] - centers[assign[i] * dim + j];
        inertia += diff * diff;
      }
    }
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_assign = assign;
    }
  }

  // majority label per cluster
  int num_labels = 0;
  for (int l : labels) num_labels = std::max(num_labels, l + 1);
  std::vector<std::vector<int>> tally(k, std::vector<int>(num_labels, 0));
  res.cluster_sizes.assign(k, 0);
  for (int i = 0; i < n; ++i) {
    tally[best_assign[i]][labels[i]]++;
    res.cluster_sizes[best_assign[i]]++;
  }
  std::vector<int> majority(k, 0);
  for (int c = 0; c < k; ++c)
    majority[c] =
        static_cast<int>(std::max_element(tally[c].begin(), tally[c].end()) - tally[c].begin());
  int matched = 0;
  for (int i = 0; i < n; ++i) matched += labels[i] == majority[best_assign[i]];
  res.purity = static_cast<double>(matched) / n;
  return res;
}

}  // namespace alice::metrics
