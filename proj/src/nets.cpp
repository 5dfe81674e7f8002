#include "alice/nets.hpp"

#include <cmath>
#include <stdexcept>

namespace alice::nets {

void MlpConfig::validate() const {
  if (hidden.empty()) throw std::invalid_argument("MlpConfig: hidden widths must be non-empty");
  if (input_dim < 1 && noise_dim < 1)
    throw std::invalid_argument("MlpConfig: input_dim + noise_dim must be >= 1");
  if (input_dim < 0 || noise_dim < 0 || output_dim < 1)
    throw std::invalid_argument("MlpConfig: dims must be >= 1 (noise_dim >= 0)");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("MlpConfig: hidden width must be >= 1");
}

std::vector<double> gaussian_noise(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(rows) * cols);
  for (double& v : out) v = n01(rng);
  return out;
}

Mlp::Mlp(const MlpConfig& cfg, const std::string& name_prefix) : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> n01(0.0, 1.0);

  std::vector<int> dims;
  dims.push_back(cfg.input_dim + cfg.noise_dim);
  for (int h : cfg.hidden) dims.push_back(h);
  dims.push_back(cfg.output_dim);

  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l], fan_out = dims[l + 1];
    const double std_dev = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<double> w(static_cast<std::size_t>(fan_in) * fan_out);
    for (double& v : w) v = std_dev * n01(rng);
    weights_.emplace_back(name_prefix + "/W" + std::to_string(l), ad::Shape{fan_in, fan_out},
                          std::move(w));
    biases_.emplace_back(name_prefix + "/b" + std::to_string(l), ad::Shape{1, fan_out});
  }
}

ad::Tensor Mlp::forward(ad::Tape& tape, ad::Tensor x) {
  return forward_with_features(tape, x, num_layers() - 2).out;
}

Mlp::WithFeatures Mlp::forward_with_features(ad::Tape& tape, ad::Tensor x, int feature_layer) {
  if (x.cols() != cfg_.input_dim + cfg_.noise_dim)
    throw std::invalid_argument("Mlp::forward: input has " + std::to_string(x.cols()) +
                                " features, net expects " +
                                std::to_string(cfg_.input_dim + cfg_.noise_dim));
  ad::Tensor h = x;
  ad::Tensor features;
  const int n = num_layers();
  for (int l = 0; l < n; ++l) {
    ad::Tensor pre = tape.add(tape.matmul(h, tape.param(weights_[l])), tape.param(biases_[l]));
    if (l + 1 < n) {
      h = cfg_.activation == Activation::Tanh ? tape.tanh(pre) : tape.relu(pre);
      if (l == feature_layer) features = h;
    } else {
      h = pre;  // linear output layer; heads are identity (implicit sampler)
    }
  }
  if (!features) features = h;
  return {h, features};
}

std::vector<double> Mlp::eval(const std::vector<double>& input, int batch) const {
  const int in_dim = cfg_.input_dim + cfg_.noise_dim;
  if (input.size() != static_cast<std::size_t>(batch) * in_dim)
    throw std::invalid_argument("Mlp::eval: input size " + std::to_string(input.size()) +
                                " does not match batch " + std::to_string(batch) + " x " +
                                std::to_string(in_dim));
  std::vector<double> h = input;
  const int n = num_layers();
  for (int l = 0; l < n; ++l) {
    const int fan_in = weights_[l].shape[0], fan_out = weights_[l].shape[1];
    std::vector<double> next(static_cast<std::size_t>(batch) * fan_out);
    const double* w = weights_[l].value.data();
    const double* b = biases_[l].value.data();
    for (int r = 0; r < batch; ++r) {
      double* out = next.data() + static_cast<std::size_t>(r) * fan_out;
      const double* in = h.data() + static_cast<std::size_t>(r) * fan_in;
      for (int j = 0; j < fan_out; ++j) out[j] = b[j];
      for (int i = 0; i < fan_in; ++i) {
        const double v = in[i];
        const double* wr = w + static_cast<std::size_t>(i) * fan_out;
        for (int j = 0; j < fan_out; ++j) out[j] += v * wr[j];
      }
      if (l + 1 < n) {
        for (int j = 0; j < fan_out; ++j)
          out[j] = cfg_.activation == Activation::Tanh ? std::tanh(out[j])
                                                       : (out[j] > 0.0 ? out[j] : 0.0);
      }
    }
    h = std::move(next);
  }
  return h;
}

std::vector<ad::Parameter*> Mlp::parameters() {
  std::vector<ad::Parameter*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

std::vector<const ad::Parameter*> Mlp::parameters() const {
  std::vector<const ad::Parameter*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

StochasticMap::StochasticMap(const MlpConfig& cfg, const std::string& name)
    : net_(cfg, name), name_(name) {}

ad::Tensor StochasticMap::sample(ad::Tape& tape, ad::Tensor input, std::mt19937_64& rng) {
  const MlpConfig& cfg = net_.config();
  if (input.cols() != cfg.input_dim)
    throw std::invalid_argument(name_ + ": input has " + std::to_string(input.cols()) +
                                " features, map expects " + std::to_string(cfg.input_dim));
  ad::Tensor h = input;
  if (cfg.noise_dim > 0) {
    ad::Tensor eps = tape.input({input.rows(), cfg.noise_dim},
                                gaussian_noise(input.rows(), cfg.noise_dim, rng));
    h = tape.concat_cols(input, eps);
  }
  return net_.forward(tape, h);
}

std::vector<double> StochasticMap::sample_values(const std::vector<double>& input, int batch,
                                                 std::mt19937_64& rng) {
  ad::Tape tape;
  ad::Tensor x = tape.input({batch, net_.config().input_dim}, input);
  return sample(tape, x, rng).values();
}

Discriminator::Discriminator(const MlpConfig& cfg, const std::string& name)
    : net_(cfg, name), name_(name) {
  if (cfg.noise_dim != 0 || cfg.output_dim != 1)
    throw std::invalid_argument(name + ": discriminators need noise_dim 0 and output_dim 1");
  feature_layer_ = static_cast<int>(cfg.hidden.size()) - 1;
}

Discriminator::Out Discriminator::discriminate(ad::Tape& tape, ad::Tensor a, ad::Tensor b) {
  if (a.rows() != b.rows())
    throw std::invalid_argument(name_ + ": batch mismatch, " + std::to_string(a.rows()) +
                                " vs " + std::to_string(b.rows()) + " rows");
  if (a.cols() + b.cols() != net_.config().input_dim)
    throw std::invalid_argument(name_ + ": pair has " + std::to_string(a.cols() + b.cols()) +
                                " features, net expects " +
                                std::to_string(net_.config().input_dim));
  ad::Tensor pair = tape.concat_cols(a, b);
  auto wf = net_.forward_with_features(tape, pair, feature_layer_);
  return {wf.out, wf.features};
}

ad::Tensor dae_forward(ad::Tape& tape, StochasticMap& encoder, StochasticMap& decoder,
                       ad::Tensor x, double noise_std, std::mt19937_64& rng) {
  if (noise_std < 0.0)
    throw std::invalid_argument("dae_forward: noise_std must be >= 0, got " +
                                std::to_string(noise_std));
  ad::Tensor corrupted = x;
  if (noise_std > 0.0) {
    std::vector<double> noise = gaussian_noise(x.rows(), x.cols(), rng);
    for (double& v : noise) v *= noise_std;
    corrupted = tape.add(x, tape.input({x.rows(), x.cols()}, std::move(noise)));
  }
  ad::Tensor code = encoder.sample(tape, corrupted, rng);
  return decoder.sample(tape, code, rng);
}

}  // namespace alice::nets
