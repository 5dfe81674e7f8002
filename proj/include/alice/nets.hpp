#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "alice/autodiff.hpp"

namespace alice::nets {

enum class Activation { Tanh, Relu };

/// Output head of a sampler. Both heads emit the raw last-layer affine output:
/// samplers here are implicit (noise enters by input concatenation), so the
/// gaussian-sample head has no extra parameters.
enum class OutputHead { Identity, GaussianSample };

struct MlpConfig {
  int input_dim = 0;
  int noise_dim = 0;  // 0 => deterministic mapping
  std::vector<int> hidden;
  int output_dim = 0;
  Activation activation = Activation::Tanh;
  OutputHead head = OutputHead::Identity;
  std::uint64_t seed = 0;

  void validate() const;  // throws on empty hidden, non-positive dims, noise_dim < 0
};

/// Plain MLP over flattened parameters. First-layer fan-in is
/// input_dim + noise_dim; weights init N(0, 1/fan_in), biases zero.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const MlpConfig& cfg, const std::string& name_prefix);

  ad::Tensor forward(ad::Tape& tape, ad::Tensor x);
  struct WithFeatures {
    ad::Tensor out;
    ad::Tensor features;  // post-activation of the requested hidden layer
  };
  WithFeatures forward_with_features(ad::Tape& tape, ad::Tensor x, int feature_layer);

  /// Tape-free forward pass; input is (batch, fan_in) row-major.
  std::vector<double> eval(const std::vector<double>& input, int batch) const;

  std::vector<ad::Parameter*> parameters();
  std::vector<const ad::Parameter*> parameters() const;
  const MlpConfig& config() const { return cfg_; }
  int num_layers() const { return static_cast<int>(weights_.size()); }

 private:
  MlpConfig cfg_;
  std::vector<ad::Parameter> weights_;
  std::vector<ad::Parameter> biases_;
};

/// Conditional sampler g(input, noise): draws noise ~ N(0, I), concatenates
/// [input noise] and runs the MLP. With noise_dim == 0 this is a deterministic
/// function of its input.
class StochasticMap {
 public:
  StochasticMap() = default;
  StochasticMap(const MlpConfig& cfg, const std::string& name);

  ad::Tensor sample(ad::Tape& tape, ad::Tensor input, std::mt19937_64& rng);
  /// Detached evaluation: runs on a scratch tape, returns raw values.
  std::vector<double> sample_values(const std::vector<double>& input, int batch,
                                    std::mt19937_64& rng);

  std::vector<ad::Parameter*> parameters() { return net_.parameters(); }
  const MlpConfig& config() const { return net_.config(); }
  Mlp& net() { return net_; }
  const std::string& name() const { return name_; }

 private:
  Mlp net_;
  std::string name_;
};

/// Pair discriminator: consumes [a b] concatenated, emits one raw logit per
/// example plus the hidden-layer activations used for feature matching.
class Discriminator {
 public:
  Discriminator() = default;
  /// cfg.input_dim must equal dim(a) + dim(b); noise_dim 0; output_dim 1.
  Discriminator(const MlpConfig& cfg, const std::string& name);

  struct Out {
    ad::Tensor logit;     // (B,1) raw logits; sigma is applied by the objective
    ad::Tensor features;  // (B,H) activations at feature_layer
  };
  Out discriminate(ad::Tape& tape, ad::Tensor a, ad::Tensor b);

  std::vector<ad::Parameter*> parameters() { return net_.parameters(); }
  const MlpConfig& config() const { return net_.config(); }
  int feature_layer() const { return feature_layer_; }
  Mlp& net() { return net_; }
  const std::string& name() const { return name_; }

 private:
  Mlp net_;
  std::string name_;
  int feature_layer_ = 0;  // last hidden layer
};

/// Denoising autoencoder pass: decoder(encoder(x + N(0, noise_std^2 I))).
/// The corruption draw is data, not a differentiable path.
ad::Tensor dae_forward(ad::Tape& tape, StochasticMap& encoder, StochasticMap& decoder,
                       ad::Tensor x, double noise_std, std::mt19937_64& rng);

/// Flat buffer of N(0,1) draws, row-major (rows x cols).
std::vector<double> gaussian_noise(int rows, int cols, std::mt19937_64& rng);

}  // namespace alice::nets
