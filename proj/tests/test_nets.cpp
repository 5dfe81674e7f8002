#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <random>

#include "alice/checkpoint.hpp"
#include "alice/nets.hpp"
#include "alice/objectives.hpp"

using namespace alice;
using nets::Activation;
using nets::MlpConfig;

namespace {

MlpConfig small_map_config(int in, int noise, int out, std::uint64_t seed) {
  MlpConfig cfg;
  cfg.input_dim = in;
  cfg.noise_dim = noise;
  cfg.hidden = {16, 16};
  cfg.output_dim = out;
  cfg.seed = seed;
  return cfg;
}

void zero_params(std::vector<ad::Parameter*> params) {
  for (ad::Parameter* p : params) std::fill(p->value.begin(), p->value.end(), 0.0);
}

}  // namespace

TEST_CASE("config validation") {
  MlpConfig cfg = small_map_config(2, 0, 2, 0);
  cfg.hidden.clear();
  CHECK_THROWS(cfg.validate());
  cfg = small_map_config(2, -1, 2, 0);
  CHECK_THROWS(cfg.validate());
  cfg = small_map_config(2, 0, 0, 0);
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("zero-initialized deterministic map emits zeros") {
  nets::StochasticMap map(small_map_config(2, 0, 3, 5), "m");
  zero_params(map.parameters());
  std::mt19937_64 rng(0);
  const auto out = map.sample_values({0.7, -1.3, 2.0, 0.1}, 2, rng);
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("same seed and input give identical outputs") {
  nets::StochasticMap map(small_map_config(2, 2, 2, 5), "m");
  const std::vector<double> input{0.3, -0.2, 1.1, 0.4};
  std::mt19937_64 rng1(99), rng2(99);
  const auto a = map.sample_values(input, 2, rng1);
  const auto b = map.sample_values(input, 2, rng2);
  CHECK(a == b);
}

TEST_CASE("noise inputs make the map stochastic in every coordinate") {
  nets::StochasticMap map(small_map_config(2, 2, 2, 5), "m");
  std::mt19937_64 rng(1);
  const int draws = 10000;
  std::vector<double> input(draws * 2);
  for (int i = 0; i < draws; ++i) {
    input[2 * i] = 0.5;  // the same conditioning input repeated
    input[2 * i + 1] = -0.5;
  }
  const auto out = map.sample_values(input, draws, rng);
  for (int d = 0; d < 2; ++d) {
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < draws; ++i) mean += out[2 * i + d];
    mean /= draws;
    for (int i = 0; i < draws; ++i) var += (out[2 * i + d] - mean) * (out[2 * i + d] - mean);
    var /= draws;
    CHECK(var > 0.0);
  }
}

TEST_CASE("deterministic maps are constant on repeated evaluation") {
  nets::StochasticMap map(small_map_config(2, 0, 2, 9), "m");
  std::mt19937_64 rng(3);
  const std::vector<double> input{1.0, 2.0};
  const auto a = map.sample_values(input, 1, rng);
  const auto b = map.sample_values(input, 1, rng);  // rng state has moved on
  CHECK(a == b);
}

TEST_CASE("dimension mismatch is rejected") {
  nets::StochasticMap map(small_map_config(2, 0, 2, 5), "m");
  ad::Tape tape;
  ad::Tensor bad = tape.input({1, 3}, {1.0, 2.0, 3.0});
  std::mt19937_64 rng(0);
  CHECK_THROWS_AS(map.sample(tape, bad, rng), std::invalid_argument);
}

TEST_CASE("discriminator logits: zero net, shapes, per-example independence") {
  MlpConfig cfg = small_map_config(4, 0, 1, 5);
  nets::Discriminator d(cfg, "d");

  ad::Tape tape;
  std::mt19937_64 rng(4);
  std::vector<double> a(10 * 2), b(10 * 2);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (double& v : a) v = n01(rng);
  for (double& v : b) v = n01(rng);
  ad::Tensor ta = tape.input({10, 2}, a);
  ad::Tensor tb = tape.input({10, 2}, b);
  auto out = d.discriminate(tape, ta, tb);
  CHECK(out.logit.shape() == ad::Shape{10, 1});
  CHECK(out.features.shape() == ad::Shape{10, 16});

  // zero-initialized net: logit 0, sigma 0.5
  zero_params(d.parameters());
  ad::Tape tape2;
  auto out2 = d.discriminate(tape2, tape2.input({10, 2}, a), tape2.input({10, 2}, b));
  for (double v : out2.logit.values()) CHECK(v == 0.0);

  // permuting the batch permutes logits identically
  nets::Discriminator d2(cfg, "d2");
  ad::Tape tape3;
  auto base = d2.discriminate(tape3, tape3.input({10, 2}, a), tape3.input({10, 2}, b));
  std::vector<double> ap(a.size()), bp(b.size());
  for (int i = 0; i < 10; ++i) {
    ap[2 * i] = a[2 * (9 - i)];
    ap[2 * i + 1] = a[2 * (9 - i) + 1];
    bp[2 * i] = b[2 * (9 - i)];
    bp[2 * i + 1] = b[2 * (9 - i) + 1];
  }
  ad::Tape tape4;
  auto perm = d2.discriminate(tape4, tape4.input({10, 2}, ap), tape4.input({10, 2}, bp));
  for (int i = 0; i < 10; ++i)
    CHECK(perm.logit.values()[i] == base.logit.values()[9 - i]);

  CHECK_THROWS(nets::Discriminator(small_map_config(4, 2, 1, 5), "bad"));   // noise_dim != 0
  CHECK_THROWS(nets::Discriminator(small_map_config(4, 0, 2, 5), "bad2"));  // output_dim != 1
}

TEST_CASE("initialization keeps unit-gaussian pre-activations in band") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int width : {64, 256, 512}) {
    for (Activation act : {Activation::Tanh, Activation::Relu}) {
      for (int layers : {2, 3}) {
        MlpConfig cfg;
        cfg.input_dim = 2;
        cfg.noise_dim = 0;
        cfg.hidden.assign(layers, width);
        cfg.output_dim = 2;
        cfg.activation = act;
        cfg.seed = width + layers;
        nets::Mlp net(cfg, "net");
        auto params = net.parameters();
        // feed each layer a unit-gaussian input of its own fan-in
        for (int l = 0; l <= layers; ++l) {
          ad::Parameter* w = params[2 * l];
          const int fan_in = w->shape[0], fan_out = w->shape[1];
          const int batch = 512;
          std::vector<double> x(static_cast<std::size_t>(batch) * fan_in);
          for (double& v : x) v = n01(rng);
          ad::Tape tape;
          ad::Tensor pre = tape.matmul(tape.input({batch, fan_in}, x), tape.param(*w));
          double mean = 0.0, var = 0.0;
          for (double v : pre.values()) mean += v;
          mean /= pre.numel();
          for (double v : pre.values()) var += (v - mean) * (v - mean);
          var /= pre.numel();
          const double sd = std::sqrt(var);
          INFO("width ", width, " layer ", l, " fan_in ", fan_in, " fan_out ", fan_out);
          CHECK(sd > 0.5);
          CHECK(sd < 2.0);
        }
      }
    }
  }
}

TEST_CASE("dae forward: zero net and corruption handling") {
  nets::StochasticMap enc(small_map_config(2, 0, 2, 21), "enc");
  nets::StochasticMap dec(small_map_config(2, 0, 2, 22), "dec");
  zero_params(enc.parameters());
  zero_params(dec.parameters());
  std::mt19937_64 rng(5);
  ad::Tape tape;
  ad::Tensor x = tape.input({3, 2}, {1, 2, 3, 4, 5, 6});
  ad::Tensor xhat = nets::dae_forward(tape, enc, dec, x, 0.1, rng);
  for (double v : xhat.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(nets::dae_forward(tape, enc, dec, x, -0.5, rng), std::invalid_argument);
}

TEST_CASE("autoencoder pair trains to near-zero reconstruction") {
  // clean-input autoencoder on a small 2-D cloud; identity is representable
  // well enough for the loss to collapse
  nets::StochasticMap enc(small_map_config(2, 0, 2, 31), "enc");
  nets::StochasticMap dec(small_map_config(2, 0, 2, 32), "dec");
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01(0.0, 1.0);
  const int n = 256;
  std::vector<double> data(n * 2);
  for (double& v : data) v = n01(rng);

  std::vector<ad::Parameter*> params = enc.parameters();
  for (auto* p : dec.parameters()) params.push_back(p);
  ad::Adam opt(params, {.lr = 1e-2, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8});

  double loss = 1e300;
  for (int step = 0; step < 1500; ++step) {
    ad::Tape tape;
    ad::Tensor x = tape.input({n, 2}, data);
    ad::Tensor xhat = nets::dae_forward(tape, enc, dec, x, 0.0, rng);
    ad::Tensor l = obj::cycle_explicit_loss(tape, x, xhat, 2);
    loss = l.scalar();
    opt.zero_grad();
    tape.backward(l);
    opt.step();
  }
  CHECK(loss < 0.02);
}

TEST_CASE("checkpoint round trip") {
  nets::StochasticMap map(small_map_config(2, 2, 2, 41), "map");
  const std::string path = "/tmp/alice_test_ckpt.json";

  std::vector<const ad::Parameter*> cview;
  for (auto* p : map.parameters()) cview.push_back(p);
  checkpoint::save(path, cview, {{"tag", 3.0}});

  std::mt19937_64 rng(7);
  const std::vector<double> input{0.1, 0.2};
  std::mt19937_64 r1(50);
  const auto before = map.sample_values(input, 1, r1);

  for (auto* p : map.parameters())
    for (double& v : p->value) v += 1.0;

  auto meta = checkpoint::load(path, map.parameters());
  CHECK(meta.at("tag") == 3.0);
  std::mt19937_64 r2(50);
  CHECK(map.sample_values(input, 1, r2) == before);

  // shape mismatch and missing tensors are rejected
  nets::StochasticMap other(small_map_config(3, 0, 2, 42), "map");
  CHECK_THROWS(checkpoint::load(path, other.parameters()));
  nets::StochasticMap renamed(small_map_config(2, 2, 2, 43), "different");
  CHECK_THROWS(checkpoint::load(path, renamed.parameters()));
  std::remove(path.c_str());
  (void)rng;
}
