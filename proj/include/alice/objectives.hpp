#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "alice/autodiff.hpp"
#include "alice/nets.hpp"

namespace alice::obj {

enum class CycleMode { None, ExplicitL1, ExplicitL2, Adversarial };
enum class CycleSides { XOnly, ZOnly, Both };
enum class MapMode { None, ExplicitL2, ExplicitCrossEntropy, AdversarialConditional };

/// Declarative composition of loss terms. Selects any model in the family:
/// plain adversarial matching (use_ali), cycle regularization (explicit or
/// adversarial), and paired-sample supervision (explicit or conditional-GAN).
struct ObjectiveSpec {
  bool use_ali = true;
  CycleMode cycle_mode = CycleMode::None;
  CycleSides cycle_sides = CycleSides::XOnly;
  MapMode map_mode = MapMode::None;
  double lambda_cycle = 1.0;
  double lambda_map = 1.0;
  bool feature_matching = false;
  int k = 2;  // norm order for explicit losses
  /// Generators minimize -log sigma of the swapped slot instead of the literal
  /// minimax term; same fixed points, non-vanishing early gradients.
  bool non_saturating = true;

  void validate() const;  // at least one term enabled; lambdas finite and >= 0
};

/// Discriminator/generator objective pair for one adversarial term. The
/// d_objective is a maximization target (bounded above by 0, equal to
/// -2 ln 2 at zero logits); the g_objective is minimized.
struct GanPair {
  ad::Tensor d_objective;
  ad::Tensor g_objective;
  ad::Tensor real_logits;
  ad::Tensor fake_logits;
};

/// d = mean log sigma(real) + mean log(1 - sigma(fake)).
/// g = mean -log sigma(fake) when non-saturating, else g = d.
GanPair gan_loss(ad::Tape& tape, ad::Tensor real_logits, ad::Tensor fake_logits,
                 bool non_saturating = true);

/// Joint-matching term: real pairs (x, z_enc) from the encoder joint, fake
/// pairs (x_dec, z) from the decoder joint. The non-saturating generator
/// objective swaps both slots (both depend on generator parameters).
GanPair ali_loss(ad::Tape& tape, nets::Discriminator& f_joint, ad::Tensor x,
                 ad::Tensor z_enc, ad::Tensor x_dec, ad::Tensor z,
                 bool non_saturating = true);

/// Mean over the batch of ||x - x_hat||_k^k, k in {1,2}.
ad::Tensor cycle_explicit_loss(ad::Tape& tape, ad::Tensor x, ad::Tensor x_hat, int k);

/// Reconstruction discriminated against the real pair (x, x); optional
/// feature matching adds || mean feat(x,x) - mean feat(x,x_hat) ||^2 to g.
GanPair cycle_adversarial_loss(ad::Tape& tape, nets::Discriminator& f_cycle, ad::Tensor x,
                               ad::Tensor x_hat, bool feature_matching = false,
                               bool non_saturating = true);

/// l_k regression against the paired target (continuous domains).
ad::Tensor map_explicit_loss(ad::Tape& tape, ad::Tensor generated, ad::Tensor target, int k);
/// Cross-entropy against categorical paired targets.
ad::Tensor map_explicit_xent(ad::Tape& tape, ad::Tensor logits, const std::vector<int>& labels);

/// Conditional term: distinguish the true pair (x, z) from the generated
/// (x_hat, z), all sharing the same z.
GanPair map_adversarial_loss(ad::Tape& tape, nets::Discriminator& f_cond, ad::Tensor x,
                             ad::Tensor z, ad::Tensor x_hat, bool non_saturating = true);

/// Networks addressed by an ObjectiveSpec. decoder/encoder are the two
/// conditional samplers; the discriminators exist only for the terms that
/// need them.
struct ModelSet {
  nets::StochasticMap* decoder = nullptr;  // z -> x
  nets::StochasticMap* encoder = nullptr;  // x -> z
  nets::Discriminator* joint = nullptr;    // pairs (x, z)
  nets::Discriminator* cycle_x = nullptr;  // pairs (x, x_hat)
  nets::Discriminator* cycle_z = nullptr;  // pairs (z, z_hat)
  nets::Discriminator* cond_x = nullptr;   // pairs (x, z), fake x
  nets::Discriminator* cond_z = nullptr;   // pairs (z, x), fake z

  std::vector<ad::Parameter*> generator_parameters() const;
  std::vector<ad::Parameter*> discriminator_parameters() const;
};

struct TrainBatch {
  int batch = 0;
  int x_dim = 0;
  int z_dim = 0;
  std::vector<double> x;  // (batch, x_dim)
  std::vector<double> z;  // (batch, z_dim)

  int n_paired = 0;
  std::vector<double> paired_x;    // (n_paired, x_dim)
  std::vector<double> paired_z;    // (n_paired, z_dim)
  std::vector<int> paired_labels;  // categorical targets, ExplicitCrossEntropy only
};

struct LossReport {
  double generator_total = 0.0;
  std::map<std::string, double> d_objectives;  // per discriminator term
  std::map<std::string, double> terms;         // generator-side term values
  double max_abs_logit = 0.0;

  bool all_finite() const;
};

enum class Phase { Discriminators, Generators, Both };

/// Builds the composed objective and populates gradients.
///
/// Discriminator phase: generator samples are detached (leaf inputs), so each
/// discriminator's ascent gradient touches only its own parameters; grads of
/// -(d_ali + lambda_cycle * d_cycle + lambda_map * d_map) are accumulated so
/// Adam descent performs ascent on the weighted composite.
///
/// Generator phase: one tape through all enabled terms; total
///   g = ali_g + lambda_cycle * cycle + lambda_map * map
/// is backpropagated into the generator parameters.
///
/// Parameter grads of the active sets are zeroed at the start of each phase.
LossReport compose_objective(const ObjectiveSpec& spec, ModelSet& nets, const TrainBatch& batch,
                             std::mt19937_64& rng, Phase phase = Phase::Both);

}  // namespace alice::obj
