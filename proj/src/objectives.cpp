#include "alice/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace alice::obj {

using ad::Tape;
using ad::Tensor;

void ObjectiveSpec::validate() const {
  if (!use_ali && cycle_mode == CycleMode::None && map_mode == MapMode::None)
    throw std::invalid_argument("ObjectiveSpec: no loss term enabled");
  if (!(lambda_cycle >= 0.0) || !std::isfinite(lambda_cycle))
    throw std::invalid_argument("ObjectiveSpec: lambda_cycle must be finite and >= 0");
  if (!(lambda_map >= 0.0) || !std::isfinite(lambda_map))
    throw std::invalid_argument("ObjectiveSpec: lambda_map must be finite and >= 0");
  if (k != 1 && k != 2)
    throw std::invalid_argument("ObjectiveSpec: k must be 1 or 2, got " + std::to_string(k));
}

GanPair gan_loss(Tape& tape, Tensor real_logits, Tensor fake_logits, bool non_saturating) {
  Tensor d = tape.add(mean(log_sigmoid(real_logits)), mean(log_sigmoid(-fake_logits)));
  Tensor g = non_saturating ? -mean(log_sigmoid(fake_logits)) : d;
  return {d, g, real_logits, fake_logits};
}

GanPair ali_loss(Tape& tape, nets::Discriminator& f_joint, Tensor x, Tensor z_enc,
                 Tensor x_dec, Tensor z, bool non_saturating) {
  Tensor real = f_joint.discriminate(tape, x, z_enc).logit;
  Tensor fake = f_joint.discriminate(tape, x_dec, z).logit;
  Tensor d = tape.add(mean(log_sigmoid(real)), mean(log_sigmoid(-fake)));
  Tensor g;
  if (non_saturating) {
    // both slots carry generator parameters, so swap both terms
    g = tape.add(-mean(log_sigmoid(fake)), -mean(log_sigmoid(-real)));
  } else {
    g = d;
  }
  return {d, g, real, fake};
}

ad::Tensor cycle_explicit_loss(Tape& tape, Tensor x, Tensor x_hat, int k) {
  if (k != 1 && k != 2)
    throw std::invalid_argument("cycle_explicit_loss: k must be 1 or 2, got " +
                                std::to_string(k));
  Tensor diff = tape.sub(x, x_hat);
  Tensor pow = k == 2 ? square(diff) : abs(diff);
  // mean per example of the summed feature-wise k-th powers
  return tape.scale(sum(pow), 1.0 / static_cast<double>(x.rows()));
}

GanPair cycle_adversarial_loss(Tape& tape, nets::Discriminator& f_cycle, Tensor x,
                               Tensor x_hat, bool feature_matching, bool non_saturating) {
  auto real = f_cycle.discriminate(tape, x, x);
  auto fake = f_cycle.discriminate(tape, x, x_hat);
  Tensor d = tape.add(mean(log_sigmoid(real.logit)), mean(log_sigmoid(-fake.logit)));
  Tensor g = non_saturating ? -mean(log_sigmoid(fake.logit)) : d;
  if (feature_matching) {
    Tensor fm = sum(square(mean_rows(real.features) - mean_rows(fake.features)));
    g = tape.add(g, fm);
  }
  return {d, g, real.logit, fake.logit};
}

ad::Tensor map_explicit_loss(Tape& tape, Tensor generated, Tensor target, int k) {
  if (generated.rows() < 1)
    throw std::invalid_argument("map_explicit_loss: empty paired batch");
  return cycle_explicit_loss(tape, target, generated, k);
}

ad::Tensor map_explicit_xent(Tape& tape, Tensor logits, const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("map_explicit_xent: empty paired batch");
  return tape.cross_entropy_with_logits(logits, labels);
}

GanPair map_adversarial_loss(Tape& tape, nets::Discriminator& f_cond, Tensor x, Tensor z,
                             Tensor x_hat, bool non_saturating) {
  Tensor real = f_cond.discriminate(tape, x, z).logit;
  Tensor fake = f_cond.discriminate(tape, x_hat, z).logit;
  Tensor d = tape.add(mean(log_sigmoid(real)), mean(log_sigmoid(-fake)));
  Tensor g = non_saturating ? -mean(log_sigmoid(fake)) : d;
  return {d, g, real, fake};
}

std::vector<ad::Parameter*> ModelSet::generator_parameters() const {
  std::vector<ad::Parameter*> out;
  for (nets::StochasticMap* m : {decoder, encoder}) {
    if (!m) continue;
    for (ad::Parameter* p : m->parameters()) out.push_back(p);
  }
  return out;
}

std::vector<ad::Parameter*> ModelSet::discriminator_parameters() const {
  std::vector<ad::Parameter*> out;
  for (nets::Discriminator* d : {joint, cycle_x, cycle_z, cond_x, cond_z}) {
    if (!d) continue;
    for (ad::Parameter* p : d->parameters()) out.push_back(p);
  }
  return out;
}

bool LossReport::all_finite() const {
  if (!std::isfinite(generator_total) || !std::isfinite(max_abs_logit)) return false;
  for (const auto& [_, v] : d_objectives)
    if (!std::isfinite(v)) return false;
  for (const auto& [_, v] : terms)
    if (!std::isfinite(v)) return false;
  return true;
}

namespace {

void require_net(const void* p, const std::string& what) {
  if (p == nullptr)
    throw std::invalid_argument("compose_objective: spec requires " + what +
                                " but the model set has none");
}

void check_models(const ObjectiveSpec& spec, const ModelSet& nets, const TrainBatch& batch) {
  require_net(nets.decoder, "a decoder");
  require_net(nets.encoder, "an encoder");
  if (spec.use_ali) require_net(nets.joint, "a joint discriminator");
  if (spec.cycle_mode == CycleMode::Adversarial) {
    if (spec.cycle_sides != CycleSides::ZOnly) require_net(nets.cycle_x, "an x-cycle discriminator");
    if (spec.cycle_sides != CycleSides::XOnly) require_net(nets.cycle_z, "a z-cycle discriminator");
  }
  if (spec.map_mode == MapMode::AdversarialConditional) {
    require_net(nets.cond_x, "a conditional discriminator for x");
    require_net(nets.cond_z, "a conditional discriminator for z");
  }
  if (spec.map_mode != MapMode::None && batch.n_paired < 1)
    throw std::invalid_argument("compose_objective: map term enabled but the paired set is empty");
  if (spec.map_mode == MapMode::ExplicitCrossEntropy &&
      batch.paired_labels.size() != static_cast<std::size_t>(batch.n_paired))
    throw std::invalid_argument("compose_objective: cross-entropy map needs one label per pair");
  if (batch.x.size() != static_cast<std::size_t>(batch.batch) * batch.x_dim ||
      batch.z.size() != static_cast<std::size_t>(batch.batch) * batch.z_dim)
    throw std::invalid_argument("compose_objective: batch buffers do not match declared dims");
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct LogitTracker {
  double value = 0.0;
  void add(Tensor t) { value = std::max(value, max_abs(t.values())); }
};

LossReport discriminator_phase(const ObjectiveSpec& spec, ModelSet& nets,
                               const TrainBatch& batch, std::mt19937_64& rng) {
  LossReport report;
  LogitTracker logits;
  for (ad::Parameter* p : nets.discriminator_parameters()) p->zero_grad();

  const int B = batch.batch;
  // detached generator samples: the discriminator tape sees them as data
  std::vector<double> z_enc = nets.encoder->sample_values(batch.x, B, rng);
  std::vector<double> x_dec = nets.decoder->sample_values(batch.z, B, rng);

  Tape tape;
  Tensor X = tape.input({B, batch.x_dim}, batch.x);
  Tensor Z = tape.input({B, batch.z_dim}, batch.z);

  std::vector<Tensor> weighted;
  if (spec.use_ali) {
    Tensor Ze = tape.input({B, batch.z_dim}, z_enc);
    Tensor Xd = tape.input({B, batch.x_dim}, x_dec);
    Tensor real = nets.joint->discriminate(tape, X, Ze).logit;
    Tensor fake = nets.joint->discriminate(tape, Xd, Z).logit;
    logits.add(real);
    logits.add(fake);
    auto pair = gan_loss(tape, real, fake, spec.non_saturating);
    report.d_objectives["ali"] = pair.d_objective.scalar();
    weighted.push_back(pair.d_objective);
  }
  if (spec.cycle_mode == CycleMode::Adversarial) {
    if (spec.cycle_sides != CycleSides::ZOnly) {
      std::vector<double> x_rec = nets.decoder->sample_values(z_enc, B, rng);
      Tensor Xr = tape.input({B, batch.x_dim}, x_rec);
      auto pair = cycle_adversarial_loss(tape, *nets.cycle_x, X, Xr, false, spec.non_saturating);
      logits.add(pair.real_logits);
      logits.add(pair.fake_logits);
      report.d_objectives["cycle_x"] = pair.d_objective.scalar();
      weighted.push_back(tape.scale(pair.d_objective, spec.lambda_cycle));
    }
    if (spec.cycle_sides != CycleSides::XOnly) {
      std::vector<double> z_rec = nets.encoder->sample_values(x_dec, B, rng);
      Tensor Zr = tape.input({B, batch.z_dim}, z_rec);
      auto pair = cycle_adversarial_loss(tape, *nets.cycle_z, Z, Zr, false, spec.non_saturating);
      logits.add(pair.real_logits);
      logits.add(pair.fake_logits);
      report.d_objectives["cycle_z"] = pair.d_objective.scalar();
      weighted.push_back(tape.scale(pair.d_objective, spec.lambda_cycle));
    }
  }
  if (spec.map_mode == MapMode::AdversarialConditional) {
    const int P = batch.n_paired;
    std::vector<double> xp_gen = nets.decoder->sample_values(batch.paired_z, P, rng);
    std::vector<double> zp_gen = nets.encoder->sample_values(batch.paired_x, P, rng);
    Tensor Xp = tape.input({P, batch.x_dim}, batch.paired_x);
    Tensor Zp = tape.input({P, batch.z_dim}, batch.paired_z);
    Tensor Xg = tape.input({P, batch.x_dim}, xp_gen);
    Tensor Zg = tape.input({P, batch.z_dim}, zp_gen);
    auto px = map_adversarial_loss(tape, *nets.cond_x, Xp, Zp, Xg, spec.non_saturating);
    auto pz = map_adversarial_loss(tape, *nets.cond_z, Zp, Xp, Zg, spec.non_saturating);
    logits.add(px.real_logits);
    logits.add(px.fake_logits);
    logits.add(pz.real_logits);
    logits.add(pz.fake_logits);
    report.d_objectives["map_x"] = px.d_objective.scalar();
    report.d_objectives["map_z"] = pz.d_objective.scalar();
    weighted.push_back(tape.scale(px.d_objective, spec.lambda_map));
    weighted.push_back(tape.scale(pz.d_objective, spec.lambda_map));
  }

  if (!weighted.empty()) {
    Tensor total = weighted[0];
    for (std::size_t i = 1; i < weighted.size(); ++i) total = tape.add(total, weighted[i]);
    tape.backward(tape.neg(total));  // ascent via Adam descent on the negation
  }
  report.max_abs_logit = logits.value;
  return report;
}

LossReport generator_phase(const ObjectiveSpec& spec, ModelSet& nets, const TrainBatch& batch,
                           std::mt19937_64& rng) {
  LossReport report;
  LogitTracker logits;
  for (ad::Parameter* p : nets.generator_parameters()) p->zero_grad();

  const int B = batch.batch;
  Tape tape;
  Tensor X = tape.input({B, batch.x_dim}, batch.x);
  Tensor Z = tape.input({B, batch.z_dim}, batch.z);

  const bool cycle_on_x =
      spec.cycle_mode != CycleMode::None && spec.cycle_sides != CycleSides::ZOnly;
  const bool cycle_on_z =
      spec.cycle_mode != CycleMode::None && spec.cycle_sides != CycleSides::XOnly;

  Tensor z_enc, x_dec;
  if (spec.use_ali || cycle_on_x) z_enc = nets.encoder->sample(tape, X, rng);
  if (spec.use_ali || cycle_on_z) x_dec = nets.decoder->sample(tape, Z, rng);

  std::vector<Tensor> parts;
  if (spec.use_ali) {
    Tensor real = nets.joint->discriminate(tape, X, z_enc).logit;
    Tensor fake = nets.joint->discriminate(tape, x_dec, Z).logit;
    logits.add(real);
    logits.add(fake);
    Tensor g;
    if (spec.non_saturating) {
      g = tape.add(-mean(log_sigmoid(fake)), -mean(log_sigmoid(-real)));
    } else {
      g = tape.add(mean(log_sigmoid(real)), mean(log_sigmoid(-fake)));
    }
    report.terms["ali_g"] = g.scalar();
    parts.push_back(g);
  }
  if (cycle_on_x) {
    Tensor x_rec = nets.decoder->sample(tape, z_enc, rng);
    Tensor term;
    if (spec.cycle_mode == CycleMode::Adversarial) {
      auto pair = cycle_adversarial_loss(tape, *nets.cycle_x, X, x_rec, spec.feature_matching,
                                         spec.non_saturating);
      logits.add(pair.real_logits);
      logits.add(pair.fake_logits);
      term = pair.g_objective;
    } else {
      term = cycle_explicit_loss(tape, X, x_rec,
                                 spec.cycle_mode == CycleMode::ExplicitL1 ? 1 : 2);
    }
    report.terms["cycle_x"] = term.scalar();
    parts.push_back(tape.scale(term, spec.lambda_cycle));
  }
  if (cycle_on_z) {
    Tensor z_rec = nets.encoder->sample(tape, x_dec, rng);
    Tensor term;
    if (spec.cycle_mode == CycleMode::Adversarial) {
      auto pair = cycle_adversarial_loss(tape, *nets.cycle_z, Z, z_rec, spec.feature_matching,
                                         spec.non_saturating);
      logits.add(pair.real_logits);
      logits.add(pair.fake_logits);
      term = pair.g_objective;
    } else {
      term = cycle_explicit_loss(tape, Z, z_rec,
                                 spec.cycle_mode == CycleMode::ExplicitL1 ? 1 : 2);
    }
    report.terms["cycle_z"] = term.scalar();
    parts.push_back(tape.scale(term, spec.lambda_cycle));
  }
  if (spec.map_mode != MapMode::None) {
    const int P = batch.n_paired;
    Tensor Xp = tape.input({P, batch.x_dim}, batch.paired_x);
    Tensor Zp = tape.input({P, batch.z_dim}, batch.paired_z);
    Tensor x_gen = nets.decoder->sample(tape, Zp, rng);
    Tensor z_gen = nets.encoder->sample(tape, Xp, rng);
    Tensor mx, mz;
    switch (spec.map_mode) {
      case MapMode::ExplicitL2:
        mx = map_explicit_loss(tape, x_gen, Xp, spec.k);
        mz = map_explicit_loss(tape, z_gen, Zp, spec.k);
        break;
      case MapMode::ExplicitCrossEntropy:
        // categorical z-domain: only the encoder direction is a classifier
        mz = map_explicit_xent(tape, z_gen, batch.paired_labels);
        break;
      case MapMode::AdversarialConditional: {
        auto px = map_adversarial_loss(tape, *nets.cond_x, Xp, Zp, x_gen, spec.non_saturating);
        auto pz = map_adversarial_loss(tape, *nets.cond_z, Zp, Xp, z_gen, spec.non_saturating);
        logits.add(px.real_logits);
        logits.add(px.fake_logits);
        logits.add(pz.real_logits);
        logits.add(pz.fake_logits);
        mx = px.g_objective;
        mz = pz.g_objective;
        break;
      }
      case MapMode::None:
        break;
    }
    if (mx) {
      report.terms["map_x"] = mx.scalar();
      parts.push_back(tape.scale(mx, spec.lambda_map));
    }
    if (mz) {
      report.terms["map_z"] = mz.scalar();
      parts.push_back(tape.scale(mz, spec.lambda_map));
    }
  }

  Tensor total = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) total = tape.add(total, parts[i]);
  report.generator_total = total.scalar();
  tape.backward(total);
  report.max_abs_logit = logits.value;
  return report;
}

}  // namespace

LossReport compose_objective(const ObjectiveSpec& spec, ModelSet& nets, const TrainBatch& batch,
                             std::mt19937_64& rng, Phase phase) {
  spec.validate();
  check_models(spec, nets, batch);

  const bool needs_d = spec.use_ali || spec.cycle_mode == CycleMode::Adversarial ||
                       spec.map_mode == MapMode::AdversarialConditional;
  if (phase == Phase::Discriminators) {
    if (!needs_d) return LossReport{};
    return discriminator_phase(spec, nets, batch, rng);
  }
  if (phase == Phase::Generators) return generator_phase(spec, nets, batch, rng);

  LossReport d;
  if (needs_d) d = discriminator_phase(spec, nets, batch, rng);
  LossReport g = generator_phase(spec, nets, batch, rng);
  g.d_objectives = d.d_objectives;
  g.max_abs_logit = std::max(g.max_abs_logit, d.max_abs_logit);
  return g;
}

}  // namespace alice::obj
