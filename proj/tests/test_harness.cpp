#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "alice/harness.hpp"

using namespace alice;
using harness::GridSpec;
using harness::RunConfig;
using harness::RunRecord;
using harness::RunStatus;

namespace {

RunConfig quick_config() {
  RunConfig cfg;
  cfg.dec_size = {2, 32};
  cfg.enc_size = {2, 32};
  cfg.disc_size = {2, 32};
  cfg.batch_size = 64;
  cfg.epochs = 3;
  cfg.n_train = 256;
  cfg.n_test = 128;
  cfg.optim.lr = 1e-3;
  cfg.seed = 5;
  return cfg;
}

bool same_eval(const metrics::EvalReport& a, const metrics::EvalReport& b) {
  return a.icp == b.icp && a.icp_std == b.icp_std && a.mse == b.mse && a.purity == b.purity;
}

}  // namespace

TEST_CASE("config validation") {
  RunConfig cfg = quick_config();
  cfg.epochs = -1;
  CHECK_THROWS(cfg.validate());
  cfg = quick_config();
  cfg.d_updates = 0;
  CHECK_THROWS(cfg.validate());
  cfg = quick_config();
  cfg.dataset = "mnist";
  CHECK_THROWS(cfg.validate());
  cfg = quick_config();
  cfg.objective.map_mode = obj::MapMode::ExplicitL2;  // map needs pairing data
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("zero-epoch run completes with untrained metrics") {
  RunConfig cfg = quick_config();
  cfg.epochs = 0;
  const RunRecord rec = harness::train(cfg, nullptr);
  CHECK(rec.status == RunStatus::Completed);
  CHECK(rec.curve.empty());
  CHECK(std::isfinite(rec.eval.mse));
  CHECK(rec.eval.mse > 0.0);
}

TEST_CASE("training runs are reproducible given the config") {
  RunConfig cfg = apply_method(quick_config(), "alice");
  const RunRecord a = harness::train(cfg, nullptr);
  const RunRecord b = harness::train(cfg, nullptr);
  CHECK(a.status == b.status);
  CHECK(same_eval(a.eval, b.eval));
  REQUIRE(a.curve.size() == b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i)
    CHECK(a.curve[i].generator_total == b.curve[i].generator_total);
}

TEST_CASE("method presets") {
  RunConfig base = quick_config();
  const RunConfig alice_cfg = harness::apply_method(base, "alice");
  CHECK(alice_cfg.objective.use_ali);
  CHECK(alice_cfg.objective.cycle_mode == obj::CycleMode::ExplicitL2);
  CHECK(alice_cfg.objective.lambda_cycle == 1.0);

  const RunConfig ali_cfg = harness::apply_method(base, "ali");
  CHECK(ali_cfg.objective.cycle_mode == obj::CycleMode::None);

  const RunConfig dae_cfg = harness::apply_method(base, "dae");
  CHECK_FALSE(dae_cfg.objective.use_ali);
  CHECK(dae_cfg.dae_corruption_std == 0.1);
  CHECK(dae_cfg.noise_dim == 0);

  CHECK_THROWS(harness::apply_method(base, "wgan"));
}

TEST_CASE("grid expansion counts") {
  GridSpec grid;
  grid.base = quick_config();
  grid.dec_layers = {2, 3};
  grid.enc_layers = {2, 3};
  grid.disc_layers = {2, 3};
  grid.dec_neurons = {256, 512};
  grid.enc_neurons = {256, 512};
  grid.disc_neurons = {256, 512};
  grid.d_updates = {1, 3, 5};
  grid.g_updates = {1, 3, 5};
  CHECK(grid.size() == 576);  // the full published protocol

  GridSpec desk;
  desk.base = quick_config();
  desk.dec_neurons = {64, 256};
  desk.enc_neurons = {64, 256};
  desk.disc_neurons = {64, 256};
  desk.d_updates = {1, 3};
  desk.g_updates = {1, 3};
  CHECK(desk.size() == 32);
  CHECK(desk.expand().size() == 32);
}

TEST_CASE("grid search records every config x method and isolates failures") {
  GridSpec grid;
  grid.base = quick_config();
  grid.base.epochs = 1;
  grid.dec_neurons = {8, 16};

  auto records = harness::grid_search(grid, {"alice", "ali"}, nullptr, 2);
  CHECK(records.size() == 4);
  for (const auto& r : records) CHECK(std::isfinite(r.eval.mse));

  // a config that cannot build (batch above n_train) is recorded, not fatal
  GridSpec bad = grid;
  bad.base.n_train = 32;  // batch_size 64 > n_train
  auto recs = harness::grid_search(bad, {"alice"}, nullptr, 2);
  CHECK(recs.size() == 2);
  for (const auto& r : recs) {
    CHECK(r.status == RunStatus::Diverged);
    CHECK(r.note.find("run failed") != std::string::npos);
  }
}

TEST_CASE("single-config grid degenerates to train") {
  GridSpec grid;
  grid.base = quick_config();
  grid.dec_neurons = grid.enc_neurons = grid.disc_neurons = {32};
  auto records = harness::grid_search(grid, {"alice"}, nullptr, 1);
  REQUIRE(records.size() == 1);
  RunConfig solo = harness::apply_method(grid.expand()[0], "alice");
  solo.seed = grid.base.seed;  // grid seeds tasks sequentially from the base
  const RunRecord direct = harness::train(solo, nullptr);
  CHECK(same_eval(records[0].eval, direct.eval));
}

TEST_CASE("lambda zero reduces the sweep entry to plain joint matching") {
  RunConfig base = harness::apply_method(quick_config(), "alice");
  auto summary = harness::lambda_sweep(base, {0.0, 1.0}, {base.seed}, nullptr, 2);
  REQUIRE(summary.entries.size() == 2);

  RunConfig ali_cfg = harness::apply_method(quick_config(), "ali");
  ali_cfg.seed = base.seed;
  const RunRecord ali_rec = harness::train(ali_cfg, nullptr);
  CHECK(summary.entries[0].records[0].eval.mse == ali_rec.eval.mse);
  CHECK(summary.entries[0].records[0].eval.purity == ali_rec.eval.purity);

  CHECK_THROWS(harness::lambda_sweep(harness::apply_method(base, "ali"), {0.1}, {1}, nullptr));
}

TEST_CASE("pairing experiment produces an accuracy in range") {
  RunConfig base = quick_config();
  base.epochs = 2;
  const RunRecord rec = harness::pairing_experiment(
      5, harness::PairingVariant::ExplicitBoth, 3, nullptr, &base);
  CHECK(rec.correspondence_accuracy >= 0.0);
  CHECK(rec.correspondence_accuracy <= 1.0);
  CHECK(harness::pairing_variant_from_string("explicit") == harness::PairingVariant::ExplicitBoth);
  CHECK_THROWS(harness::pairing_variant_from_string("xyz"));
}

TEST_CASE("json round trips") {
  RunConfig cfg = harness::apply_method(quick_config(), "alice");
  cfg.objective.feature_matching = true;
  nlohmann::json j;
  harness::to_json(j, cfg);
  RunConfig back;
  harness::from_json(j, back);
  CHECK(harness::config_hash(back) == harness::config_hash(cfg));
  CHECK(back.objective.feature_matching);
  CHECK(back.optim.lr == cfg.optim.lr);

  RunConfig other = cfg;
  other.seed = cfg.seed + 1;
  CHECK(harness::config_hash(other) != harness::config_hash(cfg));

  RunRecord rec = harness::train(cfg, nullptr);
  const std::string path = "/tmp/alice_test_record.json";
  harness::save_record(path, rec);
  const RunRecord loaded = harness::load_record(path);
  CHECK(same_eval(loaded.eval, rec.eval));
  CHECK(loaded.config_hash == rec.config_hash);
  CHECK(loaded.curve.size() == rec.curve.size());
  std::remove(path.c_str());

  GridSpec grid;
  grid.base = cfg;
  grid.d_updates = {1, 3};
  nlohmann::json gj;
  harness::to_json(gj, grid);
  GridSpec gback;
  harness::from_json(gj, gback);
  CHECK(gback.size() == grid.size());
}

TEST_CASE("aggregate csv") {
  GridSpec grid;
  grid.base = quick_config();
  grid.base.epochs = 1;
  auto records = harness::grid_search(grid, {"alice", "dae"}, nullptr, 2);
  const std::string path = "/tmp/alice_test_agg.csv";
  harness::write_aggregate_csv(path, records);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 3);  // header + 2 records
  std::remove(path.c_str());
}
