#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "hybridfl/errors.hpp"
#include "hybridfl/experiment.hpp"
#include "hybridfl/training.hpp"

using namespace hybridfl;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.learning_rate = 5e-3;
  c.max_rounds = 8;
  c.patience = 0;
  c.embedding_dim = 4;
  c.encoder_hidden = {16};
  c.fusion_hidden = {16};
  c.central_hidden = {32};
  c.batch_size = 64;
  c.seed = 3;
  return c;
}

void check_history(const TrainResult& r) {
  const auto& rounds = r.history.rounds;
  REQUIRE_FALSE(rounds.empty());
  for (std::size_t i = 0; i < rounds.size(); ++i) CHECK(rounds[i].round == i + 1);
  const auto best = std::max_element(rounds.begin(), rounds.end(), [](const auto& a, const auto& b) {
    return a.val_auprc < b.val_auprc;
  });
  CHECK(r.history.best_round == best->round);
  CHECK(r.history.best_val_auprc == best->val_auprc);
  CHECK(r.bundle.round == best->round);
  CHECK(r.bundle.val_auprc == best->val_auprc);
}

}  // namespace

TEST_CASE("presets carry the published hyperparameters") {
  const auto a = TrainConfig::amlsim();
  CHECK(a.learning_rate == 5e-5);
  CHECK(a.loss.kind == LossKind::kBce);
  CHECK(a.embedding_dim == 16);
  CHECK(a.dropout_rate == 0.0);
  CHECK(a.batch_size == 128);
  const auto s = TrainConfig::swift();
  CHECK(s.learning_rate == 1e-5);
  CHECK(s.loss.kind == LossKind::kFocal);
  CHECK(s.loss.alpha == 0.99);
  CHECK(s.loss.gamma == 2.0);
  CHECK(s.embedding_dim == 64);
  CHECK(s.dropout_rate == 0.2);
}

TEST_CASE("all three trainers return the best validation round") {
  const auto w = fixtures::make_world(2, 1500, 5);
  const auto cfg = small_config();
  const auto hybrid = train_hybridfl(cfg, w.part.tx_view, w.part.bank_views, w.split);
  check_history(hybrid);
  CHECK(hybrid.history.rounds.size() == cfg.max_rounds);
  CHECK(hybrid.history.sync_events == cfg.max_rounds);
  for (const auto& r : hybrid.history.rounds) {
    CHECK(r.messages > 0);
    CHECK(r.bytes > 0);
  }
  const auto central = train_centralized(cfg, w.part.tx_view, w.part.bank_views, w.split);
  check_history(central);
  CHECK(central.history.rounds.front().messages == 0);
  const auto local = train_local_only(cfg, w.part.tx_view, w.split);
  check_history(local);
  CHECK(local.bundle.tag == ModelTag::kLocal);
  CHECK_FALSE(local.bundle.needs_banks());
  CHECK(hybrid.bundle.needs_banks());
}

TEST_CASE("early stopping waits exactly `patience` rounds past the best") {
  const auto w = fixtures::make_world(2, 1000, 6);
  auto cfg = small_config();
  cfg.max_rounds = 30;
  cfg.patience = 2;
  cfg.learning_rate = 0.05;
  const auto r = train_local_only(cfg, w.part.tx_view, w.split);
  check_history(r);
  if (r.history.rounds.size() < cfg.max_rounds)
    CHECK(r.history.rounds.size() == r.history.best_round + cfg.patience);
}

TEST_CASE("fedavg cadence") {
  const auto w = fixtures::make_world(2, 600, 7);
  auto cfg = small_config();
  cfg.max_rounds = 5;
  cfg.fedavg_every_n_rounds = 2;
  CHECK(train_hybridfl(cfg, w.part.tx_view, w.part.bank_views, w.split).history.sync_events == 2);
}

TEST_CASE("same seed gives the same history; dropout does not leak into evaluation") {
  const auto w = fixtures::make_world(2, 800, 8);
  auto cfg = small_config();
  cfg.max_rounds = 3;
  cfg.dropout_rate = 0.2;
  cfg.loss = LossConfig::focal(0.99, 2.0);
  for (auto trainer : {0, 1, 2}) {
    auto run = [&] {
      if (trainer == 0) return train_hybridfl(cfg, w.part.tx_view, w.part.bank_views, w.split);
      if (trainer == 1) return train_centralized(cfg, w.part.tx_view, w.part.bank_views, w.split);
      return train_local_only(cfg, w.part.tx_view, w.split);
    };
    const auto a = run();
    const auto b = run();
    REQUIRE(a.history.rounds.size() == b.history.rounds.size());
    for (std::size_t i = 0; i < a.history.rounds.size(); ++i) {
      CHECK(a.history.rounds[i].train_loss == b.history.rounds[i].train_loss);
      CHECK(a.history.rounds[i].val_auprc == b.history.rounds[i].val_auprc);
    }
    CHECK(a.bundle.networks == b.bundle.networks);
    const BankViews* banks = trainer == 2 ? nullptr : &w.part.bank_views;
    CHECK(score(a.bundle, w.part.tx_view, w.split.test, banks) ==
          score(a.bundle, w.part.tx_view, w.split.test, banks));
  }
}

TEST_CASE("centralised flat variant uses the merged table") {
  const auto w = fixtures::make_world(2, 600, 9);
  auto cfg = small_config();
  cfg.max_rounds = 2;
  cfg.central_architecture = CentralArchitecture::kFlat;
  const auto r = train_centralized(cfg, w.part.tx_view, w.part.bank_views, w.split);
  const auto& net = r.bundle.networks.at("central");
  const auto& bank = w.part.bank_views.begin()->second;
  CHECK(net.input_dim() == w.part.tx_view.features.cols() + 2 * bank.role_input_width());
  CHECK(r.bundle.needs_banks());
}

TEST_CASE("a memorising run scores its own training rows almost perfectly") {
  auto w = fixtures::make_world(2, 200, 10, 20);
  auto cfg = small_config();
  cfg.learning_rate = 0.01;
  cfg.batch_size = 32;
  cfg.max_rounds = 150;
  cfg.encoder_hidden = {64, 32};
  cfg.fusion_hidden = {64, 32};
  cfg.embedding_dim = 16;
  // Validate on the training rows so the kept round is the best fit.
  w.split.validation = w.split.train;
  const auto r = train_hybridfl(cfg, w.part.tx_view, w.part.bank_views, w.split);
  const auto rep = evaluate(r.bundle, w.part.tx_view, w.split.train, &w.part.bank_views);
  CHECK(rep.auprc > 0.95);
}

TEST_CASE("hybrid and centralised bundles need the bank views") {
  const auto w = fixtures::make_world(2, 400, 12);
  auto cfg = small_config();
  cfg.max_rounds = 1;
  const auto h = train_hybridfl(cfg, w.part.tx_view, w.part.bank_views, w.split);
  CHECK_THROWS_AS(score(h.bundle, w.part.tx_view, w.split.test, nullptr), UsageError);
  CHECK_THROWS_AS(evaluate(h.bundle, w.part.tx_view, w.split.test, nullptr), UsageError);
  const auto l = train_local_only(cfg, w.part.tx_view, w.split);
  CHECK(score(l.bundle, w.part.tx_view, w.split.test, nullptr).size() == w.split.test.size());
}

TEST_CASE("local mode never opens a bank file") {
  auto ec = ExperimentConfig::for_preset(Preset::kAmlsim);
  ec.generator.n_transactions = 800;
  ec.generator.accounts_per_bank = 40;
  ec.train = small_config();
  ec.train.max_rounds = 1;
  const auto dir = testsupport::scratch_dir("local_audit");
  write_prepared_data(prepare_data(ec, generate(ec.generator)), dir, ec.provenance());

  auto touched_bank = [] {
    const auto files = file_audit::opened();
    return std::any_of(files.begin(), files.end(), [](const std::string& f) {
      return std::filesystem::path(f).filename().string().rfind("bank_", 0) == 0;
    });
  };
  file_audit::reset();
  const auto local = load_views(dir, Mode::kLocal);
  CHECK(local.bank_views.empty());
  run_mode(ec, Mode::kLocal, local);
  CHECK_FALSE(touched_bank());
  CHECK_FALSE(file_audit::opened().empty());

  file_audit::reset();
  const auto hybrid = load_views(dir, Mode::kHybrid);
  CHECK(hybrid.bank_views.size() == 2);
  CHECK(touched_bank());
}

TEST_CASE("history csv layout") {
  TrainHistory h;
  h.rounds.push_back({1, 0.5, 0.25, 0.5, 0.5, 0.5, 10, 100, 1.0});
  const auto dir = testsupport::scratch_dir("history_csv");
  write_history_csv(h, dir / "history.csv");
  std::ifstream in(dir / "history.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "round,train_loss,val_auprc,val_precision,val_recall,val_f1,messages,bytes");
  std::getline(in, line);
  CHECK(line == "1,0.5,0.25,0.5,0.5,0.5,10,100");
}
