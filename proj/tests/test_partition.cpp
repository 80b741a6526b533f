#include <doctest.h>

#include <algorithm>
#include <set>

#include "hybridfl/csv.hpp"
#include "hybridfl/datagen.hpp"
#include "hybridfl/errors.hpp"
#include "hybridfl/partition.hpp"
#include "support.hpp"

using namespace hybridfl;

namespace {

GeneratedData small_data(std::uint64_t seed = 7) {
  GeneratorConfig c;
  c.n_banks = 2;
  c.accounts_per_bank = 50;
  c.n_transactions = 1000;
  c.fraud_ratio = 0.3;
  c.seed = seed;
  return generate(c);
}

HybridPartition small_partition(const GeneratedData& d) {
  const auto feats = derive_role_features(d.transactions, d.accounts, d.transactions.back().timestamp);
  return split_hybrid(d.accounts, d.transactions, feats);
}

bool has_column(const FeatureLayout& l, const std::string& prefix) {
  return std::any_of(l.names.begin(), l.names.end(),
                     [&](const std::string& n) { return n.rfind(prefix, 0) == 0; });
}

}  // namespace

TEST_CASE("split_hybrid: one view per bank with only its accounts") {
  const auto d = small_data();
  const auto part = small_partition(d);
  REQUIRE(part.bank_views.size() == 2);
  std::map<std::string, std::string> owner;
  for (const auto& a : d.accounts) owner[a.account_id] = a.bank_id;
  std::set<std::string> seen;
  for (const auto& [id, view] : part.bank_views) {
    CHECK(view.bank_id == id);
    for (const auto& acc : view.account_ids) {
      CHECK(owner.at(acc) == id);
      CHECK(seen.insert(acc).second);
    }
    CHECK(view.features.rows() == view.account_ids.size());
    CHECK(view.features.cols() == view.general_width + 2 * view.role_width);
  }
  CHECK(seen.size() == d.accounts.size());
}

TEST_CASE("split_hybrid: transaction party holds no account attributes") {
  const auto part = small_partition(small_data());
  for (const char* field : {"prior_sar_count", "initial_deposit", "account_age", "account_type",
                            "account_status", "country", "gender", "out_", "in_"}) {
    CAPTURE(field);
    CHECK_FALSE(has_column(part.tx_view.layout, field));
  }
  CHECK(part.tx_view.features.cols() == part.tx_view.layout.size());
  // Banks hold no labels and no transaction attributes.
  for (const auto& [id, view] : part.bank_views) {
    for (const char* field : {"label", "amount", "tx_type", "time_of_day"}) {
      CAPTURE(field);
      CHECK_FALSE(has_column(view.layout, field));
    }
  }
}

TEST_CASE("split_hybrid: bank ids come from account ownership") {
  std::vector<AccountRecord> accounts(3);
  accounts[0].account_id = "a1";
  accounts[0].bank_id = "A";
  accounts[1].account_id = "b1";
  accounts[1].bank_id = "B";
  accounts[2].account_id = "a2";
  accounts[2].bank_id = "A";
  std::vector<TransactionRecord> txs(2);
  txs[0] = {"t1", "a1", "b1", 10.0, 100, 0, 1};
  txs[1] = {"t2", "b1", "a2", 20.0, 200, 1, 0};
  const auto feats = derive_role_features(txs, accounts, 200);
  const auto part = split_hybrid(accounts, txs, feats);
  const auto& r = part.tx_view.rows[part.tx_view.row_index("t1")];
  CHECK(r.sender_bank_id == "A");
  CHECK(r.receiver_bank_id == "B");
  CHECK(r.label == 1);
  CHECK(part.tx_view.routing.at("a2") == "A");
  CHECK(part.tx_view.bank_ids() == std::vector<std::string>{"A", "B"});

  CHECK_THROWS_AS(split_hybrid(accounts, txs, feats, {}, std::vector<std::string>{"A"}),
                  IntegrityError);
  CHECK_THROWS_AS(part.tx_view.row_index("nope"), IntegrityError);
}

TEST_CASE("stratified split arithmetic") {
  const auto part = small_partition(small_data());
  const double ratios[] = {0.7, 0.15, 0.15};
  const auto s = split_train_val_test(part.tx_view, ratios, 11);
  auto positives = [&](const std::vector<std::string>& ids) {
    std::size_t n = 0;
    for (const auto& id : ids) n += part.tx_view.rows[part.tx_view.row_index(id)].label;
    return n;
  };
  CHECK(s.train.size() == doctest::Approx(700).epsilon(0.002));
  CHECK(s.validation.size() == doctest::Approx(150).epsilon(0.01));
  CHECK(s.test.size() == doctest::Approx(150).epsilon(0.01));
  CHECK(std::abs(static_cast<int>(positives(s.train)) - 210) <= 1);
  CHECK(std::abs(static_cast<int>(positives(s.validation)) - 45) <= 1);
  CHECK(std::abs(static_cast<int>(positives(s.test)) - 45) <= 1);

  std::set<std::string> all;
  for (const auto* part_ids : {&s.train, &s.validation, &s.test})
    for (const auto& id : *part_ids) CHECK(all.insert(id).second);
  CHECK(all.size() == 1000);

  const auto again = split_train_val_test(part.tx_view, ratios, 11);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  CHECK(split_train_val_test(part.tx_view, ratios, 12).train != s.train);
}

TEST_CASE("stratified split keeps positive rate within one point") {
  GeneratorConfig c;
  c.n_transactions = 5000;
  c.fraud_ratio = 0.3;
  const auto d = generate(c);
  const auto part = small_partition(d);
  const double ratios[] = {0.7, 0.15, 0.15};
  const auto s = split_train_val_test(part.tx_view, ratios, 3);
  for (const auto* ids : {&s.train, &s.validation, &s.test}) {
    double pos = 0;
    for (const auto& id : *ids) pos += part.tx_view.rows[part.tx_view.row_index(id)].label;
    CHECK(std::abs(pos / static_cast<double>(ids->size()) - 0.3) < 0.01);
  }
}

TEST_CASE("two-way split and errors") {
  const auto part = small_partition(small_data());
  const double two[] = {0.75, 0.25};
  const auto s = split_train_val_test(part.tx_view, two, 1);
  CHECK(s.test.empty());
  CHECK(s.train.size() + s.validation.size() == 1000);

  const double bad_sum[] = {0.5, 0.2, 0.2};
  CHECK_THROWS_AS(split_train_val_test(part.tx_view, bad_sum, 1), ConfigError);
  const double negative[] = {0.9, 0.2, -0.1};
  CHECK_THROWS_AS(split_train_val_test(part.tx_view, negative, 1), ConfigError);

  // Two positives cannot cover three splits.
  std::vector<AccountRecord> accounts(2);
  accounts[0] = {"a", "A", 0, 0, 0, 0, 0, 1.0, 1};
  accounts[1] = {"b", "A", 0, 0, 0, 0, 0, 1.0, 1};
  std::vector<TransactionRecord> txs;
  for (int i = 0; i < 40; ++i) {
    txs.push_back({"t" + std::to_string(i), "a", "b", 1.0, i, 0, i < 2 ? 1 : 0});
  }
  const auto tiny = split_hybrid(accounts, txs, derive_role_features(txs, accounts, 40));
  const double three[] = {0.7, 0.15, 0.15};
  CHECK_THROWS_AS(split_train_val_test(tiny.tx_view, three, 1), StratificationError);
}

TEST_CASE("scaler: hand z-scores, constants and one-hot columns") {
  FeatureLayout layout;
  layout.add("x");
  layout.add("c");
  layout.add("flag=1", true);
  const Matrix m{{10, 5, 0}, {20, 5, 1}, {30, 5, 0}};
  const std::size_t rows[] = {0, 1, 2};
  const auto sc = fit_scaler(m, rows, layout);
  const Matrix out = apply_scaler(sc, m);
  CHECK(out(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(out(1, 0) == doctest::Approx(0.0));
  CHECK(out(2, 0) == doctest::Approx(1.2247).epsilon(1e-4));
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(out(r, 1) == 0.0);
    CHECK(out(r, 2) == m(r, 2));
  }
  CHECK(sc.std[1] == 1.0);
  CHECK_THROWS_AS(apply_scaler(sc, Matrix(2, 4)), ShapeError);
}

TEST_CASE("scaler: train rows standardise to zero mean and unit std") {
  const auto part = small_partition(small_data());
  const auto& v = part.tx_view;
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < v.features.rows(); r += 2) rows.push_back(r);
  const auto sc = fit_scaler(v.features, rows, v.layout);
  const Matrix scaled = apply_scaler(sc, v.features.gather_rows(rows));
  for (std::size_t c = 0; c < scaled.cols(); ++c) {
    if (v.layout.one_hot[c]) continue;
    double mean = 0, sq = 0;
    for (std::size_t r = 0; r < scaled.rows(); ++r) mean += scaled(r, c);
    mean /= static_cast<double>(scaled.rows());
    for (std::size_t r = 0; r < scaled.rows(); ++r) sq += (scaled(r, c) - mean) * (scaled(r, c) - mean);
    const double sd = std::sqrt(sq / static_cast<double>(scaled.rows()));
    CAPTURE(v.layout.names[c]);
    CHECK(std::abs(mean) < 1e-6);
    if (sc.std[c] != 1.0) CHECK(sd == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("bank role columns and referenced accounts") {
  const auto d = small_data();
  const auto part = small_partition(d);
  const auto& bank = part.bank_views.begin()->second;
  const auto s = bank.role_columns(Role::kSender);
  const auto r = bank.role_columns(Role::kReceiver);
  CHECK(s.size() == bank.role_input_width());
  CHECK(r.size() == bank.role_input_width());
  CHECK(std::equal(s.begin(), s.begin() + static_cast<long>(bank.general_width), r.begin()));
  CHECK(s.back() + 1 == bank.general_width + bank.role_width);
  CHECK(r.back() + 1 == bank.features.cols());

  std::vector<std::string> ids = {d.transactions[0].tx_id, d.transactions[1].tx_id};
  const auto refs = accounts_referenced(part.tx_view, ids, bank.bank_id);
  for (const auto& acc : refs) CHECK(part.tx_view.routing.at(acc) == bank.bank_id);
}

TEST_CASE("merged table arity") {
  const auto part = small_partition(small_data());
  const auto merged = build_merged_table(part.tx_view, part.bank_views);
  const auto& b = part.bank_views.begin()->second;
  CHECK(merged.features.cols() == part.tx_view.features.cols() + 2 * b.role_input_width());
  CHECK(merged.features.rows() == part.tx_view.rows.size());
  CHECK(merged.layout.size() == merged.features.cols());
  for (std::size_t i = 0; i < merged.tx_ids.size(); ++i) {
    CHECK(merged.labels[i] == part.tx_view.rows[part.tx_view.row_index(merged.tx_ids[i])].label);
  }
}

TEST_CASE("view files round trip") {
  const auto dir = testsupport::scratch_dir("partition_io");
  const auto part = small_partition(small_data());
  write_transaction_view_csv(part.tx_view, dir / "txparty.csv");
  const auto tx = read_transaction_view_csv(dir / "txparty.csv");
  CHECK(tx.rows.size() == part.tx_view.rows.size());
  CHECK(tx.layout.names == part.tx_view.layout.names);
  CHECK(tx.routing == part.tx_view.routing);
  for (std::size_t k = 0; k < tx.features.size(); ++k) {
    CHECK(tx.features.data()[k] == canonical_real(part.tx_view.features.data()[k]));
  }

  for (const auto& [id, view] : part.bank_views) {
    const auto path = dir / bank_view_filename(id);
    write_bank_view_csv(view, path);
    const auto back = read_bank_view_csv(path, id);
    CHECK(back.account_ids == view.account_ids);
    CHECK(back.general_width == view.general_width);
    CHECK(back.role_width == view.role_width);
  }

  const double ratios[] = {0.7, 0.15, 0.15};
  const auto s = split_train_val_test(part.tx_view, ratios, 5);
  write_splits_csv(s, part.tx_view, dir / "splits.csv");
  const auto s2 = read_splits_csv(dir / "splits.csv");
  auto sorted = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  CHECK(sorted(s2.train) == sorted(s.train));
  CHECK(sorted(s2.validation) == sorted(s.validation));
  CHECK(sorted(s2.test) == sorted(s.test));
}

TEST_CASE("bank view files never carry labels") {
  const auto dir = testsupport::scratch_dir("partition_nolabel");
  const auto part = small_partition(small_data());
  for (const auto& [id, view] : part.bank_views) {
    write_bank_view_csv(view, dir / bank_view_filename(id));
    std::ifstream in(dir / bank_view_filename(id));
    std::string line;
    while (std::getline(in, line) && line.rfind('#', 0) == 0) {
    }
    CHECK(line.find("label") == std::string::npos);
    CHECK(line.find("tx_id") == std::string::npos);
  }
}
