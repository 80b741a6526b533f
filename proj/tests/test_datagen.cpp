#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "hybridfl/datagen.hpp"
#include "hybridfl/errors.hpp"
#include "support.hpp"

using namespace hybridfl;

namespace {

GeneratorConfig small_config() {
  GeneratorConfig c;
  c.n_banks = 2;
  c.accounts_per_bank = 50;
  c.n_transactions = 1000;
  c.fraud_ratio = 0.3;
  c.seed = 7;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AccountRecord account(const std::string& id, const std::string& bank = "BANK00") {
  AccountRecord a;
  a.account_id = id;
  a.bank_id = bank;
  return a;
}

TransactionRecord tx(const std::string& id, const std::string& from, const std::string& to,
                     double amount, std::int64_t ts) {
  TransactionRecord t;
  t.tx_id = id;
  t.sender_id = from;
  t.receiver_id = to;
  t.amount = amount;
  t.timestamp = ts;
  return t;
}

}  // namespace

TEST_CASE("generate: exact fraud count and shape") {
  const auto data = generate(small_config());
  CHECK(data.accounts.size() == 100);
  REQUIRE(data.transactions.size() == 1000);
  std::size_t pos = 0;
  for (const auto& t : data.transactions) pos += t.label == 1;
  CHECK(pos == 300);
  CHECK(fraud_count(small_config()) == 300);
}

TEST_CASE("generate: referential integrity and record invariants") {
  const auto data = generate(small_config());
  std::set<std::string> ids;
  std::set<std::string> banks;
  for (const auto& a : data.accounts) {
    CHECK(ids.insert(a.account_id).second);
    banks.insert(a.bank_id);
    CHECK(a.initial_deposit >= 0);
    CHECK(a.account_age >= 0);
    CHECK(a.prior_sar_count >= 0);
  }
  CHECK(banks.size() == 2);
  std::set<std::string> tx_ids;
  std::int64_t last = std::numeric_limits<std::int64_t>::min();
  for (const auto& t : data.transactions) {
    CHECK(tx_ids.insert(t.tx_id).second);
    CHECK(t.sender_id != t.receiver_id);
    CHECK(ids.count(t.sender_id) == 1);
    CHECK(ids.count(t.receiver_id) == 1);
    CHECK(t.amount > 0);
    CHECK(t.timestamp >= last);
    last = t.timestamp;
  }
}

TEST_CASE("generate: same seed gives byte-identical files, other seed differs") {
  const auto dir = testsupport::scratch_dir("datagen_det");
  const auto a = generate(small_config());
  const auto b = generate(small_config());
  write_csv(a.transactions, dir / "a.csv");
  write_csv(b.transactions, dir / "b.csv");
  write_csv(a.accounts, dir / "aa.csv");
  write_csv(b.accounts, dir / "ba.csv");
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "aa.csv") == slurp(dir / "ba.csv"));
  auto other = small_config();
  other.seed = 8;
  CHECK(generate(other).transactions != a.transactions);
}

TEST_CASE("generate: presets") {
  const auto aml = GeneratorConfig::amlsim();
  CHECK(aml.n_banks == 2);
  CHECK(aml.fraud_ratio == doctest::Approx(0.3));
  const auto sw = GeneratorConfig::swift();
  CHECK(sw.n_banks == 10);
  CHECK(sw.n_transactions == 100000);
  CHECK(sw.fraud_ratio == doctest::Approx(0.002));
}

TEST_CASE("generate: config errors") {
  auto c = small_config();
  c.n_banks = 1;
  c.accounts_per_bank = 1;
  CHECK_THROWS_AS(generate(c), ConfigError);
  c = small_config();
  c.fraud_ratio = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.typologies = {0, 0, 0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.typologies.fan_in = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.n_transactions = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("role features: hand arithmetic") {
  const std::vector<AccountRecord> accounts = {account("A"), account("B"), account("C")};
  const std::vector<TransactionRecord> txs = {tx("t1", "A", "B", 10, 100),
                                              tx("t2", "A", "B", 20, 200),
                                              tx("t3", "A", "B", 30, 300)};
  const auto f = derive_role_features(txs, accounts, 1000);
  const auto& a = f.at("A").outgoing;
  CHECK(a.count == 3);
  CHECK(a.total == doctest::Approx(60));
  CHECK(a.mean == doctest::Approx(20));
  CHECK(a.std == doctest::Approx(std::sqrt(200.0 / 3.0)));
  CHECK(f.at("B").incoming.count == 3);
  CHECK(f.at("A").incoming == RoleStats{});
  CHECK(f.at("C").outgoing == RoleStats{});
  CHECK(f.at("C").incoming == RoleStats{});
}

TEST_CASE("role features: 24h velocity window") {
  const std::vector<AccountRecord> accounts = {account("A"), account("B")};
  const std::int64_t as_of = 100 * 3600;
  CHECK(derive_role_features({tx("t", "A", "B", 5, as_of - 7 * 3600)}, accounts, as_of)
            .at("A")
            .outgoing.velocity_24h == 1);
  CHECK(derive_role_features({tx("t", "A", "B", 5, as_of - 25 * 3600)}, accounts, as_of)
            .at("A")
            .outgoing.velocity_24h == 0);
  // Window is (as_of - 24h, as_of].
  CHECK(derive_role_features({tx("t", "A", "B", 5, as_of - 24 * 3600)}, accounts, as_of)
            .at("A")
            .outgoing.velocity_24h == 0);
  CHECK(derive_role_features({tx("t", "A", "B", 5, as_of)}, accounts, as_of)
            .at("A")
            .outgoing.velocity_24h == 1);
}

TEST_CASE("role features: later transactions are ignored") {
  const auto data = generate(small_config());
  const std::int64_t cut = data.transactions[600].timestamp;
  std::vector<TransactionRecord> early;
  for (const auto& t : data.transactions)
    if (t.timestamp <= cut) early.push_back(t);
  CHECK(derive_role_features(data.transactions, data.accounts, cut) ==
        derive_role_features(early, data.accounts, cut));
}

TEST_CASE("role features: unknown account") {
  const std::vector<AccountRecord> accounts = {account("A")};
  CHECK_THROWS_AS(derive_role_features({tx("t", "A", "ZZ", 1, 1)}, accounts, 10), IntegrityError);
}

TEST_CASE("csv round trips") {
  const auto dir = testsupport::scratch_dir("datagen_csv");
  const auto data = generate(small_config());
  write_csv(data.transactions, dir / "transactions.csv", Provenance{"abc", 7});
  write_csv(data.accounts, dir / "accounts.csv");
  CHECK(read_transactions_csv(dir / "transactions.csv") == data.transactions);
  CHECK(read_accounts_csv(dir / "accounts.csv") == data.accounts);
  CHECK(slurp(dir / "transactions.csv").rfind("# config_hash=abc,seed=7\n", 0) == 0);

  const auto feats = derive_role_features(data.transactions, data.accounts,
                                          data.transactions.back().timestamp);
  write_role_features_csv(feats, data.accounts, dir / "role_features.csv");
  const auto back = read_role_features_csv(dir / "role_features.csv");
  REQUIRE(back.size() == feats.size());
  // Reals are stored with 9 significant digits.
  for (const auto& [id, f] : feats) {
    const auto& g = back.at(id);
    CHECK(g.outgoing.count == f.outgoing.count);
    CHECK(g.outgoing.total == canonical_real(f.outgoing.total));
    CHECK(g.incoming.std == canonical_real(f.incoming.std));
  }
}

TEST_CASE("csv: columns are mapped by name") {
  const auto dir = testsupport::scratch_dir("datagen_cols");
  {
    std::ofstream out(dir / "t.csv");
    out << "label,tx_type,timestamp,amount,receiver_id,sender_id,tx_id\n";
    out << "1,2,500,12.5,B,A,t1\n";
  }
  const auto t = read_transactions_csv(dir / "t.csv");
  REQUIRE(t.size() == 1);
  CHECK(t[0].tx_id == "t1");
  CHECK(t[0].sender_id == "A");
  CHECK(t[0].amount == 12.5);
  CHECK(t[0].label == 1);
}

TEST_CASE("csv: schema and parse errors") {
  const auto dir = testsupport::scratch_dir("datagen_bad");
  {
    std::ofstream out(dir / "missing.csv");
    out << "tx_id,sender_id,receiver_id,amount,timestamp,tx_type\n";
    out << "t1,A,B,1,1,0\n";
  }
  try {
    read_transactions_csv(dir / "missing.csv");
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("label") != std::string::npos);
  }
  {
    std::ofstream out(dir / "ragged.csv");
    out << "tx_id,sender_id,receiver_id,amount,timestamp,tx_type,label\n";
    out << "t1,A,B,1,1,0,0\n";
    out << "t2,A,B,1,1\n";
  }
  try {
    read_transactions_csv(dir / "ragged.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  {
    std::ofstream out(dir / "nan.csv");
    out << "tx_id,sender_id,receiver_id,amount,timestamp,tx_type,label\n";
    out << "t1,A,B,abc,1,0,0\n";
  }
  CHECK_THROWS_AS(read_transactions_csv(dir / "nan.csv"), ParseError);
}

TEST_CASE("format_real uses nine significant digits") {
  CHECK(format_real(0.1234567891234) == "0.123456789");
  CHECK(format_real(60.0) == "60");
  CHECK(canonical_real(1.0 / 3.0) == 0.333333333);
}
