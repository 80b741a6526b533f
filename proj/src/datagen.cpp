#include "hybridfl/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "hybridfl/errors.hpp"
#include "hybridfl/random.hpp"

namespace hybridfl {
namespace {

constexpr std::int64_t kSecondsPerDay = 86400;
constexpr std::int64_t kSecondsPerHour = 3600;

std::string format_id(const char* prefix, int width, std::int64_t value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*lld", prefix, width, static_cast<long long>(value));
  return buf;
}

// Legitimate accounts favour low category codes, bad accounts high ones.
std::vector<double> category_weights(int cardinality, bool skew_high) {
  std::vector<double> w(static_cast<std::size_t>(cardinality));
  for (int k = 0; k < cardinality; ++k) {
    const int rank = skew_high ? cardinality - 1 - k : k;
    w[static_cast<std::size_t>(k)] = std::pow(0.6, rank);
  }
  return w;
}

int draw_category(Rng& rng, const std::vector<double>& weights) {
  std::discrete_distribution<int> dist(weights.begin(), weights.end());
  return dist(rng);
}

double money(double x) {
  const double cents = std::max(1.0, std::round(x * 100.0));
  return canonical_real(cents / 100.0);
}

class Generator {
 public:
  explicit Generator(const GeneratorConfig& config) : cfg_(config), rng_(config.seed) {}

  GeneratedData run() {
    make_accounts();
    const std::int64_t n_fraud = fraud_count(cfg_);
    const std::int64_t n_legit = cfg_.n_transactions - n_fraud;
    std::vector<Pending> pending;
    pending.reserve(static_cast<std::size_t>(cfg_.n_transactions));
    for (std::int64_t i = 0; i < n_legit; ++i) pending.push_back(legit_transaction());
    std::int64_t produced = 0;
    while (produced < n_fraud) {
      auto episode = fraud_episode();
      for (auto& p : episode) {
        if (produced == n_fraud) break;
        pending.push_back(std::move(p));
        ++produced;
      }
    }
    std::stable_sort(pending.begin(), pending.end(),
                     [](const Pending& a, const Pending& b) { return a.timestamp < b.timestamp; });
    GeneratedData out;
    out.accounts = accounts_;
    out.transactions.reserve(pending.size());
    for (std::size_t i = 0; i < pending.size(); ++i) {
      const auto& p = pending[i];
      out.transactions.push_back({format_id("TX", 8, static_cast<std::int64_t>(i)),
                                  accounts_[p.sender].account_id,
                                  accounts_[p.receiver].account_id, p.amount,
                                  cfg_.epoch_start + p.timestamp, p.tx_type, p.label});
    }
    return out;
  }

 private:
  struct Pending {
    std::size_t sender;
    std::size_t receiver;
    double amount;
    std::int64_t timestamp;  // offset from epoch_start
    int tx_type;
    int label;
  };

  void make_accounts() {
    const std::size_t n = static_cast<std::size_t>(cfg_.n_banks) *
                          static_cast<std::size_t>(cfg_.accounts_per_bank);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng_);
    const auto n_bad = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(cfg_.bad_account_fraction * static_cast<double>(n))),
        1, n);
    is_bad_.assign(n, false);
    for (std::size_t i = 0; i < n_bad; ++i) is_bad_[order[i]] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (is_bad_[i]) bad_.push_back(i);
    }

    const auto& cat = cfg_.categories;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    accounts_.reserve(n);
    for (int b = 0; b < cfg_.n_banks; ++b) {
      for (int j = 0; j < cfg_.accounts_per_bank; ++j) {
        const std::size_t idx = accounts_.size();
        const bool bad = is_bad_[idx];
        AccountRecord a;
        a.account_id = format_id("AC", 8, static_cast<std::int64_t>(idx));
        a.bank_id = format_id("BANK", 2, b);
        const bool digital = cfg_.digital_bank_profile > 0.0 && b % 2 == 1;
        const bool inverted = digital && bad && unit(rng_) < cfg_.digital_bank_profile;
        const bool skew_high = digital ? !inverted : bad;
        a.account_type = draw_category(rng_, category_weights(cat.account_type, skew_high));
        a.account_status = draw_category(rng_, category_weights(cat.account_status, skew_high));
        a.country = draw_category(rng_, category_weights(cat.country, skew_high && unit(rng_) < 0.7));
        a.gender = draw_category(rng_, std::vector<double>(static_cast<std::size_t>(cat.gender), 1.0));
        std::poisson_distribution<std::int64_t> sar(bad ? cfg_.bad_prior_sar_rate : 0.06);
        a.prior_sar_count = sar(rng_);
        // Banks differ in customer base: deposits shift with the bank index.
        const double bank_shift = cfg_.bank_deposit_shift * static_cast<double>(b % 3) +
                                  (digital ? cfg_.digital_deposit_offset : 0.0);
        std::lognormal_distribution<double> deposit(bad ? 6.3 : 7.4 + bank_shift, 1.0);
        a.initial_deposit = money(deposit(rng_));
        const double u = unit(rng_);
        if (inverted) {
          a.account_age = std::uniform_int_distribution<std::int64_t>(1800, 3650)(rng_);
        } else if (digital || (bad && u < 0.65)) {
          a.account_age = std::uniform_int_distribution<std::int64_t>(0, digital ? 720 : 180)(rng_);
        } else {
          a.account_age = std::uniform_int_distribution<std::int64_t>(30, 3650)(rng_);
        }
        accounts_.push_back(std::move(a));
      }
    }
  }

  std::size_t any_account() {
    return std::uniform_int_distribution<std::size_t>(0, accounts_.size() - 1)(rng_);
  }

  std::size_t any_account_except(std::size_t excluded) {
    std::size_t a = any_account();
    while (a == excluded) a = any_account();
    return a;
  }

  std::size_t bad_account_except(std::size_t excluded) {
    if (bad_.size() < 2 && (bad_.empty() || bad_.front() == excluded)) {
      return any_account_except(excluded);
    }
    std::uniform_int_distribution<std::size_t> pick(0, bad_.size() - 1);
    std::size_t a = bad_[pick(rng_)];
    while (a == excluded) a = bad_[pick(rng_)];
    return a;
  }

  std::size_t mule_for(std::size_t hub) {
    std::bernoulli_distribution bad(cfg_.mule_bad_probability);
    return bad(rng_) ? bad_account_except(hub) : any_account_except(hub);
  }

  std::int64_t horizon() const { return cfg_.time_horizon_days * kSecondsPerDay; }

  std::int64_t sample_time(double night_probability) {
    const std::int64_t day =
        std::uniform_int_distribution<std::int64_t>(0, cfg_.time_horizon_days - 1)(rng_);
    const bool night = std::bernoulli_distribution(night_probability)(rng_);
    const std::int64_t lo = night ? 0 : 6 * kSecondsPerHour;
    const std::int64_t hi = night ? 6 * kSecondsPerHour - 1 : kSecondsPerDay - 1;
    return day * kSecondsPerDay + std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }

  int legit_tx_type() {
    std::vector<double> w(static_cast<std::size_t>(cfg_.categories.tx_type));
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = 1.0 / std::pow(static_cast<double>(k + 1), 1.5);
    return draw_category(rng_, w);
  }

  int fraud_tx_type() {
    return draw_category(rng_, std::vector<double>(static_cast<std::size_t>(cfg_.categories.tx_type), 1.0));
  }

  Pending legit_transaction() {
    Pending p{};
    p.sender = any_account();
    p.receiver = any_account_except(p.sender);
    if (cfg_.personal_amount_sigma > 0.0) {
      const double level = std::log(accounts_[p.sender].initial_deposit) - cfg_.deposit_amount_gap;
      std::lognormal_distribution<double> amount(level, cfg_.personal_amount_sigma);
      p.amount = money(amount(rng_));
    } else {
      std::lognormal_distribution<double> amount(cfg_.amount_log_mean, cfg_.amount_log_sigma);
      p.amount = money(amount(rng_));
    }
    p.timestamp = sample_time(cfg_.legit_night_probability);
    p.tx_type = legit_tx_type();
    p.label = 0;
    return p;
  }

  std::vector<Pending> fraud_episode() {
    const auto& mix = cfg_.typologies;
    std::discrete_distribution<int> typology({mix.fan_out, mix.fan_in, mix.high_amount_burst});
    const int kind = typology(rng_);
    const std::size_t hub = bad_.empty() ? any_account() : bad_[std::uniform_int_distribution<std::size_t>(0, bad_.size() - 1)(rng_)];
    const std::int64_t start = sample_time(cfg_.fraud_night_probability);

    std::vector<Pending> out;
    int count = 0;
    std::int64_t window = 0;
    double log_mean = cfg_.amount_log_mean + cfg_.fraud_amount_log_shift;
    double log_sigma = cfg_.amount_log_sigma * 0.8;
    if (kind == 2) {
      count = std::uniform_int_distribution<int>(2, 6)(rng_);
      window = 2 * kSecondsPerHour;
      log_mean = cfg_.amount_log_mean + cfg_.burst_amount_log_shift;
      log_sigma = 0.6;
    } else {
      count = std::uniform_int_distribution<int>(4, 12)(rng_);
      window = 6 * kSecondsPerHour;
    }
    std::lognormal_distribution<double> amount(log_mean, log_sigma);
    std::uniform_int_distribution<std::int64_t> offset(0, window);
    for (int i = 0; i < count; ++i) {
      Pending p{};
      switch (kind) {
        case 0:  // fan-out: one sender, many receivers
          p.sender = hub;
          p.receiver = mule_for(hub);
          break;
        case 1:  // fan-in: many senders, one receiver
          p.receiver = hub;
          p.sender = mule_for(hub);
          break;
        default:  // high-amount burst from one sender
          p.sender = hub;
          p.receiver = any_account_except(hub);
          break;
      }
      p.amount = money(amount(rng_));
      p.timestamp = std::min(start + offset(rng_), horizon() - 1);
      p.tx_type = fraud_tx_type();
      p.label = 1;
      out.push_back(p);
    }
    return out;
  }

  const GeneratorConfig& cfg_;
  Rng rng_;
  std::vector<AccountRecord> accounts_;
  std::vector<bool> is_bad_;
  std::vector<std::size_t> bad_;
};

std::string role_name(bool sender) { return sender ? "sender" : "receiver"; }

}  // namespace

void GeneratorConfig::validate() const {
  if (n_banks < 1) throw ConfigError("generator.n_banks must be >= 1");
  if (accounts_per_bank < 2) {
    throw ConfigError(
        "generator.accounts_per_bank must be >= 2 (sender and receiver must differ)");
  }
  if (n_transactions < 1) throw ConfigError("generator.n_transactions must be >= 1");
  if (!(fraud_ratio > 0.0 && fraud_ratio < 1.0)) {
    throw ConfigError("generator.fraud_ratio must lie in (0, 1)");
  }
  const auto& t = typologies;
  if (t.fan_out < 0 || t.fan_in < 0 || t.high_amount_burst < 0 ||
      !(t.fan_out + t.fan_in + t.high_amount_burst > 0)) {
    throw ConfigError("generator.typologies weights must be non-negative with a positive sum");
  }
  const auto& c = categories;
  if (c.account_type < 1 || c.account_status < 1 || c.country < 1 || c.gender < 1 ||
      c.tx_type < 1) {
    throw ConfigError("generator.categories cardinalities must be >= 1");
  }
  if (!(bad_account_fraction > 0.0 && bad_account_fraction < 1.0)) {
    throw ConfigError("generator.bad_account_fraction must lie in (0, 1)");
  }
  if (!(mule_bad_probability >= 0.0 && mule_bad_probability <= 1.0)) {
    throw ConfigError("generator.mule_bad_probability must lie in [0, 1]");
  }
  if (!(amount_log_sigma > 0.0)) throw ConfigError("generator.amount_log_sigma must be > 0");
  if (!(personal_amount_sigma >= 0.0)) {
    throw ConfigError("generator.personal_amount_sigma must be >= 0");
  }
  if (!(fraud_night_probability >= 0.0 && fraud_night_probability <= 1.0) ||
      !(legit_night_probability >= 0.0 && legit_night_probability <= 1.0)) {
    throw ConfigError("generator night probabilities must lie in [0, 1]");
  }
  if (time_horizon_days < 1) throw ConfigError("generator.time_horizon_days must be >= 1");
}

GeneratorConfig GeneratorConfig::amlsim() { return GeneratorConfig{}; }

GeneratorConfig GeneratorConfig::swift() {
  GeneratorConfig c;
  c.n_banks = 10;
  c.accounts_per_bank = 1000;
  c.n_transactions = 100000;
  c.fraud_ratio = 0.002;
  c.bad_account_fraction = 0.004;
  // Roughly a quarter of fraud rows are extreme bursts that the amount
  // alone gives away; the rest need account context.
  c.typologies.high_amount_burst = 1.2;
  c.burst_amount_log_shift = 6.0;
  return c;
}

std::int64_t fraud_count(const GeneratorConfig& config) {
  const double exact = config.fraud_ratio * static_cast<double>(config.n_transactions);
  // The tolerance absorbs representation error such as 0.3 * 1000.
  const auto n = static_cast<std::int64_t>(std::ceil(exact - 1e-9));
  return std::clamp<std::int64_t>(n, 1, config.n_transactions);
}

GeneratedData generate(const GeneratorConfig& config) {
  config.validate();
  return Generator(config).run();
}

RoleFeatureMap derive_role_features(const std::vector<TransactionRecord>& transactions,
                                    const std::vector<AccountRecord>& accounts,
                                    std::int64_t as_of) {
  struct Acc {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  RoleFeatureMap features;
  features.reserve(accounts.size());
  std::unordered_map<std::string, std::pair<Acc, Acc>> sums;
  for (const auto& a : accounts) {
    features[a.account_id].account_id = a.account_id;
    sums[a.account_id];
  }
  const std::int64_t window_start = as_of - kSecondsPerDay;
  for (const auto& t : transactions) {
    auto s = features.find(t.sender_id);
    if (s == features.end()) throw IntegrityError("unknown sender account " + t.sender_id);
    auto r = features.find(t.receiver_id);
    if (r == features.end()) throw IntegrityError("unknown receiver account " + t.receiver_id);
    if (t.timestamp > as_of) continue;
    const bool recent = t.timestamp > window_start;
    auto update = [&](RoleStats& st, Acc& acc) {
      ++st.count;
      st.total += t.amount;
      acc.sum_sq += t.amount * t.amount;
      if (recent) ++st.velocity_24h;
    };
    auto& sender_sums = sums[t.sender_id];
    auto& receiver_sums = sums[t.receiver_id];
    update(s->second.outgoing, sender_sums.first);
    update(r->second.incoming, receiver_sums.second);
  }
  auto finish = [](RoleStats& st, const Acc& acc) {
    if (st.count == 0) return;
    const double n = static_cast<double>(st.count);
    st.mean = st.total / n;
    st.std = std::sqrt(std::max(0.0, acc.sum_sq / n - st.mean * st.mean));
  };
  for (auto& [id, f] : features) {
    const auto& acc = sums[id];
    finish(f.outgoing, acc.first);
    finish(f.incoming, acc.second);
  }
  return features;
}

const std::vector<std::string> kAccountColumns = {
    "account_id", "bank_id",         "account_type",    "account_status", "country",
    "gender",     "prior_sar_count", "initial_deposit", "account_age"};
const std::vector<std::string> kTransactionColumns = {
    "tx_id", "sender_id", "receiver_id", "amount", "timestamp", "tx_type", "label"};
const std::vector<std::string> kRoleFeatureColumns = {
    "account_id", "role", "count", "total", "mean", "std", "velocity_24h"};

void write_csv(const std::vector<AccountRecord>& accounts, const std::filesystem::path& path,
               const std::optional<Provenance>& provenance) {
  CsvWriter w(path, kAccountColumns, provenance);
  for (const auto& a : accounts) {
    w.write_row({a.account_id, a.bank_id, std::to_string(a.account_type),
                 std::to_string(a.account_status), std::to_string(a.country),
                 std::to_string(a.gender), std::to_string(a.prior_sar_count),
                 format_real(a.initial_deposit), std::to_string(a.account_age)});
  }
}

void write_csv(const std::vector<TransactionRecord>& transactions,
               const std::filesystem::path& path, const std::optional<Provenance>& provenance) {
  CsvWriter w(path, kTransactionColumns, provenance);
  for (const auto& t : transactions) {
    w.write_row({t.tx_id, t.sender_id, t.receiver_id, format_real(t.amount),
                 std::to_string(t.timestamp), std::to_string(t.tx_type),
                 std::to_string(t.label)});
  }
}

void write_role_features_csv(const RoleFeatureMap& features,
                             const std::vector<AccountRecord>& accounts,
                             const std::filesystem::path& path,
                             const std::optional<Provenance>& provenance) {
  CsvWriter w(path, kRoleFeatureColumns, provenance);
  for (const auto& a : accounts) {
    auto it = features.find(a.account_id);
    if (it == features.end()) throw IntegrityError("no role features for " + a.account_id);
    for (bool sender : {true, false}) {
      const RoleStats& s = sender ? it->second.outgoing : it->second.incoming;
      w.write_row({a.account_id, role_name(sender), std::to_string(s.count),
                   format_real(s.total), format_real(s.mean), format_real(s.std),
                   std::to_string(s.velocity_24h)});
    }
  }
}

std::vector<AccountRecord> read_accounts_csv(const std::filesystem::path& path) {
  const auto table = read_csv_table(path, kAccountColumns);
  std::vector<AccountRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    const auto line = table.line_numbers[i];
    AccountRecord a;
    a.account_id = f[0];
    a.bank_id = f[1];
    a.account_type = static_cast<int>(parse_int(f[2], table.path, line));
    a.account_status = static_cast<int>(parse_int(f[3], table.path, line));
    a.country = static_cast<int>(parse_int(f[4], table.path, line));
    a.gender = static_cast<int>(parse_int(f[5], table.path, line));
    a.prior_sar_count = parse_int(f[6], table.path, line);
    a.initial_deposit = parse_real(f[7], table.path, line);
    a.account_age = parse_int(f[8], table.path, line);
    if (a.account_id.empty() || a.bank_id.empty()) {
      throw ParseError(table.path + ":" + std::to_string(line) + ": empty identifier");
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<TransactionRecord> read_transactions_csv(const std::filesystem::path& path) {
  const auto table = read_csv_table(path, kTransactionColumns);
  std::vector<TransactionRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    const auto line = table.line_numbers[i];
    TransactionRecord t;
    t.tx_id = f[0];
    t.sender_id = f[1];
    t.receiver_id = f[2];
    t.amount = parse_real(f[3], table.path, line);
    t.timestamp = parse_int(f[4], table.path, line);
    t.tx_type = static_cast<int>(parse_int(f[5], table.path, line));
    t.label = static_cast<int>(parse_int(f[6], table.path, line));
    if (t.label != 0 && t.label != 1) {
      throw ParseError(table.path + ":" + std::to_string(line) + ": label must be 0 or 1");
    }
    out.push_back(std::move(t));
  }
  return out;
}

RoleFeatureMap read_role_features_csv(const std::filesystem::path& path) {
  const auto table = read_csv_table(path, kRoleFeatureColumns);
  RoleFeatureMap out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    const auto line = table.line_numbers[i];
    auto& entry = out[f[0]];
    entry.account_id = f[0];
    RoleStats* s = nullptr;
    if (f[1] == "sender") {
      s = &entry.outgoing;
    } else if (f[1] == "receiver") {
      s = &entry.incoming;
    } else {
      throw ParseError(table.path + ":" + std::to_string(line) + ": unknown role '" + f[1] + "'");
    }
    s->count = parse_int(f[2], table.path, line);
    s->total = parse_real(f[3], table.path, line);
    s->mean = parse_real(f[4], table.path, line);
    s->std = parse_real(f[5], table.path, line);
    s->velocity_24h = parse_int(f[6], table.path, line);
  }
  return out;
}

}  // namespace hybridfl
