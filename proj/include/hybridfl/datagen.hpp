#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hybridfl/csv.hpp"

namespace hybridfl {

// Categorical fields are stored as small integer codes; their
// cardinalities live in CategoryCardinalities.
struct AccountRecord {
  std::string account_id;
  std::string bank_id;
  int account_type = 0;
  int account_status = 0;
  int country = 0;
  int gender = 0;
  std::int64_t prior_sar_count = 0;
  double initial_deposit = 0.0;
  std::int64_t account_age = 0;  // days

  friend bool operator==(const AccountRecord&, const AccountRecord&) = default;
};

struct TransactionRecord {
  std::string tx_id;
  std::string sender_id;
  std::string receiver_id;
  double amount = 0.0;
  std::int64_t timestamp = 0;  // seconds since epoch
  int tx_type = 0;
  int label = 0;  // 1 = suspicious

  friend bool operator==(const TransactionRecord&, const TransactionRecord&) = default;
};

struct RoleStats {
  std::int64_t count = 0;
  double total = 0.0;
  double mean = 0.0;
  double std = 0.0;
  std::int64_t velocity_24h = 0;

  friend bool operator==(const RoleStats&, const RoleStats&) = default;
};

// Outgoing statistics feed the sender encoder, incoming ones the receiver
// encoder.
struct RoleFeatures {
  std::string account_id;
  RoleStats outgoing;
  RoleStats incoming;

  friend bool operator==(const RoleFeatures&, const RoleFeatures&) = default;
};

using RoleFeatureMap = std::unordered_map<std::string, RoleFeatures>;

struct CategoryCardinalities {
  int account_type = 4;
  int account_status = 3;
  int country = 8;
  int gender = 3;
  int tx_type = 3;
};

struct TypologyMix {
  double fan_out = 1.0;
  double fan_in = 1.0;
  double high_amount_burst = 1.0;
};

struct GeneratorConfig {
  std::uint64_t seed = 7;
  int n_banks = 2;
  int accounts_per_bank = 500;
  std::int64_t n_transactions = 20000;
  double fraud_ratio = 0.3;
  TypologyMix typologies;
  CategoryCardinalities categories;
  // Fraction of accounts controlled by bad actors; fraud hubs and most
  // mules are drawn from them.
  double bad_account_fraction = 0.25;
  // Probability that a typology counterpart (mule) is a bad account.
  double mule_bad_probability = 0.7;
  // Log-deposit offset of bank b is bank_deposit_shift * (b % 3); bad
  // accounts keep the same absolute deposit level everywhere.
  double bank_deposit_shift = 0.35;
  // Poisson rate of prior suspicious-activity reports for bad accounts
  // (others use 0.06).
  double bad_prior_sar_rate = 0.9;
  // Odd-indexed banks serve young digital customers who favour high
  // category codes; their log deposits move by digital_deposit_offset.
  // With this probability a bad account there inverts the usual profile
  // (low codes, old dormant account). 0 turns digital banks off.
  double digital_bank_profile = 1.0;
  double digital_deposit_offset = -1.3;
  // Log-normal parameters of legitimate amounts.
  double amount_log_mean = 6.0;
  double amount_log_sigma = 1.2;
  // When > 0, a legitimate payment is sized by its sender instead:
  // ln(amount) ~ N(ln(deposit) - deposit_amount_gap, personal_amount_sigma).
  // Fraud amounts keep the population parameters above.
  double personal_amount_sigma = 0.0;
  double deposit_amount_gap = 1.4;
  // Log-normal shift applied to fan-in/fan-out amounts.
  double fraud_amount_log_shift = 0.3;
  // Log-normal shift applied to high-amount bursts.
  double burst_amount_log_shift = 1.6;
  // Probability that a fraud episode starts at night (00:00-06:00).
  double fraud_night_probability = 0.45;
  double legit_night_probability = 0.12;
  int time_horizon_days = 90;
  std::int64_t epoch_start = 1672531200;  // 2023-01-01T00:00:00Z

  // Throws ConfigError naming the offending field.
  void validate() const;

  // Two banks, 30% positives (table shape of the AMLSim benchmark at
  // 20k transactions instead of 63330).
  static GeneratorConfig amlsim();
  // Ten banks, 0.2% prevalence, 100k transactions.
  static GeneratorConfig swift();
};

struct GeneratedData {
  std::vector<AccountRecord> accounts;
  std::vector<TransactionRecord> transactions;
};

// Deterministic in `config`. Exactly ceil(fraud_ratio * n) rows are labelled 1.
GeneratedData generate(const GeneratorConfig& config);

std::int64_t fraud_count(const GeneratorConfig& config);

// Statistics over transactions with timestamp <= as_of; velocity counts use
// the window (as_of - 24h, as_of]. Every account gets an entry.
RoleFeatureMap derive_role_features(const std::vector<TransactionRecord>& transactions,
                                    const std::vector<AccountRecord>& accounts,
                                    std::int64_t as_of);

// CSV persistence with the fixed column sets below.
extern const std::vector<std::string> kAccountColumns;
extern const std::vector<std::string> kTransactionColumns;
extern const std::vector<std::string> kRoleFeatureColumns;

void write_csv(const std::vector<AccountRecord>& accounts, const std::filesystem::path& path,
               const std::optional<Provenance>& provenance = std::nullopt);
void write_csv(const std::vector<TransactionRecord>& transactions,
               const std::filesystem::path& path,
               const std::optional<Provenance>& provenance = std::nullopt);
// Rows follow `accounts` order, sender row then receiver row.
void write_role_features_csv(const RoleFeatureMap& features,
                             const std::vector<AccountRecord>& accounts,
                             const std::filesystem::path& path,
                             const std::optional<Provenance>& provenance = std::nullopt);

std::vector<AccountRecord> read_accounts_csv(const std::filesystem::path& path);
std::vector<TransactionRecord> read_transactions_csv(const std::filesystem::path& path);
RoleFeatureMap read_role_features_csv(const std::filesystem::path& path);

}  // namespace hybridfl
