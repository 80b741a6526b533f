#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hybridfl/csv.hpp"
#include "hybridfl/datagen.hpp"
#include "hybridfl/matrix.hpp"

namespace hybridfl {

enum class Role { kSender, kReceiver };
const char* role_name(Role role);

// Column names; one-hot columns are named "<field>=<code>".
struct FeatureLayout {
  std::vector<std::string> names;
  std::vector<bool> one_hot;

  std::size_t size() const { return names.size(); }
  void add(std::string name, bool is_one_hot = false);
  void append(const FeatureLayout& other);
};

struct TransactionRow {
  std::string tx_id;
  std::string sender_id;
  std::string receiver_id;
  std::string sender_bank_id;
  std::string receiver_bank_id;
  std::int64_t timestamp = 0;
  int label = 0;
};

// Everything the active (transaction) party holds: transaction attributes,
// labels and the account -> bank routing map. No account attributes.
struct TransactionPartyView {
  std::vector<TransactionRow> rows;
  Matrix features;  // encoded x^T, one row per transaction
  FeatureLayout layout;
  std::unordered_map<std::string, std::size_t> row_of;
  std::unordered_map<std::string, std::string> routing;  // account_id -> bank_id

  std::size_t row_index(const std::string& tx_id) const;
  std::vector<std::string> bank_ids() const;
};

// One bank's customers: general account features followed by the sender
// role block and the receiver role block. No labels, no transaction rows.
struct BankView {
  std::string bank_id;
  std::vector<std::string> account_ids;
  Matrix features;
  FeatureLayout layout;
  std::size_t general_width = 0;
  std::size_t role_width = 0;
  std::unordered_map<std::string, std::size_t> row_of;

  // general ++ outgoing stats, or general ++ incoming stats.
  std::vector<std::size_t> role_columns(Role role) const;
  std::size_t role_input_width() const { return general_width + role_width; }
};

using BankViews = std::map<std::string, BankView>;

struct HybridPartition {
  TransactionPartyView tx_view;
  BankViews bank_views;
};

TransactionPartyView build_transaction_view(const std::vector<AccountRecord>& accounts,
                                            const std::vector<TransactionRecord>& transactions,
                                            const CategoryCardinalities& categories = {});

BankViews build_bank_views(const std::vector<AccountRecord>& accounts,
                           const RoleFeatureMap& role_features,
                           const CategoryCardinalities& categories = {},
                           const std::optional<std::vector<std::string>>& bank_ids = std::nullopt);

// `bank_ids`, when given, is the configured bank set; accounts owned by any
// other bank are an integrity error.
HybridPartition split_hybrid(const std::vector<AccountRecord>& accounts,
                             const std::vector<TransactionRecord>& transactions,
                             const RoleFeatureMap& role_features,
                             const CategoryCardinalities& categories = {},
                             const std::optional<std::vector<std::string>>& bank_ids = std::nullopt);

enum class SplitStrategy { kStratified, kTemporal };

struct SplitIndex {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
  SplitStrategy strategy = SplitStrategy::kStratified;
};

// Ratios (train, validation[, test]) must be positive and sum to 1.
SplitIndex split_train_val_test(const TransactionPartyView& view, std::span<const double> ratios,
                                std::uint64_t seed,
                                SplitStrategy strategy = SplitStrategy::kStratified);

// Per-feature z-scoring fitted on a party's training rows. One-hot
// columns pass through; constant columns get std 1.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<bool> pass_through;

  std::size_t size() const { return mean.size(); }
};

FeatureScaler fit_scaler(const Matrix& features, std::span<const std::size_t> rows,
                         const FeatureLayout& layout);
Matrix apply_scaler(const FeatureScaler& scaler, const Matrix& rows);

// Accounts of `bank_id` that appear (in either role) in the given
// transactions. This is what the transaction party can tell a bank.
std::vector<std::string> accounts_referenced(const TransactionPartyView& view,
                                             std::span<const std::string> tx_ids,
                                             const std::string& bank_id);

// Flat table for the centralised baseline:
// x^T ++ sender (general ++ outgoing) ++ receiver (general ++ incoming).
struct MergedTable {
  std::vector<std::string> tx_ids;
  Matrix features;
  std::vector<int> labels;
  FeatureLayout layout;
  std::unordered_map<std::string, std::size_t> row_of;
};

MergedTable build_merged_table(const TransactionPartyView& tx_view, const BankViews& banks);

// Per-party view files.
void write_transaction_view_csv(const TransactionPartyView& view,
                                const std::filesystem::path& path,
                                const std::optional<Provenance>& provenance = std::nullopt);
TransactionPartyView read_transaction_view_csv(const std::filesystem::path& path);
void write_bank_view_csv(const BankView& view, const std::filesystem::path& path,
                         const std::optional<Provenance>& provenance = std::nullopt);
BankView read_bank_view_csv(const std::filesystem::path& path, const std::string& bank_id);
void write_splits_csv(const SplitIndex& split, const TransactionPartyView& view,
                      const std::filesystem::path& path,
                      const std::optional<Provenance>& provenance = std::nullopt);
SplitIndex read_splits_csv(const std::filesystem::path& path);

std::string bank_view_filename(const std::string& bank_id);

}  // namespace hybridfl
