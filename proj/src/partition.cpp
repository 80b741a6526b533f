#include "hybridfl/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "hybridfl/errors.hpp"
#include "hybridfl/random.hpp"

namespace hybridfl {
namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

void add_one_hot(FeatureLayout& layout, const std::string& field, int cardinality) {
  for (int k = 0; k < cardinality; ++k) layout.add(field + "=" + std::to_string(k), true);
}

void put_one_hot(std::span<double> row, std::size_t& col, int value, int cardinality,
                 const char* field, const std::string& owner) {
  if (value < 0 || value >= cardinality) {
    throw DataError(owner + ": " + field + " code " + std::to_string(value) +
                    " outside [0, " + std::to_string(cardinality) + ")");
  }
  row[col + static_cast<std::size_t>(value)] = 1.0;
  col += static_cast<std::size_t>(cardinality);
}

FeatureLayout transaction_layout(const CategoryCardinalities& c) {
  FeatureLayout l;
  l.add("log_amount");
  l.add("time_of_day_sin");
  l.add("time_of_day_cos");
  l.add("day_index");
  add_one_hot(l, "tx_type", c.tx_type);
  return l;
}

FeatureLayout general_layout(const CategoryCardinalities& c) {
  FeatureLayout l;
  add_one_hot(l, "account_type", c.account_type);
  add_one_hot(l, "account_status", c.account_status);
  add_one_hot(l, "country", c.country);
  add_one_hot(l, "gender", c.gender);
  l.add("log_prior_sar_count");
  l.add("log_initial_deposit");
  l.add("account_age_years");
  return l;
}

FeatureLayout role_layout(const std::string& prefix) {
  FeatureLayout l;
  for (const char* stat : {"log_count", "log_total", "log_mean", "log_std", "log_velocity_24h"}) {
    l.add(prefix + stat);
  }
  return l;
}

void put_role(std::span<double> row, std::size_t& col, const RoleStats& s) {
  row[col++] = std::log1p(static_cast<double>(s.count));
  row[col++] = std::log1p(s.total);
  row[col++] = std::log1p(s.mean);
  row[col++] = std::log1p(s.std);
  row[col++] = std::log1p(static_cast<double>(s.velocity_24h));
}

const char* split_name(int which) {
  switch (which) {
    case 0: return "train";
    case 1: return "validation";
    default: return "test";
  }
}

void fill_layout_from_header(FeatureLayout& layout, const std::vector<std::string>& header,
                             std::size_t first) {
  for (std::size_t i = first; i < header.size(); ++i) {
    layout.add(header[i], header[i].find('=') != std::string::npos);
  }
}

}  // namespace

const char* role_name(Role role) { return role == Role::kSender ? "sender" : "receiver"; }

void FeatureLayout::add(std::string name, bool is_one_hot) {
  names.push_back(std::move(name));
  one_hot.push_back(is_one_hot);
}

void FeatureLayout::append(const FeatureLayout& other) {
  names.insert(names.end(), other.names.begin(), other.names.end());
  one_hot.insert(one_hot.end(), other.one_hot.begin(), other.one_hot.end());
}

std::size_t TransactionPartyView::row_index(const std::string& tx_id) const {
  auto it = row_of.find(tx_id);
  if (it == row_of.end()) throw IntegrityError("unknown transaction " + tx_id);
  return it->second;
}

std::vector<std::string> TransactionPartyView::bank_ids() const {
  std::set<std::string> ids;
  for (const auto& [account, bank] : routing) ids.insert(bank);
  return {ids.begin(), ids.end()};
}

std::vector<std::size_t> BankView::role_columns(Role role) const {
  std::vector<std::size_t> cols(general_width);
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  const std::size_t start = general_width + (role == Role::kSender ? 0 : role_width);
  for (std::size_t i = 0; i < role_width; ++i) cols.push_back(start + i);
  return cols;
}

TransactionPartyView build_transaction_view(const std::vector<AccountRecord>& accounts,
                                            const std::vector<TransactionRecord>& transactions,
                                            const CategoryCardinalities& categories) {
  TransactionPartyView view;
  for (const auto& a : accounts) {
    if (!view.routing.emplace(a.account_id, a.bank_id).second) {
      throw IntegrityError("duplicate account id " + a.account_id);
    }
  }
  view.layout = transaction_layout(categories);
  view.features = Matrix(transactions.size(), view.layout.size());
  view.rows.reserve(transactions.size());

  std::int64_t min_ts = 0;
  std::int64_t max_ts = 0;
  if (!transactions.empty()) {
    auto [lo, hi] = std::minmax_element(
        transactions.begin(), transactions.end(),
        [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    min_ts = lo->timestamp;
    max_ts = hi->timestamp;
  }
  const double max_day =
      std::max<double>(1.0, static_cast<double>((max_ts - min_ts) / kSecondsPerDay));

  for (std::size_t i = 0; i < transactions.size(); ++i) {
    const auto& t = transactions[i];
    auto sender = view.routing.find(t.sender_id);
    if (sender == view.routing.end()) {
      throw IntegrityError("transaction " + t.tx_id + " references unknown account " + t.sender_id);
    }
    auto receiver = view.routing.find(t.receiver_id);
    if (receiver == view.routing.end()) {
      throw IntegrityError("transaction " + t.tx_id + " references unknown account " +
                           t.receiver_id);
    }
    if (!view.row_of.emplace(t.tx_id, i).second) {
      throw IntegrityError("duplicate transaction id " + t.tx_id);
    }
    view.rows.push_back({t.tx_id, t.sender_id, t.receiver_id, sender->second, receiver->second,
                         t.timestamp, t.label});
    auto row = view.features.row(i);
    const double tod =
        static_cast<double>(((t.timestamp % kSecondsPerDay) + kSecondsPerDay) % kSecondsPerDay) /
        static_cast<double>(kSecondsPerDay);
    std::size_t col = 0;
    row[col++] = std::log1p(t.amount);
    row[col++] = std::sin(2.0 * std::numbers::pi * tod);
    row[col++] = std::cos(2.0 * std::numbers::pi * tod);
    row[col++] = static_cast<double>((t.timestamp - min_ts) / kSecondsPerDay) / max_day;
    put_one_hot(row, col, t.tx_type, categories.tx_type, "tx_type", t.tx_id);
  }
  return view;
}

BankViews build_bank_views(const std::vector<AccountRecord>& accounts,
                           const RoleFeatureMap& role_features,
                           const CategoryCardinalities& categories,
                           const std::optional<std::vector<std::string>>& bank_ids) {
  BankViews views;
  if (bank_ids) {
    for (const auto& id : *bank_ids) views[id].bank_id = id;
  }
  std::map<std::string, std::vector<const AccountRecord*>> owned;
  for (const auto& a : accounts) {
    if (bank_ids && !views.count(a.bank_id)) {
      throw IntegrityError("account " + a.account_id + " is owned by unknown bank " + a.bank_id);
    }
    owned[a.bank_id].push_back(&a);
  }
  const FeatureLayout general = general_layout(categories);
  const FeatureLayout sender = role_layout("sender_");
  const FeatureLayout receiver = role_layout("receiver_");
  for (auto& [bank_id, members] : owned) {
    BankView& v = views[bank_id];
    v.bank_id = bank_id;
    v.layout = general;
    v.layout.append(sender);
    v.layout.append(receiver);
    v.general_width = general.size();
    v.role_width = sender.size();
    v.features = Matrix(members.size(), v.layout.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      const AccountRecord& a = *members[i];
      auto rf = role_features.find(a.account_id);
      if (rf == role_features.end()) {
        throw IntegrityError("no role features for account " + a.account_id);
      }
      v.account_ids.push_back(a.account_id);
      v.row_of.emplace(a.account_id, i);
      auto row = v.features.row(i);
      std::size_t col = 0;
      put_one_hot(row, col, a.account_type, categories.account_type, "account_type", a.account_id);
      put_one_hot(row, col, a.account_status, categories.account_status, "account_status",
                  a.account_id);
      put_one_hot(row, col, a.country, categories.country, "country", a.account_id);
      put_one_hot(row, col, a.gender, categories.gender, "gender", a.account_id);
      row[col++] = std::log1p(static_cast<double>(a.prior_sar_count));
      row[col++] = std::log1p(a.initial_deposit);
      row[col++] = static_cast<double>(a.account_age) / 365.0;
      put_role(row, col, rf->second.outgoing);
      put_role(row, col, rf->second.incoming);
    }
  }
  return views;
}

HybridPartition split_hybrid(const std::vector<AccountRecord>& accounts,
                             const std::vector<TransactionRecord>& transactions,
                             const RoleFeatureMap& role_features,
                             const CategoryCardinalities& categories,
                             const std::optional<std::vector<std::string>>& bank_ids) {
  HybridPartition p;
  p.bank_views = build_bank_views(accounts, role_features, categories, bank_ids);
  p.tx_view = build_transaction_view(accounts, transactions, categories);
  return p;
}

SplitIndex split_train_val_test(const TransactionPartyView& view, std::span<const double> ratios,
                                std::uint64_t seed, SplitStrategy strategy) {
  if (ratios.size() < 2 || ratios.size() > 3) {
    throw ConfigError("split ratios must have two or three entries");
  }
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0)) throw ConfigError("split ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

  SplitIndex index;
  index.seed = seed;
  index.strategy = strategy;
  std::vector<int> assignment(view.rows.size(), 0);
  std::size_t total_positives = 0;
  for (const auto& r : view.rows) total_positives += static_cast<std::size_t>(r.label);

  auto allocate = [&](const std::vector<std::size_t>& members) {
    const std::size_t n = members.size();
    std::size_t begin = 0;
    for (std::size_t k = 0; k < ratios.size(); ++k) {
      std::size_t count = k + 1 == ratios.size()
                              ? n - begin
                              : std::min(n - begin, static_cast<std::size_t>(std::llround(
                                                        ratios[k] * static_cast<double>(n))));
      for (std::size_t i = begin; i < begin + count; ++i) {
        assignment[members[i]] = static_cast<int>(k);
      }
      begin += count;
    }
  };

  if (strategy == SplitStrategy::kStratified) {
    Rng rng(derive_seed(seed, kSplitStream));
    for (int label : {0, 1}) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < view.rows.size(); ++i) {
        if (view.rows[i].label == label) members.push_back(i);
      }
      std::shuffle(members.begin(), members.end(), rng);
      allocate(members);
    }
  } else {
    std::vector<std::size_t> members(view.rows.size());
    std::iota(members.begin(), members.end(), std::size_t{0});
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return view.rows[a].timestamp < view.rows[b].timestamp;
    });
    allocate(members);
  }

  std::vector<std::size_t> positives_in(ratios.size(), 0);
  for (std::size_t i = 0; i < view.rows.size(); ++i) {
    auto& dst = assignment[i] == 0 ? index.train
                : assignment[i] == 1 ? index.validation
                                     : index.test;
    dst.push_back(view.rows[i].tx_id);
    positives_in[static_cast<std::size_t>(assignment[i])] +=
        static_cast<std::size_t>(view.rows[i].label);
  }
  if (total_positives > 0) {
    for (std::size_t k = 0; k < ratios.size(); ++k) {
      if (positives_in[k] == 0) {
        throw StratificationError(std::string("split '") + split_name(static_cast<int>(k)) +
                                  "' received no positive examples");
      }
    }
  }
  return index;
}

FeatureScaler fit_scaler(const Matrix& features, std::span<const std::size_t> rows,
                         const FeatureLayout& layout) {
  if (layout.size() != features.cols()) {
    throw ShapeError("fit_scaler: layout width differs from feature width");
  }
  const std::size_t d = features.cols();
  FeatureScaler s;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 1.0);
  s.pass_through = layout.one_hot;
  if (rows.empty()) return s;
  const double n = static_cast<double>(rows.size());
  for (std::size_t r : rows) {
    auto x = features.row(r);
    for (std::size_t c = 0; c < d; ++c) s.mean[c] += x[c];
  }
  for (double& m : s.mean) m /= n;
  std::vector<double> var(d, 0.0);
  for (std::size_t r : rows) {
    auto x = features.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      const double dx = x[c] - s.mean[c];
      var[c] += dx * dx;
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    if (s.pass_through[c]) {
      s.mean[c] = 0.0;
      s.std[c] = 1.0;
      continue;
    }
    const double sd = std::sqrt(var[c] / n);
    s.std[c] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Matrix apply_scaler(const FeatureScaler& scaler, const Matrix& rows) {
  if (rows.cols() != scaler.size()) {
    throw ShapeError("apply_scaler: rows have " + std::to_string(rows.cols()) +
                     " features, scaler expects " + std::to_string(scaler.size()));
  }
  Matrix out = rows;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto x = out.row(r);
    for (std::size_t c = 0; c < x.size(); ++c) {
      if (!scaler.pass_through[c]) x[c] = (x[c] - scaler.mean[c]) / scaler.std[c];
    }
  }
  return out;
}

std::vector<std::string> accounts_referenced(const TransactionPartyView& view,
                                             std::span<const std::string> tx_ids,
                                             const std::string& bank_id) {
  std::set<std::string> ids;
  for (const auto& tx : tx_ids) {
    const auto& row = view.rows[view.row_index(tx)];
    if (row.sender_bank_id == bank_id) ids.insert(row.sender_id);
    if (row.receiver_bank_id == bank_id) ids.insert(row.receiver_id);
  }
  return {ids.begin(), ids.end()};
}

MergedTable build_merged_table(const TransactionPartyView& tx_view, const BankViews& banks) {
  if (banks.empty()) throw IntegrityError("merged table needs at least one bank view");
  const BankView& any = banks.begin()->second;
  MergedTable t;
  t.layout = tx_view.layout;
  for (Role role : {Role::kSender, Role::kReceiver}) {
    const std::string prefix = std::string(role_name(role)) + ".";
    for (std::size_t c : any.role_columns(role)) {
      t.layout.add(prefix + any.layout.names[c], any.layout.one_hot[c]);
    }
  }
  const std::size_t width_tx = tx_view.features.cols();
  const std::size_t width_role = any.role_input_width();
  t.features = Matrix(tx_view.rows.size(), t.layout.size());
  const auto sender_cols = any.role_columns(Role::kSender);
  const auto receiver_cols = any.role_columns(Role::kReceiver);
  for (std::size_t i = 0; i < tx_view.rows.size(); ++i) {
    const auto& row = tx_view.rows[i];
    t.tx_ids.push_back(row.tx_id);
    t.labels.push_back(row.label);
    t.row_of.emplace(row.tx_id, i);
    auto dst = t.features.row(i);
    auto src = tx_view.features.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
    auto copy_account = [&](const std::string& bank_id, const std::string& account_id,
                            const std::vector<std::size_t>& cols, std::size_t offset) {
      auto b = banks.find(bank_id);
      if (b == banks.end()) throw IntegrityError("merged table: unknown bank " + bank_id);
      auto a = b->second.row_of.find(account_id);
      if (a == b->second.row_of.end()) {
        throw IntegrityError("merged table: account " + account_id + " missing at " + bank_id);
      }
      if (b->second.role_input_width() != width_role) {
        throw IntegrityError("merged table: bank " + bank_id + " has a different schema");
      }
      auto feats = b->second.features.row(a->second);
      for (std::size_t k = 0; k < cols.size(); ++k) dst[offset + k] = feats[cols[k]];
    };
    copy_account(row.sender_bank_id, row.sender_id, sender_cols, width_tx);
    copy_account(row.receiver_bank_id, row.receiver_id, receiver_cols, width_tx + width_role);
  }
  return t;
}

namespace {
const std::vector<std::string> kTxViewFixed = {"tx_id",          "sender_id",
                                               "receiver_id",    "sender_bank_id",
                                               "receiver_bank_id", "timestamp",
                                               "label"};
}  // namespace

void write_transaction_view_csv(const TransactionPartyView& view,
                                const std::filesystem::path& path,
                                const std::optional<Provenance>& provenance) {
  auto header = kTxViewFixed;
  header.insert(header.end(), view.layout.names.begin(), view.layout.names.end());
  CsvWriter w(path, header, provenance);
  for (std::size_t i = 0; i < view.rows.size(); ++i) {
    const auto& r = view.rows[i];
    std::vector<std::string> f{r.tx_id,          r.sender_id,
                               r.receiver_id,    r.sender_bank_id,
                               r.receiver_bank_id, std::to_string(r.timestamp),
                               std::to_string(r.label)};
    for (double x : view.features.row(i)) f.push_back(format_real(x));
    w.write_row(f);
  }
}

TransactionPartyView read_transaction_view_csv(const std::filesystem::path& path) {
  const auto table = read_csv_open(path, kTxViewFixed);
  TransactionPartyView view;
  fill_layout_from_header(view.layout, table.header, kTxViewFixed.size());
  view.features = Matrix(table.rows.size(), view.layout.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    const auto line = table.line_numbers[i];
    TransactionRow r{f[0], f[1], f[2], f[3], f[4], parse_int(f[5], table.path, line),
                     static_cast<int>(parse_int(f[6], table.path, line))};
    if (!view.row_of.emplace(r.tx_id, i).second) {
      throw IntegrityError(table.path + ": duplicate transaction id " + r.tx_id);
    }
    view.routing[r.sender_id] = r.sender_bank_id;
    view.routing[r.receiver_id] = r.receiver_bank_id;
    auto row = view.features.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = parse_real(f[kTxViewFixed.size() + c], table.path, line);
    }
    view.rows.push_back(std::move(r));
  }
  return view;
}

void write_bank_view_csv(const BankView& view, const std::filesystem::path& path,
                         const std::optional<Provenance>& provenance) {
  std::vector<std::string> header{"account_id"};
  header.insert(header.end(), view.layout.names.begin(), view.layout.names.end());
  CsvWriter w(path, header, provenance);
  for (std::size_t i = 0; i < view.account_ids.size(); ++i) {
    std::vector<std::string> f{view.account_ids[i]};
    for (double x : view.features.row(i)) f.push_back(format_real(x));
    w.write_row(f);
  }
}

BankView read_bank_view_csv(const std::filesystem::path& path, const std::string& bank_id) {
  const auto table = read_csv_open(path, {"account_id"});
  BankView view;
  view.bank_id = bank_id;
  fill_layout_from_header(view.layout, table.header, 1);
  for (const auto& name : view.layout.names) {
    if (name.rfind("sender_", 0) == 0) {
      ++view.role_width;
    } else if (name.rfind("receiver_", 0) != 0) {
      ++view.general_width;
    }
  }
  if (view.general_width + 2 * view.role_width != view.layout.size()) {
    throw SchemaError(table.path + ": sender and receiver blocks differ in width");
  }
  view.features = Matrix(table.rows.size(), view.layout.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    view.account_ids.push_back(f[0]);
    view.row_of.emplace(f[0], i);
    auto row = view.features.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = parse_real(f[1 + c], table.path, table.line_numbers[i]);
    }
  }
  return view;
}

void write_splits_csv(const SplitIndex& split, const TransactionPartyView& view,
                      const std::filesystem::path& path,
                      const std::optional<Provenance>& provenance) {
  std::unordered_map<std::string, int> which;
  for (const auto& id : split.train) which[id] = 0;
  for (const auto& id : split.validation) which[id] = 1;
  for (const auto& id : split.test) which[id] = 2;
  CsvWriter w(path, {"tx_id", "split"}, provenance);
  for (const auto& r : view.rows) {
    auto it = which.find(r.tx_id);
    if (it == which.end()) throw IntegrityError("split does not cover " + r.tx_id);
    w.write_row({r.tx_id, split_name(it->second)});
  }
}

SplitIndex read_splits_csv(const std::filesystem::path& path) {
  const auto table = read_csv_table(path, {"tx_id", "split"});
  SplitIndex s;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    if (f[1] == "train") {
      s.train.push_back(f[0]);
    } else if (f[1] == "validation") {
      s.validation.push_back(f[0]);
    } else if (f[1] == "test") {
      s.test.push_back(f[0]);
    } else {
      throw ParseError(table.path + ":" + std::to_string(table.line_numbers[i]) +
                       ": unknown split '" + f[1] + "'");
    }
  }
  return s;
}

std::string bank_view_filename(const std::string& bank_id) { return "bank_" + bank_id + ".csv"; }

}  // namespace hybridfl
