#pragma once

// Small generated worlds and the monolithic composite network used as the
// reference for the distributed protocol.

#include <map>
#include <string>
#include <vector>

#include "hybridfl/datagen.hpp"
#include "hybridfl/parties.hpp"
#include "hybridfl/partition.hpp"
#include "hybridfl/random.hpp"
#include "hybridfl/training.hpp"
#include "oracle.hpp"
#include "support.hpp"

namespace fixtures {

using namespace hybridfl;

struct World {
  GeneratedData data;
  HybridPartition part;
  SplitIndex split;
};

inline World make_world(int n_banks, std::int64_t n_tx, std::uint64_t seed,
                        int accounts_per_bank = 40, double fraud_ratio = 0.3) {
  GeneratorConfig c;
  c.n_banks = n_banks;
  c.accounts_per_bank = accounts_per_bank;
  c.n_transactions = n_tx;
  c.fraud_ratio = fraud_ratio;
  c.seed = seed;
  World w;
  w.data = generate(c);
  const double ratios[] = {0.7, 0.15, 0.15};
  {
    const auto feats =
        derive_role_features(w.data.transactions, w.data.accounts, w.data.transactions.back().timestamp);
    w.part = split_hybrid(w.data.accounts, w.data.transactions, feats);
  }
  w.split = split_train_val_test(w.part.tx_view, ratios, seed);
  // Role features as of the last training transaction.
  std::int64_t cutoff = 0;
  for (const auto& id : w.split.train)
    cutoff = std::max(cutoff, w.part.tx_view.rows[w.part.tx_view.row_index(id)].timestamp);
  const auto feats = derive_role_features(w.data.transactions, w.data.accounts, cutoff);
  w.part = split_hybrid(w.data.accounts, w.data.transactions, feats);
  return w;
}

struct Nets {
  MlpParams tx;
  MlpParams fusion;
  std::map<std::string, MlpParams> sender;
  std::map<std::string, MlpParams> receiver;
};

// Distinct random encoders per bank so that routing mistakes show up.
inline Nets random_nets(const World& w, std::size_t p, std::uint64_t seed) {
  Nets n;
  const std::size_t tx_in = w.part.tx_view.features.cols();
  const std::size_t role_in = w.part.bank_views.begin()->second.role_input_width();
  n.tx = testsupport::random_mlp(tx_in, {6}, p, OutputActivation::kNone, seed);
  n.fusion = testsupport::random_mlp(3 * p, {5}, 1, OutputActivation::kSigmoid, seed + 1);
  std::uint64_t s = seed + 2;
  for (const auto& [id, b] : w.part.bank_views) {
    n.sender[id] = testsupport::random_mlp(role_in, {6}, p, OutputActivation::kNone, s++);
    n.receiver[id] = testsupport::random_mlp(role_in, {6}, p, OutputActivation::kNone, s++);
  }
  return n;
}

inline FeatureScaler all_rows_scaler(const Matrix& m, const FeatureLayout& layout) {
  std::vector<std::size_t> rows(m.rows());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
  return fit_scaler(m, rows, layout);
}

struct Parties {
  ActiveParty active;
  std::map<std::string, BankParty> banks;
};

inline Parties make_parties(const World& w, const Nets& nets,
                            OptimizerSettings opt = {OptimizerKind::kSgd, {}, 0.1},
                            LossConfig loss = LossConfig::bce()) {
  std::map<std::string, BankParty> banks;
  for (const auto& [id, view] : w.part.bank_views) {
    banks.emplace(id, BankParty(view, all_rows_scaler(view.features, view.layout), nets.sender.at(id),
                                nets.receiver.at(id), opt, 1));
  }
  ActiveParty active(w.part.tx_view, all_rows_scaler(w.part.tx_view.features, w.part.tx_view.layout),
                     nets.tx, nets.fusion, loss, opt, 2);
  return {std::move(active), std::move(banks)};
}

inline std::vector<EmbedResponse> embed_all(Parties& ps, const RoutingPlan& plan, bool training) {
  std::vector<EmbedResponse> out;
  for (const auto& e : plan.requests) {
    out.push_back(ps.banks.at(e.bank_id).handle_embed({e.request_id, e.role, e.account_ids, training}));
  }
  return out;
}

// Hand z-scoring; independent of apply_scaler.
inline oracle::Vec scale_row(const FeatureScaler& sc, std::span<const double> row) {
  oracle::Vec out(row.begin(), row.end());
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (!sc.pass_through[c]) out[c] = (out[c] - sc.mean[c]) / sc.std[c];
  }
  return out;
}

struct MonoInputs {
  std::vector<oracle::Vec> x_t, x_s, x_r;
  std::vector<std::string> bank_s, bank_r;
  std::vector<int> y;
  std::map<std::string, std::size_t> row_of;
};

// One entry per transaction row: scaled x^T, and the sender / receiver
// account rows restricted to general ++ role block.
inline MonoInputs mono_inputs(const TransactionPartyView& tx, const FeatureScaler& tx_scaler,
                              const BankViews& banks,
                              const std::map<std::string, FeatureScaler>& bank_scalers) {
  MonoInputs in;
  auto role_vec = [&](const std::string& bank, const std::string& account, bool sender) {
    const BankView& v = banks.at(bank);
    const oracle::Vec full = scale_row(bank_scalers.at(bank), v.features.row(v.row_of.at(account)));
    oracle::Vec out(full.begin(), full.begin() + static_cast<long>(v.general_width));
    const std::size_t start = v.general_width + (sender ? 0 : v.role_width);
    out.insert(out.end(), full.begin() + static_cast<long>(start),
               full.begin() + static_cast<long>(start + v.role_width));
    return out;
  };
  for (std::size_t r = 0; r < tx.rows.size(); ++r) {
    const auto& row = tx.rows[r];
    in.row_of[row.tx_id] = r;
    in.x_t.push_back(scale_row(tx_scaler, tx.features.row(r)));
    in.bank_s.push_back(row.sender_bank_id);
    in.bank_r.push_back(row.receiver_bank_id);
    in.x_s.push_back(role_vec(row.sender_bank_id, row.sender_id, true));
    in.x_r.push_back(role_vec(row.receiver_bank_id, row.receiver_id, false));
    in.y.push_back(row.label);
  }
  return in;
}

// [h_T, h_S per bank, h_R per bank, f_F] as one network.
struct Mono {
  oracle::Net tx, fusion;
  std::map<std::string, oracle::Net> sender, receiver;

  explicit Mono(const Nets& n) : tx(testsupport::to_oracle(n.tx)), fusion(testsupport::to_oracle(n.fusion)) {
    for (const auto& [id, p] : n.sender) sender[id] = testsupport::to_oracle(p);
    for (const auto& [id, p] : n.receiver) receiver[id] = testsupport::to_oracle(p);
  }

  double predict(const MonoInputs& in, std::size_t r) const {
    oracle::Vec u = oracle::output(tx, in.x_t[r]);
    const auto es = oracle::output(sender.at(in.bank_s[r]), in.x_s[r]);
    const auto er = oracle::output(receiver.at(in.bank_r[r]), in.x_r[r]);
    u.insert(u.end(), es.begin(), es.end());
    u.insert(u.end(), er.begin(), er.end());
    return oracle::output(fusion, u)[0];
  }

  // Mean loss over `rows`, then one SGD step on every network. Gradients
  // are all taken before any parameter moves.
  double sgd_batch(const MonoInputs& in, const std::vector<std::size_t>& rows, const LossConfig& loss,
                   double lr) {
    oracle::Grad g_t = oracle::zeros_like(tx), g_f = oracle::zeros_like(fusion);
    std::map<std::string, oracle::Grad> g_s, g_r;
    for (const auto& [id, n] : sender) g_s[id] = oracle::zeros_like(n);
    for (const auto& [id, n] : receiver) g_r[id] = oracle::zeros_like(n);
    const double n = static_cast<double>(rows.size());
    double total = 0;
    for (std::size_t r : rows) {
      const auto tt = oracle::forward(tx, in.x_t[r]);
      const auto ts = oracle::forward(sender.at(in.bank_s[r]), in.x_s[r]);
      const auto tr = oracle::forward(receiver.at(in.bank_r[r]), in.x_r[r]);
      oracle::Vec u = tt.a.back();
      u.insert(u.end(), ts.a.back().begin(), ts.a.back().end());
      u.insert(u.end(), tr.a.back().begin(), tr.a.back().end());
      const auto tf = oracle::forward(fusion, u);
      const double p = tf.a.back()[0];
      const int y = in.y[r];
      double dz;
      if (loss.kind == LossKind::kBce) {
        total += oracle::bce(p, y);
        dz = oracle::bce_dz(p, y) / n;
      } else {
        total += oracle::focal(p, y, loss.alpha, loss.gamma);
        dz = oracle::focal_dz(p, y, loss.alpha, loss.gamma) / n;
      }
      const oracle::Vec du = oracle::backward(fusion, tf, {dz}, g_f);
      const std::size_t pd = tt.a.back().size();
      oracle::backward(tx, tt, oracle::Vec(du.begin(), du.begin() + static_cast<long>(pd)), g_t);
      oracle::backward(sender.at(in.bank_s[r]), ts,
                       oracle::Vec(du.begin() + static_cast<long>(pd), du.begin() + static_cast<long>(2 * pd)),
                       g_s.at(in.bank_s[r]));
      oracle::backward(receiver.at(in.bank_r[r]), tr,
                       oracle::Vec(du.begin() + static_cast<long>(2 * pd), du.end()),
                       g_r.at(in.bank_r[r]));
    }
    oracle::sgd(tx, g_t, lr);
    oracle::sgd(fusion, g_f, lr);
    for (auto& [id, net] : sender) oracle::sgd(net, g_s.at(id), lr);
    for (auto& [id, net] : receiver) oracle::sgd(net, g_r.at(id), lr);
    return total / n;
  }
};

// Largest relative error over all coordinates, with a small absolute floor
// so exact zeros on both sides count as agreement.
inline double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return 1e300;
  double worst = 0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, oracle::rel_err(a[k], b[k], 1e-12));
  return worst;
}

}  // namespace fixtures
