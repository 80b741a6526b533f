#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hybridfl/errors.hpp"
#include "hybridfl/experiment.hpp"
#include "hybridfl/loss.hpp"
#include "hybridfl/metrics.hpp"

namespace py = pybind11;
using namespace hybridfl;

namespace {

Preset preset_from(const std::string& name) {
  if (name == "amlsim") return Preset::kAmlsim;
  if (name == "swift") return Preset::kSwift;
  if (name == "custom") return Preset::kCustom;
  throw ConfigError("unknown preset \"" + name + "\"");
}

const std::vector<std::string>& split_ids(const SplitIndex& split, const std::string& name) {
  if (name == "train") return split.train;
  if (name == "validation") return split.validation;
  if (name == "test") return split.test;
  throw UsageError("unknown split \"" + name + "\"");
}

py::dict report_dict(const MetricsReport& r) {
  py::dict d;
  d["auprc"] = r.auprc;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  d["threshold"] = r.threshold;
  d["positives"] = r.positives;
  d["negatives"] = r.negatives;
  return d;
}

std::vector<int> as_labels(const py::array_t<int, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

std::vector<double> as_scores(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

const BankViews* banks_for(const ModelBundle& b, const PreparedData& d) {
  return b.needs_banks() ? &d.views.bank_views : nullptr;
}

}  // namespace

PYBIND11_MODULE(_hybridfl, m) {
  m.doc() = "Hybrid federated fraud detection: data generation, training and metrics";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_static("preset", [](const std::string& name) { return ExperimentConfig::for_preset(preset_from(name)); })
      .def_static("parse", [](const std::string& text) { return parse_experiment_config(text, "<python>"); })
      .def_static("load", [](const std::filesystem::path& p) { return load_experiment_config(p); })
      .def_property("seed", [](const ExperimentConfig& c) { return c.seed; }, &ExperimentConfig::set_seed)
      .def_property_readonly("preset_name", [](const ExperimentConfig& c) { return preset_name(c.preset); })
      .def_property(
          "n_transactions", [](const ExperimentConfig& c) { return c.generator.n_transactions; },
          [](ExperimentConfig& c, std::int64_t v) { c.generator.n_transactions = v; })
      .def_property(
          "n_banks", [](const ExperimentConfig& c) { return c.generator.n_banks; },
          [](ExperimentConfig& c, int v) { c.generator.n_banks = v; })
      .def_property(
          "accounts_per_bank", [](const ExperimentConfig& c) { return c.generator.accounts_per_bank; },
          [](ExperimentConfig& c, int v) { c.generator.accounts_per_bank = v; })
      .def_property(
          "fraud_ratio", [](const ExperimentConfig& c) { return c.generator.fraud_ratio; },
          [](ExperimentConfig& c, double v) { c.generator.fraud_ratio = v; })
      .def_property(
          "max_rounds", [](const ExperimentConfig& c) { return c.train.max_rounds; },
          [](ExperimentConfig& c, std::uint32_t v) { c.train.max_rounds = v; })
      .def_property(
          "learning_rate", [](const ExperimentConfig& c) { return c.train.learning_rate; },
          [](ExperimentConfig& c, double v) { c.train.learning_rate = v; })
      .def_property(
          "batch_size", [](const ExperimentConfig& c) { return c.train.batch_size; },
          [](ExperimentConfig& c, std::size_t v) { c.train.batch_size = v; })
      .def_property(
          "embedding_dim", [](const ExperimentConfig& c) { return c.train.embedding_dim; },
          [](ExperimentConfig& c, std::size_t v) { c.train.embedding_dim = v; })
      .def_property(
          "patience", [](const ExperimentConfig& c) { return c.train.patience; },
          [](ExperimentConfig& c, std::uint32_t v) { c.train.patience = v; })
      .def("validate", &ExperimentConfig::validate)
      .def("hash", &ExperimentConfig::hash)
      .def("to_json", &ExperimentConfig::canonical_json);

  py::class_<PreparedData>(m, "PreparedData")
      .def_property_readonly("n_transactions", [](const PreparedData& d) { return d.raw.transactions.size(); })
      .def_property_readonly("n_accounts", [](const PreparedData& d) { return d.raw.accounts.size(); })
      .def_property_readonly("positives",
                             [](const PreparedData& d) {
                               std::size_t n = 0;
                               for (const auto& t : d.raw.transactions) n += t.label;
                               return n;
                             })
      .def_property_readonly("bank_ids",
                             [](const PreparedData& d) {
                               std::vector<std::string> ids;
                               for (const auto& [id, v] : d.views.bank_views) ids.push_back(id);
                               return ids;
                             })
      .def("split_ids", [](const PreparedData& d, const std::string& s) { return split_ids(d.split, s); },
           py::arg("split"))
      .def("labels",
           [](const PreparedData& d, const std::string& s) {
             return labels_for(d.views.tx_view, split_ids(d.split, s));
           },
           py::arg("split"))
      .def("save",
           [](const PreparedData& d, const std::filesystem::path& dir, const ExperimentConfig& c) {
             write_prepared_data(d, dir, c.provenance());
           },
           py::arg("dir"), py::arg("config"));

  m.def(
      "prepare_data",
      [](const ExperimentConfig& c) {
        c.validate();
        return prepare_data(c, generate(c.generator));
      },
      py::arg("config"), "Generate synthetic data, split it and build the per-party views.");

  py::class_<TrainResult>(m, "TrainResult")
      .def_property_readonly("model", [](const TrainResult& r) { return model_tag_name(r.bundle.tag); })
      .def_property_readonly("best_round", [](const TrainResult& r) { return r.history.best_round; })
      .def_property_readonly("best_val_auprc", [](const TrainResult& r) { return r.history.best_val_auprc; })
      .def_property_readonly("sync_events", [](const TrainResult& r) { return r.history.sync_events; })
      .def_property_readonly("history",
                             [](const TrainResult& r) {
                               py::list out;
                               for (const auto& h : r.history.rounds) {
                                 py::dict d;
                                 d["round"] = h.round;
                                 d["train_loss"] = h.train_loss;
                                 d["val_auprc"] = h.val_auprc;
                                 d["val_precision"] = h.val_precision;
                                 d["val_recall"] = h.val_recall;
                                 d["val_f1"] = h.val_f1;
                                 d["messages"] = h.messages;
                                 d["bytes"] = h.bytes;
                                 out.append(d);
                               }
                               return out;
                             })
      .def("save", [](const TrainResult& r, const std::filesystem::path& dir, const ExperimentConfig& c) {
        r.bundle.save(dir, c.hash());
      });

  m.def(
      "train",
      [](const ExperimentConfig& c, const PreparedData& d, const std::string& mode) {
        const LoadedViews views{d.views.tx_view, d.views.bank_views, d.split};
        py::gil_scoped_release release;
        return run_mode(c, parse_mode(mode), views);
      },
      py::arg("config"), py::arg("data"), py::arg("mode") = "hybrid",
      "Train one of the hybrid, central or local models.");

  m.def(
      "score",
      [](const TrainResult& r, const PreparedData& d, const std::string& split) {
        const auto s = score(r.bundle, d.views.tx_view, split_ids(d.split, split), banks_for(r.bundle, d));
        py::array_t<double> out(static_cast<py::ssize_t>(s.size()));
        std::copy(s.begin(), s.end(), out.mutable_data());
        return out;
      },
      py::arg("result"), py::arg("data"), py::arg("split") = "test");

  m.def(
      "evaluate",
      [](const TrainResult& r, const PreparedData& d, const std::string& split, double threshold) {
        return report_dict(
            evaluate(r.bundle, d.views.tx_view, split_ids(d.split, split), banks_for(r.bundle, d), threshold));
      },
      py::arg("result"), py::arg("data"), py::arg("split") = "test", py::arg("threshold") = kDefaultThreshold);

  m.def(
      "auprc", [](py::array_t<double> s, py::array_t<int> y) { return auprc(as_scores(s), as_labels(y)); },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "pr_curve",
      [](py::array_t<double> s, py::array_t<int> y) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : pr_curve(as_scores(s), as_labels(y))) out.emplace_back(p.recall, p.precision);
        return out;
      },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "prf_at_threshold",
      [](py::array_t<double> s, py::array_t<int> y, double t) {
        const Prf p = prf_at_threshold(as_scores(s), as_labels(y), t);
        return py::make_tuple(p.precision, p.recall, p.f1);
      },
      py::arg("scores"), py::arg("labels"), py::arg("threshold") = kDefaultThreshold);

  m.def(
      "bce_loss",
      [](py::array_t<double> p, py::array_t<int> y) { return bce_loss(as_scores(p), as_labels(y)).mean_loss; },
      py::arg("probabilities"), py::arg("labels"));
  m.def(
      "focal_loss",
      [](py::array_t<double> p, py::array_t<int> y, double alpha, double gamma) {
        return focal_loss(as_scores(p), as_labels(y), alpha, gamma).mean_loss;
      },
      py::arg("probabilities"), py::arg("labels"), py::arg("alpha") = 0.99, py::arg("gamma") = 2.0);
}
