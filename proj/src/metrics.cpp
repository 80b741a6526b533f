#include "hybridfl/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "hybridfl/errors.hpp"

namespace hybridfl {
namespace {

std::size_t check_and_count_positives(std::span<const double> scores,
                                      std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("metrics: " + std::to_string(scores.size()) + " scores vs " +
                     std::to_string(labels.size()) + " labels");
  }
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("metrics: labels must be 0/1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0) throw UndefinedMetricError("metrics: no positive labels");
  return positives;
}

}  // namespace

std::vector<PrPoint> pr_curve(std::span<const double> scores, std::span<const int> labels) {
  const std::size_t positives = check_and_count_positives(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<PrPoint> points;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      if (labels[order[i]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
    }
    points.push_back({static_cast<double>(tp) / static_cast<double>(positives),
                      static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  return points;
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const auto& p : pr_curve(scores, labels)) {
    ap += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
  }
  return ap;
}

double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

Prf prf_at_threshold(std::span<const double> scores, std::span<const int> labels,
                     double threshold) {
  const std::size_t positives = check_and_count_positives(scores, labels);
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= threshold) {
      if (labels[i] == 1) {
        ++tp;
      } else {
        ++fp;
      }
    }
  }
  Prf r;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = static_cast<double>(tp) / static_cast<double>(positives);
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

MetricsReport make_report(std::span<const double> scores, std::span<const int> labels,
                          double threshold) {
  MetricsReport r;
  r.pr_points = pr_curve(scores, labels);
  double prev_recall = 0.0;
  for (const auto& p : r.pr_points) {
    r.auprc += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
  }
  const Prf prf = prf_at_threshold(scores, labels, threshold);
  r.precision = prf.precision;
  r.recall = prf.recall;
  r.f1 = prf.f1;
  r.threshold = threshold;
  r.positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  r.negatives = labels.size() - r.positives;
  return r;
}

void write_pr_curve_csv(std::span<const PrPoint> points, const std::filesystem::path& path,
                        const std::optional<Provenance>& provenance) {
  CsvWriter w(path, {"recall", "precision"}, provenance);
  for (const auto& p : points) w.write_row({format_real(p.recall), format_real(p.precision)});
}

void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path,
                       const std::optional<Provenance>& provenance) {
  CsvWriter w(path, {"model", "split", "auprc", "precision", "recall", "f1", "threshold"},
              provenance);
  for (const auto& r : rows) {
    w.write_row({r.model, r.split, format_real(r.report.auprc),
                 format_real(r.report.precision), format_real(r.report.recall),
                 format_real(r.report.f1), format_real(r.report.threshold)});
  }
}

}  // namespace hybridfl
