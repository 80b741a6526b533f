#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hybridfl/csv.hpp"

namespace hybridfl {

inline constexpr double kDefaultThreshold = 0.5;

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double auprc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double threshold = kDefaultThreshold;
  std::vector<PrPoint> pr_points;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

// One (recall, precision) point per distinct score, scanning scores from
// high to low. Equal scores form a single threshold group.
std::vector<PrPoint> pr_curve(std::span<const double> scores, std::span<const int> labels);

// Average precision: sum over threshold groups of (R_n - R_{n-1}) * P_n.
double auprc(std::span<const double> scores, std::span<const int> labels);

// Predicts positive when score >= threshold; 0/0 precision is 0.
Prf prf_at_threshold(std::span<const double> scores, std::span<const int> labels,
                     double threshold = kDefaultThreshold);

double f1_score(double precision, double recall);

MetricsReport make_report(std::span<const double> scores, std::span<const int> labels,
                          double threshold = kDefaultThreshold);

// metrics.csv: model,split,auprc,precision,recall,f1,threshold
struct MetricsRow {
  std::string model;
  std::string split;
  MetricsReport report;
};

void write_pr_curve_csv(std::span<const PrPoint> points, const std::filesystem::path& path,
                        const std::optional<Provenance>& provenance = std::nullopt);
void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path,
                       const std::optional<Provenance>& provenance = std::nullopt);

}  // namespace hybridfl
