#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "mosaic/predictions.hpp"

namespace mosaic {

struct ConfusionMetrics {
    double precision = 0, recall = 0, f1 = 0;
};

// score >= threshold predicts positive; zero-denominator cases yield 0.
ConfusionMetrics confusion_metrics(std::span<const double> scores, std::span<const int> labels,
                                   double threshold = 0.5);

// Mann-Whitney formulation: (concordant + 0.5 * tied) / (P * N).
// Needs at least one positive and one negative label.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Average precision over descending score thresholds, ties grouped.
// Needs at least one positive label.
double pr_auc(std::span<const double> scores, std::span<const int> labels);

struct MetricsRow {
    double precision = 0, recall = 0, f1 = 0;
    double roc_auc = 0, pr_auc = 0;
    std::int64_t support = 0;  // number of positive labels
};

struct MetricsReport {
    std::map<int, MetricsRow> per_organ;
    MetricsRow overall;  // pooled over all records
};

// Standard metrics over labeled predictions; per-organ thresholds override
// the default. Records without labels are rejected.
MetricsReport evaluate_predictions(const PredictionSet& predictions, double threshold = 0.5,
                                   const std::map<int, double>& organ_thresholds = {});

std::string metrics_json(const MetricsReport& report, const OrganTable& organs);
void write_metrics_csv(const MetricsReport& report, const OrganTable& organs,
                       const std::string& path);

}  // namespace mosaic
