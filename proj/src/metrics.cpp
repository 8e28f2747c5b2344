#include "mosaic/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace mosaic {

ConfusionMetrics confusion_metrics(std::span<const double> scores, std::span<const int> labels,
                                   double threshold) {
    if (scores.size() != labels.size()) throw ShapeError("confusion_metrics: length mismatch");
    if (scores.empty()) throw EmptyDataset("confusion_metrics: no items");
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool pred = scores[i] >= threshold;
        bool truth = labels[i] != 0;
        tp += pred && truth;
        fp += pred && !truth;
        fn += !pred && truth;
    }
    ConfusionMetrics m;
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ShapeError("roc_auc: length mismatch");
    std::int64_t pos = 0, neg = 0;
    for (int l : labels) (l ? pos : neg) += 1;
    if (pos == 0 || neg == 0) throw UndefinedMetric("roc_auc: needs both classes");

    // rank-sum with midranks for ties
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double pos_rank_sum = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]]) pos_rank_sum += midrank;
        i = j;
    }
    double p = static_cast<double>(pos);
    return (pos_rank_sum - p * (p + 1) / 2.0) / (p * static_cast<double>(neg));
}

double pr_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ShapeError("pr_auc: length mismatch");
    std::int64_t total_pos = 0;
    for (int l : labels) total_pos += l ? 1 : 0;
    if (total_pos == 0) throw UndefinedMetric("pr_auc: needs at least one positive");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0;
    double prev_recall = 0;
    std::int64_t tp = 0, seen = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t k = i; k < j; ++k) {
            ++seen;
            if (labels[order[k]]) ++tp;
        }
        double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
        double precision = static_cast<double>(tp) / static_cast<double>(seen);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return ap;
}

namespace {

MetricsRow row_from(std::span<const double> scores, std::span<const int> labels,
                    double threshold) {
    MetricsRow row;
    ConfusionMetrics c = confusion_metrics(scores, labels, threshold);
    row.precision = c.precision;
    row.recall = c.recall;
    row.f1 = c.f1;
    for (int l : labels) row.support += l ? 1 : 0;
    bool has_pos = row.support > 0;
    bool has_neg = row.support < static_cast<std::int64_t>(labels.size());
    row.roc_auc = has_pos && has_neg ? roc_auc(scores, labels) : 0.0;
    row.pr_auc = has_pos ? pr_auc(scores, labels) : 0.0;
    return row;
}

}  // namespace

MetricsReport evaluate_predictions(const PredictionSet& predictions, double threshold,
                                   const std::map<int, double>& organ_thresholds) {
    if (predictions.empty()) throw EmptyDataset("evaluate_predictions: no records");
    std::map<int, std::pair<std::vector<double>, std::vector<int>>> by_organ;
    std::vector<double> all_scores;
    std::vector<int> all_labels;
    for (const PredictionRecord& r : predictions.records()) {
        if (!r.label) throw ConfigError("evaluate_predictions: record without a label");
        by_organ[r.organ].first.push_back(r.score);
        by_organ[r.organ].second.push_back(*r.label);
        all_scores.push_back(r.score);
        all_labels.push_back(*r.label);
    }
    MetricsReport report;
    for (const auto& [organ, data] : by_organ) {
        auto it = organ_thresholds.find(organ);
        double thr = it != organ_thresholds.end() ? it->second : threshold;
        report.per_organ[organ] = row_from(data.first, data.second, thr);
    }
    report.overall = row_from(all_scores, all_labels, threshold);
    return report;
}

namespace {

nlohmann::ordered_json row_json(const MetricsRow& r) {
    return {{"precision", r.precision}, {"recall", r.recall},   {"f1", r.f1},
            {"roc_auc", r.roc_auc},     {"pr_auc", r.pr_auc},   {"support", r.support}};
}

}  // namespace

std::string metrics_json(const MetricsReport& report, const OrganTable& organs) {
    nlohmann::ordered_json j;
    for (const auto& [organ, row] : report.per_organ)
        j["per_organ"][organ_name(organs, organ)] = row_json(row);
    j["overall"] = row_json(report.overall);
    return j.dump(2);
}

void write_metrics_csv(const MetricsReport& report, const OrganTable& organs,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "organ,precision,recall,f1,roc_auc,pr_auc,support\n";
    out.precision(6);
    auto emit = [&](const std::string& name, const MetricsRow& r) {
        out << name << ',' << r.precision << ',' << r.recall << ',' << r.f1 << ',' << r.roc_auc
            << ',' << r.pr_auc << ',' << r.support << '\n';
    };
    for (const auto& [organ, row] : report.per_organ) emit(organ_name(organs, organ), row);
    emit("overall", report.overall);
    if (!out) throw IoError("short write to " + path);
}

}  // namespace mosaic
