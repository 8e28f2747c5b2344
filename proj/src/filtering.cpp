#include "mosaic/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mosaic {

InformativenessLabel label_informative(const LabelSlice& slice, double tau) {
    if (tau < 0.0 || tau > 1.0) throw ConfigError("label_informative: tau must lie in [0,1]");
    const LabelImage& g = slice.data;
    if (g.rows() < 1 || g.cols() < 1) throw InvalidSlice("label_informative: empty slice");
    std::int64_t fg = 0;
    for (Index r = 0; r < g.rows(); ++r)
        for (Index c = 0; c < g.cols(); ++c)
            if (g(r, c) > 0) ++fg;
    InformativenessLabel out;
    out.view = slice.view;
    out.slice_index = slice.index;
    out.foreground_ratio = static_cast<double>(fg) / static_cast<double>(g.rows() * g.cols());
    out.label = out.foreground_ratio >= tau ? 1 : 0;
    return out;
}

std::vector<InformativenessLabel> filter_volume(const SegMap& seg, ViewId view, double tau) {
    std::vector<InformativenessLabel> labels;
    const Index n = view_slice_count(seg.labels, view);
    labels.reserve(n);
    for (Index i = 0; i < n; ++i)
        labels.push_back(label_informative(extract_slice(seg.labels, view, i), tau));
    return labels;
}

RetentionReport retention_report(const RetentionInput& counts_by_view) {
    if (counts_by_view.empty()) throw EmptyDataset("retention_report: no views");
    RetentionReport report;
    for (ViewId view : kAllViews) {
        auto it = counts_by_view.find(view);
        if (it == counts_by_view.end() || it->second.empty()) continue;
        double mean_total = 0, mean_retained = 0;
        for (auto [total, retained] : it->second) {
            mean_total += static_cast<double>(total);
            mean_retained += static_cast<double>(retained);
        }
        mean_total /= static_cast<double>(it->second.size());
        mean_retained /= static_cast<double>(it->second.size());
        RetentionRow row;
        row.view = view;
        row.total_slices = mean_total;
        row.retained_slices = mean_retained;
        row.retention_rate = mean_total > 0 ? mean_retained / mean_total : 0.0;
        row.reduction_pct = 100.0 * (1.0 - row.retention_rate);
        report.rows.push_back(row);
    }
    if (report.rows.empty()) throw EmptyDataset("retention_report: no counts");
    return report;
}

RetentionReport retention_report(std::span<const std::vector<InformativenessLabel>> volumes) {
    RetentionInput counts;
    for (const auto& labels : volumes) {
        std::map<ViewId, std::pair<std::int64_t, std::int64_t>> per_view;
        for (const InformativenessLabel& l : labels) {
            auto& [total, retained] = per_view[l.view];
            ++total;
            retained += l.label;
        }
        for (auto& [view, tr] : per_view) counts[view].push_back(tr);
    }
    return retention_report(counts);
}

void write_retention_csv(const RetentionReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "view,total_slices,retained_slices,retention_rate,reduction_pct\n";
    out.precision(6);
    for (const RetentionRow& r : report.rows) {
        out << view_name(r.view) << ',' << r.total_slices << ',' << r.retained_slices << ','
            << r.retention_rate << ',' << r.reduction_pct << '\n';
    }
    if (!out) throw IoError("short write to " + path);
}

double weighted_bce(std::span<const double> scores, std::span<const int> labels,
                    double pos_weight) {
    if (scores.size() != labels.size()) throw ShapeError("weighted_bce: length mismatch");
    if (scores.empty()) throw EmptyDataset("weighted_bce: no items");
    if (pos_weight <= 0) throw ConfigError("weighted_bce: pos_weight must be > 0");
    double sum = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        double p = std::clamp(scores[i], 1e-7, 1.0 - 1e-7);
        sum += labels[i] ? -pos_weight * std::log(p) : -std::log(1.0 - p);
    }
    return sum / static_cast<double>(scores.size());
}

GroundTruthScorer::GroundTruthScorer(const SegMap& seg) {
    for (ViewId view : kAllViews) {
        auto labels = filter_volume(seg, view, 0.0);
        auto& dst = ratios_[static_cast<int>(view)];
        dst.reserve(labels.size());
        for (const auto& l : labels) dst.push_back(l.foreground_ratio);
    }
}

double GroundTruthScorer::score(ViewId view, Index slice_index) const {
    const auto& r = ratios_[static_cast<int>(view)];
    if (slice_index < 0 || slice_index >= static_cast<Index>(r.size()))
        throw IndexError("GroundTruthScorer: slice index out of range");
    return r[slice_index];
}

FileScorer::FileScorer(const std::string& csv_path, const std::string& volume_id) {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(csv_path + ": empty score file");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string vol, view, idx, score;
        if (!std::getline(ss, vol, ',') || !std::getline(ss, view, ',') ||
            !std::getline(ss, idx, ',') || !std::getline(ss, score))
            throw ParseError(csv_path + ":" + std::to_string(lineno) + ": need 4 columns");
        if (vol != volume_id) continue;
        double s = std::stod(score);
        if (s < 0.0 || s > 1.0)
            throw ParseError(csv_path + ":" + std::to_string(lineno) + ": score outside [0,1]");
        auto key = std::make_pair(static_cast<int>(view_from_name(view)),
                                  static_cast<Index>(std::stol(idx)));
        if (!scores_.emplace(key, s).second)
            throw ParseError(csv_path + ":" + std::to_string(lineno) + ": duplicate key");
    }
}

double FileScorer::score(ViewId view, Index slice_index) const {
    auto it = scores_.find({static_cast<int>(view), slice_index});
    if (it == scores_.end()) throw MissingPredictions("FileScorer: no score for slice");
    return it->second;
}

}  // namespace mosaic
