#include "mosaic/slc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace mosaic {

void SlcConfig::validate() const {
    if (delta <= 0) throw ConfigError("SlcConfig: delta must be > 0");
    if (epsilon <= 0) throw ConfigError("SlcConfig: epsilon must be > 0");
}

OrganAreaProfile organ_areas(const SegMap& seg, ViewId view, int organ) {
    if (!seg.organ_table.count(organ))
        throw UnknownOrgan("organ_areas: organ id " + std::to_string(organ));
    const GridI& g = seg.labels;
    const Index h = g.height(), w = g.width(), d = g.depth();
    OrganAreaProfile profile;
    profile.organ = organ;
    profile.view = view;
    profile.areas.assign(view_slice_count(g, view), 0);
    // counts are rotation-invariant, so tally along the raw axes
    for (Index z = 0; z < d; ++z)
        for (Index y = 0; y < w; ++y)
            for (Index x = 0; x < h; ++x) {
                if (g(x, y, z) != organ) continue;
                switch (view) {
                    case ViewId::axial: ++profile.areas[z]; break;
                    case ViewId::coronal: ++profile.areas[y]; break;
                    case ViewId::sagittal: ++profile.areas[x]; break;
                }
            }
    return profile;
}

std::optional<Anchor> center_slice(const OrganAreaProfile& profile) {
    Anchor best;
    for (std::size_t s = 0; s < profile.areas.size(); ++s) {
        if (profile.areas[s] > best.area) {
            best.area = profile.areas[s];
            best.index = static_cast<Index>(s);
        }
    }
    if (best.area == 0) return std::nullopt;
    return best;
}

SlcResult slc_score(const OrganAreaProfile& profile, const std::set<Index>& selected,
                    const SlcConfig& config) {
    config.validate();
    const auto n_v = static_cast<Index>(profile.areas.size());
    for (Index s : selected)
        if (s < 0 || s >= n_v) throw IndexError("slc_score: selected index out of range");

    SlcResult result;
    result.organ = profile.organ;
    result.view = profile.view;
    result.selected.assign(selected.begin(), selected.end());

    auto anchor = center_slice(profile);
    if (!anchor) return result;  // absent organ: no score
    result.anchor_area = anchor->area;
    result.anchor_index = anchor->index;

    if (selected.empty()) {
        result.slc = 0.0;
        return result;
    }
    double num = 0, den = 0;
    const double a_star = static_cast<double>(anchor->area);
    for (Index s : selected) {
        double coverage = static_cast<double>(profile.areas[s]) / (a_star + config.epsilon);
        double dist = std::abs(static_cast<double>(s - anchor->index)) / static_cast<double>(n_v);
        double weight = std::exp(-dist / config.delta);
        num += coverage * weight;
        den += weight;
    }
    result.slc = num / den;
    return result;
}

std::vector<Index> top_percent_select(const std::vector<double>& scores, double k_percent) {
    if (k_percent <= 0 || k_percent > 100)
        throw ConfigError("top_percent_select: k must lie in (0, 100]");
    const auto n = static_cast<Index>(scores.size());
    if (n == 0) return {};
    auto count = static_cast<Index>(
        std::ceil(k_percent * static_cast<double>(n) / 100.0 - 1e-9));
    count = std::clamp<Index>(count, 1, n);
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    order.resize(count);
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<Index> threshold_select(const std::vector<double>& scores, double threshold) {
    std::vector<Index> out;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (scores[i] >= threshold) out.push_back(static_cast<Index>(i));
    return out;
}

namespace {

struct SweepInput {
    std::string volume_id;
    std::vector<int> organs;  // present organs, ascending
    // profiles[organ][view], scores[organ][view]
    std::map<int, std::array<OrganAreaProfile, 3>> profiles;
    std::map<int, std::array<std::vector<double>, 3>> scores;
};

SweepInput prepare_sweep(const SegMap& seg, const PredictionSet& predictions) {
    auto ids = predictions.volume_ids();
    if (ids.empty()) throw MissingPredictions("slc_sweep: prediction set is empty");
    if (ids.size() > 1) throw ConfigError("slc_sweep: predictions span multiple volumes");

    SweepInput in;
    in.volume_id = ids[0];
    for (const auto& [organ, name] : seg.organ_table) {
        if (organ <= 0) continue;
        std::array<OrganAreaProfile, 3> profiles;
        bool present = false;
        for (ViewId view : kAllViews) {
            profiles[static_cast<int>(view)] = organ_areas(seg, view, organ);
            present |= center_slice(profiles[static_cast<int>(view)]).has_value();
        }
        if (!present) continue;  // absent organs are excluded from evaluation
        std::array<std::vector<double>, 3> scores;
        for (ViewId view : kAllViews) {
            Index n = view_slice_count(seg.labels, view);
            auto maybe = predictions.view_scores(in.volume_id, organ, view, n);
            std::vector<double>& dst = scores[static_cast<int>(view)];
            dst.reserve(n);
            for (Index s = 0; s < n; ++s) {
                if (!maybe[s])
                    throw MissingPredictions("slc_sweep: missing score for organ " +
                                             std::to_string(organ) + ", " + view_name(view) +
                                             " slice " + std::to_string(s));
                dst.push_back(*maybe[s]);
            }
        }
        in.organs.push_back(organ);
        in.profiles[organ] = std::move(profiles);
        in.scores[organ] = std::move(scores);
    }
    if (in.organs.empty()) throw EmptyDataset("slc_sweep: no organs present in ground truth");
    return in;
}

void append_cell_rows(SlcSweepTable& table, const SweepInput& in, double delta, double top_col,
                      const std::map<int, std::array<double, 3>>& cell) {
    std::array<std::pair<double, int>, 3> view_acc{};  // (sum, n) per view
    for (int organ : in.organs) {
        const auto& per_view = cell.at(organ);
        for (ViewId view : kAllViews) {
            int vi = static_cast<int>(view);
            table.rows.push_back({delta, top_col, organ, view, per_view[vi]});
            view_acc[vi].first += per_view[vi];
            ++view_acc[vi].second;
        }
    }
    for (ViewId view : kAllViews) {
        int vi = static_cast<int>(view);
        table.rows.push_back(
            {delta, top_col, -1, view, view_acc[vi].first / view_acc[vi].second});
    }
}

}  // namespace

double SlcSweepTable::overall(double delta, double top_percent) const {
    double sum = 0;
    int n = 0;
    for (const SlcSweepRow& r : rows) {
        if (r.delta == delta && r.top_percent == top_percent && r.organ >= 0) {
            sum += r.slc;
            ++n;
        }
    }
    if (n == 0) throw EmptyDataset("SlcSweepTable::overall: no such cell");
    return sum / n;
}

SlcSweepTable slc_sweep(const SegMap& seg, const PredictionSet& predictions,
                        const std::vector<double>& deltas, const std::vector<double>& top_percents,
                        double epsilon) {
    SweepInput in = prepare_sweep(seg, predictions);
    SlcSweepTable table;
    for (double delta : deltas) {
        SlcConfig config{delta, epsilon};
        config.validate();
        for (double top : top_percents) {
            std::map<int, std::array<double, 3>> cell;
            for (int organ : in.organs) {
                for (ViewId view : kAllViews) {
                    int vi = static_cast<int>(view);
                    auto sel = top_percent_select(in.scores.at(organ)[vi], top);
                    std::set<Index> selected(sel.begin(), sel.end());
                    SlcResult r = slc_score(in.profiles.at(organ)[vi], selected, config);
                    cell[organ][vi] = r.slc.value_or(0.0);
                }
            }
            append_cell_rows(table, in, delta, top, cell);
        }
    }
    return table;
}

SlcSweepTable slc_threshold_sweep(const SegMap& seg, const PredictionSet& predictions,
                                  const std::vector<double>& deltas, double threshold,
                                  double epsilon) {
    SweepInput in = prepare_sweep(seg, predictions);
    SlcSweepTable table;
    for (double delta : deltas) {
        SlcConfig config{delta, epsilon};
        config.validate();
        std::map<int, std::array<double, 3>> cell;
        for (int organ : in.organs) {
            for (ViewId view : kAllViews) {
                int vi = static_cast<int>(view);
                auto sel = threshold_select(in.scores.at(organ)[vi], threshold);
                std::set<Index> selected(sel.begin(), sel.end());
                SlcResult r = slc_score(in.profiles.at(organ)[vi], selected, config);
                cell[organ][vi] = r.slc.value_or(0.0);
            }
        }
        append_cell_rows(table, in, delta, threshold, cell);
    }
    return table;
}

void write_sweep_csv(const SlcSweepTable& table, const OrganTable& organs,
                     const std::string& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "model,delta,top_percent,organ,view,slc\n";
    out.precision(10);
    for (const SlcSweepRow& r : table.rows) {
        out << model << ',' << r.delta << ',' << r.top_percent << ','
            << (r.organ < 0 ? std::string("overall") : organ_name(organs, r.organ)) << ','
            << view_name(r.view) << ',' << r.slc << '\n';
    }
    if (!out) throw IoError("short write to " + path);
}

}  // namespace mosaic
