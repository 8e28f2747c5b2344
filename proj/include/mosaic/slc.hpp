#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mosaic/predictions.hpp"
#include "mosaic/slicer.hpp"
#include "mosaic/volume.hpp"

namespace mosaic {

// Per-slice pixel counts of one organ along one view.
struct OrganAreaProfile {
    int organ = 0;
    ViewId view = ViewId::axial;
    std::vector<std::int64_t> areas;  // length = slice count of the view
};

struct SlcConfig {
    double delta = 0.1;    // proximity tolerance, in normalized-index units
    double epsilon = 1e-6;

    void validate() const;
};

// Anchor slice: (max area, argmax index), smallest index on ties.
// Empty optional when the organ is absent (all-zero profile).
struct Anchor {
    std::int64_t area = 0;
    Index index = 0;
};
std::optional<Anchor> center_slice(const OrganAreaProfile& profile);

struct SlcResult {
    int organ = 0;
    ViewId view = ViewId::axial;
    std::optional<double> slc;  // empty iff organ absent from ground truth
    std::int64_t anchor_area = 0;
    Index anchor_index = 0;
    std::vector<Index> selected;
};

OrganAreaProfile organ_areas(const SegMap& seg, ViewId view, int organ);

// Coverage C_s = A_s/(A* + eps), proximity w_s = exp(-(|s - s*|/N_v)/delta),
// SLC = sum(C w)/sum(w); 0 for an empty selection.
SlcResult slc_score(const OrganAreaProfile& profile, const std::set<Index>& selected,
                    const SlcConfig& config);

// Indices of the ceil(k% * N) highest scores; smaller index wins ties.
std::vector<Index> top_percent_select(const std::vector<double>& scores, double k_percent);

// Indices scoring at or above the threshold (Table-3 style selection).
std::vector<Index> threshold_select(const std::vector<double>& scores, double threshold);

// One sweep cell, long format: per (delta, top%, view) one row per present
// organ plus an "overall" row (organ -1, unweighted mean over organs).
struct SlcSweepRow {
    double delta = 0;
    double top_percent = 0;
    int organ = 0;  // -1 = "overall"
    ViewId view = ViewId::axial;
    double slc = 0;
};

struct SlcSweepTable {
    std::vector<SlcSweepRow> rows;

    // Unweighted mean over all present organ-view pairs of one cell.
    double overall(double delta, double top_percent) const;
};

// Per-(delta, top%) SLC of every present organ-view pair plus per-view
// overall rows. Absent organs are excluded from rows and means.
SlcSweepTable slc_sweep(const SegMap& seg, const PredictionSet& predictions,
                        const std::vector<double>& deltas, const std::vector<double>& top_percents,
                        double epsilon = 1e-6);

// Same grid but selecting by score threshold instead of top-%; the
// top_percent column then carries the threshold.
SlcSweepTable slc_threshold_sweep(const SegMap& seg, const PredictionSet& predictions,
                                  const std::vector<double>& deltas, double threshold,
                                  double epsilon = 1e-6);

void write_sweep_csv(const SlcSweepTable& table, const OrganTable& organs,
                     const std::string& model, const std::string& path);

}  // namespace mosaic
