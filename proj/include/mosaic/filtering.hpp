#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "mosaic/slicer.hpp"
#include "mosaic/volume.hpp"

namespace mosaic {

// Default foreground-ratio threshold: keeps slices carrying at least 0.1 % of
// labeled pixels, small enough not to drop the adrenal glands.
constexpr double kDefaultTau = 0.001;

struct InformativenessLabel {
    ViewId view = ViewId::axial;
    Index slice_index = 0;
    int label = 0;  // 1 iff foreground_ratio >= tau
    double foreground_ratio = 0.0;
};

// Binary informativeness of a single label slice at native resolution.
InformativenessLabel label_informative(const LabelSlice& slice, double tau);

// One label per slice of the view, in index order.
std::vector<InformativenessLabel> filter_volume(const SegMap& seg, ViewId view, double tau);

struct RetentionRow {
    ViewId view = ViewId::axial;
    double total_slices = 0;    // mean per-volume total
    double retained_slices = 0; // mean per-volume retained
    double retention_rate = 0;
    double reduction_pct = 0;
};

struct RetentionReport {
    std::vector<RetentionRow> rows;  // axial, coronal, sagittal order
};

// Aggregates per-volume (total, retained) pairs by unweighted means.
using RetentionInput = std::map<ViewId, std::vector<std::pair<std::int64_t, std::int64_t>>>;
RetentionReport retention_report(const RetentionInput& counts_by_view);

RetentionReport retention_report(std::span<const std::vector<InformativenessLabel>> volumes);

void write_retention_csv(const RetentionReport& report, const std::string& path);

// Mean of -[pos_weight * y log p + (1 - y) log(1 - p)]; scores clamped to
// [1e-7, 1 - 1e-7].
double weighted_bce(std::span<const double> scores, std::span<const int> labels,
                    double pos_weight);

// Relevance score in [0,1] for (view, slice) over one prepared volume.
// Implementations must be deterministic and safe for concurrent queries.
class SliceScorer {
public:
    virtual ~SliceScorer() = default;
    virtual double score(ViewId view, Index slice_index) const = 0;
};

// Oracle scorer: the slice's ground-truth foreground ratio.
class GroundTruthScorer : public SliceScorer {
public:
    explicit GroundTruthScorer(const SegMap& seg);
    double score(ViewId view, Index slice_index) const override;

private:
    std::array<std::vector<double>, 3> ratios_;
};

// Scores read from a CSV (volume_id,view,slice_index,score), so externally
// trained filter models can be evaluated.
class FileScorer : public SliceScorer {
public:
    FileScorer(const std::string& csv_path, const std::string& volume_id);
    double score(ViewId view, Index slice_index) const override;

private:
    std::map<std::pair<int, Index>, double> scores_;
};

}  // namespace mosaic
