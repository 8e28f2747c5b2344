#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "mosaic/slicer.hpp"

namespace mosaic {

struct PredictionRecord {
    std::string volume_id;
    ViewId view = ViewId::axial;
    Index slice_index = 0;
    int organ = 0;
    double score = 0;
    std::optional<int> label;  // binary ground truth, when known
};

// Per (volume, view, slice, organ) scores. Keys are unique; scores in [0,1].
class PredictionSet {
public:
    void add(PredictionRecord record);

    const std::vector<PredictionRecord>& records() const { return records_; }
    bool empty() const { return records_.empty(); }

    std::vector<std::string> volume_ids() const;

    // Scores for one (volume, organ, view), indexed by slice. Missing slices
    // are empty optionals.
    std::vector<std::optional<double>> view_scores(const std::string& volume_id, int organ,
                                                   ViewId view, Index slice_count) const;

private:
    std::vector<PredictionRecord> records_;
    std::map<std::tuple<std::string, int, Index, int>, std::size_t> index_;
};

// CSV with header volume_id,view,slice_index,organ,score[,label].
PredictionSet read_predictions_csv(const std::string& path);
void write_predictions_csv(const PredictionSet& predictions, const std::string& path);

}  // namespace mosaic
