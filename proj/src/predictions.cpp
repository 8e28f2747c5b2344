#include "mosaic/predictions.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mosaic/errors.hpp"

namespace mosaic {

void PredictionSet::add(PredictionRecord record) {
    if (record.score < 0.0 || record.score > 1.0)
        throw ConfigError("PredictionSet: score outside [0,1]");
    if (record.label && *record.label != 0 && *record.label != 1)
        throw ConfigError("PredictionSet: label must be 0 or 1");
    auto key = std::make_tuple(record.volume_id, static_cast<int>(record.view),
                               record.slice_index, record.organ);
    if (!index_.emplace(key, records_.size()).second)
        throw ConfigError("PredictionSet: duplicate (volume, view, slice, organ) key");
    records_.push_back(std::move(record));
}

std::vector<std::string> PredictionSet::volume_ids() const {
    std::vector<std::string> ids;
    for (const auto& r : records_)
        if (std::find(ids.begin(), ids.end(), r.volume_id) == ids.end())
            ids.push_back(r.volume_id);
    return ids;
}

std::vector<std::optional<double>> PredictionSet::view_scores(const std::string& volume_id,
                                                              int organ, ViewId view,
                                                              Index slice_count) const {
    std::vector<std::optional<double>> scores(slice_count);
    for (Index s = 0; s < slice_count; ++s) {
        auto it = index_.find(std::make_tuple(volume_id, static_cast<int>(view), s, organ));
        if (it != index_.end()) scores[s] = records_[it->second].score;
    }
    return scores;
}

PredictionSet read_predictions_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty prediction file");
    bool has_label = line.find("label") != std::string::npos;

    PredictionSet set;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string vol, view, idx, organ, score, label;
        bool ok = static_cast<bool>(std::getline(ss, vol, ',')) &&
                  std::getline(ss, view, ',') && std::getline(ss, idx, ',') &&
                  std::getline(ss, organ, ',') && std::getline(ss, score, ',');
        if (!ok) throw ParseError(path + ":" + std::to_string(lineno) + ": need 5+ columns");
        PredictionRecord r;
        r.volume_id = vol;
        try {
            r.view = view_from_name(view);
            r.slice_index = std::stol(idx);
            r.organ = std::stoi(organ);
            r.score = std::stod(score);
            if (has_label && std::getline(ss, label, ',') && !label.empty())
                r.label = std::stoi(label);
        } catch (const ConfigError&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad view name");
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad numeric field");
        }
        try {
            set.add(std::move(r));
        } catch (const ConfigError& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return set;
}

void write_predictions_csv(const PredictionSet& predictions, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    bool any_label = false;
    for (const auto& r : predictions.records()) any_label |= r.label.has_value();
    out << "volume_id,view,slice_index,organ,score";
    if (any_label) out << ",label";
    out << "\n";
    out.precision(10);
    for (const auto& r : predictions.records()) {
        out << r.volume_id << ',' << view_name(r.view) << ',' << r.slice_index << ',' << r.organ
            << ',' << r.score;
        if (any_label) out << ',' << (r.label ? std::to_string(*r.label) : std::string());
        out << '\n';
    }
    if (!out) throw IoError("short write to " + path);
}

}  // namespace mosaic
