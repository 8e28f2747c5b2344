#include "mosaic/organ_stats.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <numeric>
#include <thread>

namespace mosaic {

namespace {

struct VolumeCounts {
    std::map<int, std::int64_t> voxels_per_label;
    std::int64_t foreground = 0;
    std::int64_t total = 0;
    double voxel_cm3 = 0;
};

VolumeCounts count_one(const SegMap& seg) {
    VolumeCounts c;
    c.total = seg.labels.size();
    c.voxel_cm3 = seg.spacing[0] * seg.spacing[1] * seg.spacing[2] / 1000.0;
    for (std::int32_t v : seg.labels.raw()) {
        if (v > 0) {
            ++c.voxels_per_label[v];
            ++c.foreground;
        }
    }
    return c;
}

double median_of_sorted(const std::vector<double>& v) {
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

OrganStatsRow summarize(int id, const std::string& name, std::vector<double> vf,
                        std::vector<double> size) {
    OrganStatsRow row;
    row.organ_id = id;
    row.organ = name;
    row.count = static_cast<int>(vf.size());
    if (vf.empty()) return row;
    std::sort(vf.begin(), vf.end());
    std::sort(size.begin(), size.end());
    row.vf_min = vf.front();
    row.vf_max = vf.back();
    row.vf_median = median_of_sorted(vf);
    row.vf_mean = std::accumulate(vf.begin(), vf.end(), 0.0) / vf.size();
    row.size_min = size.front();
    row.size_max = size.back();
    row.size_median = median_of_sorted(size);
    row.size_mean = std::accumulate(size.begin(), size.end(), 0.0) / size.size();
    return row;
}

}  // namespace

OrganStats organ_stats(std::span<const SegMap> segmaps, int jobs) {
    if (segmaps.empty()) throw EmptyDataset("organ_stats: no segmentation maps");

    std::vector<VolumeCounts> counts(segmaps.size());
    if (jobs <= 1 || segmaps.size() == 1) {
        for (std::size_t i = 0; i < segmaps.size(); ++i) counts[i] = count_one(segmaps[i]);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i; (i = next.fetch_add(1)) < segmaps.size();)
                counts[i] = count_one(segmaps[i]);
        };
        std::vector<std::thread> pool;
        int n = std::min<int>(jobs, static_cast<int>(segmaps.size()));
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // union of labels over all volumes, plus names from the tables
    std::map<int, std::string> names;
    for (const SegMap& seg : segmaps)
        for (const auto& [id, name] : seg.organ_table)
            if (id > 0) names[id] = name;
    for (const VolumeCounts& c : counts)
        for (const auto& [id, n] : c.voxels_per_label)
            if (!names.count(id)) names[id] = "organ_" + std::to_string(id);

    OrganStats stats;
    {
        std::vector<double> vf, size;
        for (const VolumeCounts& c : counts) {
            if (c.foreground == 0) continue;
            vf.push_back(100.0 * static_cast<double>(c.foreground) / c.total);
            size.push_back(static_cast<double>(c.foreground) * c.voxel_cm3);
        }
        stats.rows.push_back(summarize(-1, "whole_foreground", std::move(vf), std::move(size)));
    }
    for (const auto& [id, name] : names) {
        std::vector<double> vf, size;
        for (const VolumeCounts& c : counts) {
            auto it = c.voxels_per_label.find(id);
            if (it == c.voxels_per_label.end()) continue;
            vf.push_back(100.0 * static_cast<double>(it->second) / c.total);
            size.push_back(static_cast<double>(it->second) * c.voxel_cm3);
        }
        stats.rows.push_back(summarize(id, name, std::move(vf), std::move(size)));
    }
    return stats;
}

void write_stats_csv(const OrganStats& stats, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "organ,vf_min,vf_med,vf_mean,vf_max,size_min,size_med,size_mean,size_max,count\n";
    out.precision(6);
    for (const OrganStatsRow& r : stats.rows) {
        out << r.organ << ',' << r.vf_min << ',' << r.vf_median << ',' << r.vf_mean << ','
            << r.vf_max << ',' << r.size_min << ',' << r.size_median << ',' << r.size_mean << ','
            << r.size_max << ',' << r.count << '\n';
    }
    if (!out) throw IoError("short write to " + path);
}

}  // namespace mosaic
