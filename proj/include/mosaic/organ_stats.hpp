#pragma once

#include <span>
#include <string>
#include <vector>

#include "mosaic/volume.hpp"

namespace mosaic {

// Volume-fraction (percent) and physical-size (cm^3) statistics for one organ
// across a dataset. Volumes that lack the organ are excluded from the order
// statistics but show up through count.
struct OrganStatsRow {
    int organ_id = 0;  // -1 means whole foreground (any nonzero label)
    std::string organ;
    double vf_min = 0, vf_median = 0, vf_mean = 0, vf_max = 0;
    double size_min = 0, size_median = 0, size_mean = 0, size_max = 0;
    int count = 0;
};

struct OrganStats {
    std::vector<OrganStatsRow> rows;  // whole foreground first, then organ id order
};

// jobs > 1 processes volumes in parallel; the result is schedule-independent.
OrganStats organ_stats(std::span<const SegMap> segmaps, int jobs = 1);

void write_stats_csv(const OrganStats& stats, const std::string& path);

}  // namespace mosaic
