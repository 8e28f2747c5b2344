#include "mosaic/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mosaic {

CtVolume window_hu(const CtVolume& vol, double lo, double hi) {
    if (lo >= hi) throw InvalidWindow("window_hu: lo must be < hi");
    CtVolume out = vol;
    for (double& v : out.grid.raw()) v = std::clamp(v, lo, hi);
    return out;
}

double percentile(std::span<const double> values, double q) {
    if (values.empty()) throw EmptyDataset("percentile: no values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() == 1) return sorted[0];
    double h = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo >= sorted.size() - 1) return sorted.back();
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

CtVolume percentile_normalize(const CtVolume& vol) {
    if (vol.grid.size() < 2) throw EmptyDataset("percentile_normalize: need at least 2 voxels");
    double p1 = percentile(vol.grid.raw(), 0.01);
    double p99 = percentile(vol.grid.raw(), 0.99);
    double range = p99 - p1;
    if (range < 1e-12)
        throw DegenerateIntensity("percentile_normalize: constant-intensity volume");
    CtVolume out = vol;
    for (double& v : out.grid.raw()) v = std::clamp((v - p1) / range, 0.0, 1.0);
    out.normalized = true;
    return out;
}

}  // namespace mosaic
