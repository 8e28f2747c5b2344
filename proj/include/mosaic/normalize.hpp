#pragma once

#include <span>

#include "mosaic/volume.hpp"

namespace mosaic {

// Soft-tissue default window.
constexpr double kDefaultWindowLo = -50.0;
constexpr double kDefaultWindowHi = 200.0;

// Clamps every voxel to [lo, hi]. Metadata is untouched.
CtVolume window_hu(const CtVolume& vol, double lo = kDefaultWindowLo,
                   double hi = kDefaultWindowHi);

// Maps intensities to [0,1] via the 1st/99th percentiles: (v - P1)/(P99 - P1),
// clamped. Percentiles use sorted order statistics with linear interpolation.
// Throws DegenerateIntensity when P99 - P1 < 1e-12.
CtVolume percentile_normalize(const CtVolume& vol);

// q in [0,1]; linear interpolation between order statistics.
double percentile(std::span<const double> values, double q);

}  // namespace mosaic
