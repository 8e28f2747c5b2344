#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mosaic/volume.hpp"

namespace mosaic {

// Axis-aligned ellipsoid; earlier entries win where ellipsoids overlap.
struct PhantomOrgan {
    int id = 1;
    std::array<double, 3> center{0, 0, 0};  // (x, y, z) voxel coordinates
    std::array<double, 3> radii{1, 1, 1};   // voxels, > 0
};

struct Phantom {
    CtVolume volume;
    SegMap seg;
};

// Synthetic test volume: background at -30 HU, organ voxels offset per id,
// Gaussian noise sigma = 5 HU. Bit-identical for equal seeds.
Phantom make_phantom(std::uint64_t seed, std::array<Index, 3> dims,
                     const std::vector<PhantomOrgan>& organs);

// A 13-organ layout roughly echoing the BTCV size skew, for CLI demos and
// end-to-end tests.
std::vector<PhantomOrgan> default_phantom_layout(std::array<Index, 3> dims);

}  // namespace mosaic
