#include "mosaic/phantom.hpp"

#include <cmath>

#include "mosaic/rng.hpp"

namespace mosaic {

namespace {

constexpr double kBaseHu = -30.0;
constexpr double kNoiseSigma = 5.0;

// Organ voxels sit above the base, staggered by id so windows and
// normalization have structure to work with.
double organ_offset(int id) { return 50.0 + 8.0 * static_cast<double>(id); }

}  // namespace

Phantom make_phantom(std::uint64_t seed, std::array<Index, 3> dims,
                     const std::vector<PhantomOrgan>& organs) {
    const auto [h, w, d] = dims;
    if (h < 1 || w < 1 || d < 1) throw ConfigError("make_phantom: dims must be >= 1");
    for (const PhantomOrgan& o : organs) {
        if (o.id <= 0) throw ConfigError("make_phantom: organ id must be > 0");
        for (int a = 0; a < 3; ++a) {
            if (o.radii[a] <= 0) throw ConfigError("make_phantom: radii must be > 0");
            double lo = o.center[a] - o.radii[a];
            double hi = o.center[a] + o.radii[a];
            if (lo < 0 || hi > static_cast<double>(dims[a] - 1))
                throw ConfigError("make_phantom: ellipsoid out of bounds");
        }
    }

    Phantom p;
    p.seg.labels = GridI(h, w, d, 0);
    p.seg.organ_table = btcv_organ_table();
    for (const PhantomOrgan& o : organs)
        if (!p.seg.organ_table.count(o.id))
            p.seg.organ_table[o.id] = "organ_" + std::to_string(o.id);

    p.volume.grid = GridD(h, w, d, 0.0);
    std::mt19937_64 rng(seed);
    for (Index z = 0; z < d; ++z) {
        for (Index y = 0; y < w; ++y) {
            for (Index x = 0; x < h; ++x) {
                int label = 0;
                for (const PhantomOrgan& o : organs) {
                    double q = 0;
                    const double coord[3] = {static_cast<double>(x), static_cast<double>(y),
                                             static_cast<double>(z)};
                    for (int a = 0; a < 3; ++a) {
                        double t = (coord[a] - o.center[a]) / o.radii[a];
                        q += t * t;
                    }
                    if (q <= 1.0) {
                        label = o.id;
                        break;
                    }
                }
                p.seg.labels(x, y, z) = label;
                double hu = kBaseHu + (label > 0 ? organ_offset(label) : 0.0) +
                            kNoiseSigma * det_gaussian(rng);
                p.volume.grid(x, y, z) = hu;
            }
        }
    }
    return p;
}

std::vector<PhantomOrgan> default_phantom_layout(std::array<Index, 3> dims) {
    const double h = static_cast<double>(dims[0] - 1);
    const double w = static_cast<double>(dims[1] - 1);
    const double d = static_cast<double>(dims[2] - 1);
    auto organ = [&](int id, double cx, double cy, double cz, double rx, double ry, double rz) {
        PhantomOrgan o;
        o.id = id;
        o.center = {cx * h, cy * w, cz * d};
        o.radii = {std::max(1.0, rx * h), std::max(1.0, ry * w), std::max(1.0, rz * d)};
        // keep the ellipsoid inside the grid after the minimum-radius bump
        for (int a = 0; a < 3; ++a) {
            double extent = a == 0 ? h : a == 1 ? w : d;
            o.radii[a] = std::min(o.radii[a], std::min(o.center[a], extent - o.center[a]));
        }
        return o;
    };
    // rough BTCV size skew: one big liver, mid-size spleen/stomach/kidneys,
    // thin vessels, tiny adrenals
    return {
        organ(6, 0.34, 0.38, 0.52, 0.20, 0.24, 0.26),   // liver
        organ(1, 0.76, 0.30, 0.56, 0.10, 0.10, 0.12),   // spleen
        organ(7, 0.58, 0.52, 0.50, 0.12, 0.12, 0.14),   // stomach
        organ(2, 0.30, 0.72, 0.34, 0.08, 0.08, 0.10),   // right kidney
        organ(3, 0.72, 0.72, 0.34, 0.08, 0.08, 0.10),   // left kidney
        organ(11, 0.52, 0.62, 0.42, 0.14, 0.05, 0.04),  // pancreas
        organ(8, 0.50, 0.56, 0.50, 0.035, 0.035, 0.34), // aorta
        organ(9, 0.42, 0.46, 0.50, 0.035, 0.035, 0.30), // inferior vena cava
        organ(10, 0.46, 0.50, 0.62, 0.05, 0.05, 0.03),  // portal vein
        organ(4, 0.40, 0.56, 0.66, 0.04, 0.04, 0.05),   // gallbladder
        organ(5, 0.50, 0.36, 0.82, 0.03, 0.03, 0.10),   // esophagus
        organ(12, 0.34, 0.66, 0.24, 0.025, 0.025, 0.03),// right adrenal
        organ(13, 0.68, 0.66, 0.24, 0.025, 0.025, 0.03),// left adrenal
    };
}

}  // namespace mosaic
