#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mosaic/volume.hpp"

namespace mosaic {

// Anatomical planes, indexed along z, y, x respectively.
enum class ViewId { axial, coronal, sagittal };

inline constexpr std::array<ViewId, 3> kAllViews = {ViewId::axial, ViewId::coronal,
                                                    ViewId::sagittal};

const char* view_name(ViewId v);
ViewId view_from_name(const std::string& name);

template <class Scalar>
using Plane = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Image = Plane<double>;
using LabelImage = Plane<std::int32_t>;

template <class Scalar>
struct Slice {
    Plane<Scalar> data;
    ViewId view = ViewId::axial;
    Index index = 0;
};

using IntensitySlice = Slice<double>;
using LabelSlice = Slice<std::int32_t>;

// 2.5D triplet: a slice stacked with its two neighbors.
struct TriSlice {
    std::array<Image, 3> channels;
    Index center_index = 0;
};

// Nine channels, fixed order: axial triplet, coronal triplet, sagittal triplet.
struct MultiViewTensor {
    std::array<Image, 9> channels;
};

// Quarter-turn counter-clockwise: out(r, c) = g(c, cols - 1 - r).
template <class Scalar>
Plane<Scalar> rotate90_ccw(const Plane<Scalar>& g) {
    Plane<Scalar> out(g.cols(), g.rows());
    for (Index r = 0; r < out.rows(); ++r)
        for (Index c = 0; c < out.cols(); ++c) out(r, c) = g(c, g.cols() - 1 - r);
    return out;
}

// Number of slices a view yields: axial D, coronal W, sagittal H.
template <class Scalar>
Index view_slice_count(const VolumeGrid<Scalar>& grid, ViewId view);

// Slice extraction with the per-view rotation conventions:
//   axial(z)    = V[:, :, z]
//   coronal(y)  = ccw90(V[:, y, :])
//   sagittal(x) = ccw90(V[x, :, :]^T)
template <class Scalar>
Slice<Scalar> extract_slice(const VolumeGrid<Scalar>& grid, ViewId view, Index index);

template <class Scalar>
std::vector<Slice<Scalar>> extract_view(const VolumeGrid<Scalar>& grid, ViewId view);

std::vector<IntensitySlice> extract_view(const CtVolume& vol, ViewId view);
std::vector<LabelSlice> extract_view(const SegMap& seg, ViewId view);

// Aspect-preserving resize onto a centered target x target zero canvas.
// Intensity slices resample bilinearly, label slices nearest-neighbor.
IntensitySlice standardize(const IntensitySlice& slice, Index target = 256);
LabelSlice standardize(const LabelSlice& slice, Index target = 256);

// [S_{i-1}, S_i, S_{i+1}] for interior i; boundary slices replicate the center.
TriSlice make_triplet(const std::vector<IntensitySlice>& slices, Index i);

MultiViewTensor fuse_views(const TriSlice& axial, const TriSlice& coronal,
                           const TriSlice& sagittal);

struct AugmentConfig {
    double p_hflip = 0.0;
    double p_vflip = 0.0;
    double max_angle_deg = 0.0;
};

// One shared spatial transform across all nine channels, derived from the
// seed alone. Zero config is a bit-exact identity.
MultiViewTensor augment(const MultiViewTensor& tensor, std::uint64_t seed,
                        const AugmentConfig& config);

// 8-bit PGM, value = round(255 * clamp(v, 0, 1)).
void write_pgm(const Image& img, const std::string& path);

// Raw little-endian float32 dump plus a JSON sidecar describing the layout.
void dump_tensor(const MultiViewTensor& tensor, const std::string& bin_path,
                 const std::string& json_path);

}  // namespace mosaic
