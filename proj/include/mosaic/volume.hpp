#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mosaic/errors.hpp"

namespace mosaic {

using Index = Eigen::Index;
using Affine4 = Eigen::Matrix4d;
using Spacing = Eigen::Vector3d;

// Dense 3D grid indexed (x, y, z) with x in [0, H), y in [0, W), z in [0, D).
// Storage is x-fastest (Fortran order), matching the NIfTI payload layout, so
// volumes map in and out of files without shuffling.
template <class Scalar>
class VolumeGrid {
public:
    VolumeGrid() = default;
    VolumeGrid(Index h, Index w, Index d, Scalar fill = Scalar{0})
        : h_(h), w_(w), d_(d), data_(static_cast<std::size_t>(h * w * d), fill) {
        if (h < 1 || w < 1 || d < 1) throw ShapeError("VolumeGrid: dims must be >= 1");
    }

    Index height() const { return h_; }
    Index width() const { return w_; }
    Index depth() const { return d_; }
    Index size() const { return h_ * w_ * d_; }

    Scalar& operator()(Index x, Index y, Index z) { return data_[offset(x, y, z)]; }
    const Scalar& operator()(Index x, Index y, Index z) const { return data_[offset(x, y, z)]; }

    std::vector<Scalar>& raw() { return data_; }
    const std::vector<Scalar>& raw() const { return data_; }

    bool same_dims(const VolumeGrid& o) const {
        return h_ == o.h_ && w_ == o.w_ && d_ == o.d_;
    }

private:
    std::size_t offset(Index x, Index y, Index z) const {
        return static_cast<std::size_t>(x + h_ * (y + w_ * z));
    }

    Index h_ = 0, w_ = 0, d_ = 0;
    std::vector<Scalar> data_;
};

using GridD = VolumeGrid<double>;
using GridI = VolumeGrid<std::int32_t>;

// Organ label vocabulary. 0 is always background.
using OrganTable = std::map<int, std::string>;

// The 13 BTCV abdominal organs in label order.
const OrganTable& btcv_organ_table();
const std::string& organ_name(const OrganTable& table, int id);

struct CtVolume {
    GridD grid;
    Spacing spacing = Spacing::Ones();
    Affine4 affine = Affine4::Identity();
    bool normalized = false;

    Index height() const { return grid.height(); }
    Index width() const { return grid.width(); }
    Index depth() const { return grid.depth(); }
};

struct SegMap {
    GridI labels;
    OrganTable organ_table;
    Spacing spacing = Spacing::Ones();
    Affine4 affine = Affine4::Identity();

    Index height() const { return labels.height(); }
    Index width() const { return labels.width(); }
    Index depth() const { return labels.depth(); }
};

// Human-readable anatomical orientation of the affine's axes (e.g. "RAS").
// Reported only; axes are never resampled.
std::string orientation_code(const Affine4& affine);

}  // namespace mosaic
