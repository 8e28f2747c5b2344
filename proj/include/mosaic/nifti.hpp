#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mosaic/volume.hpp"

namespace mosaic {

// The NIfTI-1 datatype codes this toolkit supports.
enum class NiftiDatatype : std::int16_t {
    u8 = 2,
    i16 = 4,
    i32 = 8,
    f32 = 16,
    f64 = 64,
};

int nifti_bytes_per_voxel(NiftiDatatype dt);
bool nifti_is_integer(NiftiDatatype dt);

// A decoded single-frame NIfTI-1 image: header essentials plus the raw
// payload in native byte order, x-fastest. scl_slope/scl_inter are carried
// verbatim; applying them is the caller's business (read_ct_volume does).
struct NiftiImage {
    std::array<Index, 3> dims{0, 0, 0};
    NiftiDatatype datatype = NiftiDatatype::f64;
    Spacing spacing = Spacing::Ones();
    Affine4 affine = Affine4::Identity();
    float scl_slope = 0.0f;
    float scl_inter = 0.0f;
    std::vector<std::uint8_t> payload;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
};

// Reads .nii / .hdr+.img, gzip-compressed or not (detected by content, not
// extension). Throws ParseError / UnsupportedDatatype / UnsupportedRank.
NiftiImage read_nifti_image(const std::string& path);

// Writes a single-file .nii; gzip-compresses iff the path ends in ".gz".
// Layout: 348-byte header, 4 zero extension bytes, payload at offset 352.
void write_nifti_image(const NiftiImage& img, const std::string& path);

// Typed loaders. read_seg_map is the "caller hint" that the file holds
// labels; it insists on an integer datatype.
CtVolume read_ct_volume(const std::string& path);
SegMap read_seg_map(const std::string& path);

void write_nifti(const CtVolume& vol, const std::string& path);  // float64
void write_nifti(const SegMap& seg, const std::string& path);    // int16

}  // namespace mosaic
