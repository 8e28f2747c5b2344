#include "mosaic/nifti.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <limits>

namespace mosaic {

namespace {

// NIfTI-1 field offsets within the 348-byte header.
constexpr int kHeaderSize = 348;
constexpr int kOffDim = 40;        // short dim[8]
constexpr int kOffDatatype = 70;   // short
constexpr int kOffBitpix = 72;     // short
constexpr int kOffPixdim = 76;     // float pixdim[8]
constexpr int kOffVoxOffset = 108; // float
constexpr int kOffSclSlope = 112;  // float
constexpr int kOffSclInter = 116;  // float
constexpr int kOffQformCode = 252; // short
constexpr int kOffSformCode = 254; // short
constexpr int kOffQuaternB = 256;  // float b, c, d then qoffset x, y, z
constexpr int kOffSrowX = 280;     // float srow_x[4], srow_y[4], srow_z[4]
constexpr int kOffMagic = 344;     // char[4]

void swap_bytes(void* p, int width) {
    auto* b = static_cast<std::uint8_t*>(p);
    for (int i = 0, j = width - 1; i < j; ++i, --j) std::swap(b[i], b[j]);
}

template <class T>
T read_field(const std::uint8_t* hdr, int offset, bool swapped) {
    T v;
    std::memcpy(&v, hdr + offset, sizeof(T));
    if (swapped) swap_bytes(&v, sizeof(T));
    return v;
}

template <class T>
void write_field(std::uint8_t* hdr, int offset, T v) {
    std::memcpy(hdr + offset, &v, sizeof(T));
}

Affine4 affine_from_quaternion(float b, float c, float d, float ox, float oy, float oz,
                               const Spacing& spacing, float qfac) {
    double a2 = 1.0 - (double(b) * b + double(c) * c + double(d) * d);
    double a = a2 > 0 ? std::sqrt(a2) : 0.0;
    Affine4 m = Affine4::Identity();
    m(0, 0) = a * a + b * b - c * c - d * d;
    m(0, 1) = 2 * (double(b) * c - a * d);
    m(0, 2) = 2 * (double(b) * d + a * c);
    m(1, 0) = 2 * (double(b) * c + a * d);
    m(1, 1) = a * a + c * c - b * b - d * d;
    m(1, 2) = 2 * (double(c) * d - a * b);
    m(2, 0) = 2 * (double(b) * d - a * c);
    m(2, 1) = 2 * (double(c) * d + a * b);
    m(2, 2) = a * a + d * d - b * b - c * c;
    double zsign = qfac < 0 ? -1.0 : 1.0;
    for (int r = 0; r < 3; ++r) {
        m(r, 0) *= spacing[0];
        m(r, 1) *= spacing[1];
        m(r, 2) *= spacing[2] * zsign;
    }
    m(0, 3) = ox;
    m(1, 3) = oy;
    m(2, 3) = oz;
    return m;
}

struct GzFile {
    gzFile f = nullptr;
    explicit GzFile(const std::string& path, const char* mode) { f = gzopen(path.c_str(), mode); }
    ~GzFile() {
        if (f) gzclose(f);
    }
    GzFile(const GzFile&) = delete;
    GzFile& operator=(const GzFile&) = delete;
};

bool read_exact(gzFile f, void* dst, std::size_t n) {
    std::size_t got = 0;
    auto* p = static_cast<std::uint8_t*>(dst);
    while (got < n) {
        unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n - got, 1u << 28));
        int r = gzread(f, p + got, chunk);
        if (r <= 0) return false;
        got += static_cast<std::size_t>(r);
    }
    return true;
}

// Grows the buffer as data actually arrives, so a corrupt header claiming
// absurd dims fails on the short read instead of a giant allocation.
bool read_payload(gzFile f, std::vector<std::uint8_t>& payload, std::size_t n) {
    constexpr std::size_t kChunk = std::size_t{16} << 20;
    payload.clear();
    while (payload.size() < n) {
        std::size_t want = std::min(n - payload.size(), kChunk);
        std::size_t old = payload.size();
        payload.resize(old + want);
        if (!read_exact(f, payload.data() + old, want)) return false;
    }
    return true;
}

std::string sibling_img_path(const std::string& hdr_path) {
    std::string p = hdr_path;
    auto strip = [&](const char* suf) {
        std::size_t n = std::strlen(suf);
        if (p.size() >= n && p.compare(p.size() - n, n, suf) == 0) {
            p.resize(p.size() - n);
            return true;
        }
        return false;
    };
    strip(".gz");
    if (!strip(".hdr")) strip(".nii");
    if (std::filesystem::exists(p + ".img")) return p + ".img";
    return p + ".img.gz";
}

}  // namespace

int nifti_bytes_per_voxel(NiftiDatatype dt) {
    switch (dt) {
        case NiftiDatatype::u8: return 1;
        case NiftiDatatype::i16: return 2;
        case NiftiDatatype::i32: return 4;
        case NiftiDatatype::f32: return 4;
        case NiftiDatatype::f64: return 8;
    }
    throw UnsupportedDatatype("unknown datatype code");
}

bool nifti_is_integer(NiftiDatatype dt) {
    return dt == NiftiDatatype::u8 || dt == NiftiDatatype::i16 || dt == NiftiDatatype::i32;
}

NiftiImage read_nifti_image(const std::string& path) {
    GzFile in(path, "rb");
    if (!in.f) throw IoError("cannot open " + path);

    std::uint8_t hdr[kHeaderSize];
    if (!read_exact(in.f, hdr, kHeaderSize)) throw ParseError(path + ": truncated header");

    bool swapped = false;
    std::int32_t sizeof_hdr = read_field<std::int32_t>(hdr, 0, false);
    if (sizeof_hdr != kHeaderSize) {
        sizeof_hdr = read_field<std::int32_t>(hdr, 0, true);
        if (sizeof_hdr != kHeaderSize) throw ParseError(path + ": sizeof_hdr is not 348");
        swapped = true;
    }

    char magic[4];
    std::memcpy(magic, hdr + kOffMagic, 4);
    bool single_file;
    if (std::memcmp(magic, "n+1", 4) == 0) {
        single_file = true;
    } else if (std::memcmp(magic, "ni1", 4) == 0) {
        single_file = false;
    } else {
        throw ParseError(path + ": bad NIfTI magic");
    }

    std::int16_t rank = read_field<std::int16_t>(hdr, kOffDim, swapped);
    if (rank != 3) throw UnsupportedRank(path + ": dim[0] = " + std::to_string(rank) + ", want 3");

    NiftiImage img;
    for (int i = 0; i < 3; ++i) {
        std::int16_t d = read_field<std::int16_t>(hdr, kOffDim + 2 * (i + 1), swapped);
        if (d < 1) throw ParseError(path + ": nonpositive dim");
        img.dims[i] = d;
    }

    std::int16_t dt = read_field<std::int16_t>(hdr, kOffDatatype, swapped);
    switch (dt) {
        case 2: case 4: case 8: case 16: case 64: break;
        default:
            throw UnsupportedDatatype(path + ": datatype code " + std::to_string(dt));
    }
    img.datatype = static_cast<NiftiDatatype>(dt);
    int bpv = nifti_bytes_per_voxel(img.datatype);

    float qfac = read_field<float>(hdr, kOffPixdim, swapped);
    for (int i = 0; i < 3; ++i) {
        float s = read_field<float>(hdr, kOffPixdim + 4 * (i + 1), swapped);
        img.spacing[i] = s > 0 ? s : 1.0;
    }

    img.scl_slope = read_field<float>(hdr, kOffSclSlope, swapped);
    img.scl_inter = read_field<float>(hdr, kOffSclInter, swapped);

    std::int16_t sform = read_field<std::int16_t>(hdr, kOffSformCode, swapped);
    std::int16_t qform = read_field<std::int16_t>(hdr, kOffQformCode, swapped);
    if (sform > 0) {
        img.affine = Affine4::Identity();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 4; ++c)
                img.affine(r, c) = read_field<float>(hdr, kOffSrowX + 16 * r + 4 * c, swapped);
    } else if (qform > 0) {
        float q[6];
        for (int i = 0; i < 6; ++i) q[i] = read_field<float>(hdr, kOffQuaternB + 4 * i, swapped);
        img.affine = affine_from_quaternion(q[0], q[1], q[2], q[3], q[4], q[5], img.spacing, qfac);
    } else {
        img.affine = Affine4::Identity();
        for (int i = 0; i < 3; ++i) img.affine(i, i) = img.spacing[i];
    }

    std::size_t nbytes = img.voxel_count() * static_cast<std::size_t>(bpv);

    float vox_offset = read_field<float>(hdr, kOffVoxOffset, swapped);
    if (!std::isfinite(vox_offset) || vox_offset < 0 || vox_offset > 1e12f)
        throw ParseError(path + ": implausible vox_offset");
    if (single_file) {
        auto off = static_cast<long>(vox_offset);
        if (off < kHeaderSize) throw ParseError(path + ": vox_offset below header size");
        // already consumed 348 bytes; skip the gap (extension area)
        for (long skip = off - kHeaderSize; skip > 0;) {
            std::uint8_t sink[4096];
            unsigned chunk = static_cast<unsigned>(std::min<long>(skip, sizeof(sink)));
            if (!read_exact(in.f, sink, chunk)) throw ParseError(path + ": truncated extensions");
            skip -= chunk;
        }
        if (!read_payload(in.f, img.payload, nbytes))
            throw ParseError(path + ": truncated payload");
    } else {
        GzFile data(sibling_img_path(path), "rb");
        if (!data.f) throw IoError(path + ": missing .img companion");
        for (long skip = static_cast<long>(vox_offset); skip > 0;) {
            std::uint8_t sink[4096];
            unsigned chunk = static_cast<unsigned>(std::min<long>(skip, sizeof(sink)));
            if (!read_exact(data.f, sink, chunk)) throw ParseError(path + ": truncated payload");
            skip -= chunk;
        }
        if (!read_payload(data.f, img.payload, nbytes))
            throw ParseError(path + ": truncated payload");
    }

    if (swapped && bpv > 1) {
        for (std::size_t i = 0; i < nbytes; i += bpv) swap_bytes(img.payload.data() + i, bpv);
    }
    return img;
}

void write_nifti_image(const NiftiImage& img, const std::string& path) {
    if (img.dims[0] < 1 || img.dims[1] < 1 || img.dims[2] < 1)
        throw ShapeError("write_nifti_image: dims must be >= 1");
    int bpv = nifti_bytes_per_voxel(img.datatype);
    std::size_t nbytes = img.voxel_count() * static_cast<std::size_t>(bpv);
    if (img.payload.size() != nbytes)
        throw ShapeError("write_nifti_image: payload size does not match dims");

    std::uint8_t hdr[kHeaderSize];
    std::memset(hdr, 0, sizeof(hdr));
    write_field<std::int32_t>(hdr, 0, kHeaderSize);
    write_field<std::int16_t>(hdr, kOffDim, 3);
    for (int i = 0; i < 3; ++i)
        write_field<std::int16_t>(hdr, kOffDim + 2 * (i + 1), static_cast<std::int16_t>(img.dims[i]));
    for (int i = 4; i <= 7; ++i) write_field<std::int16_t>(hdr, kOffDim + 2 * i, 1);
    write_field<std::int16_t>(hdr, kOffDatatype, static_cast<std::int16_t>(img.datatype));
    write_field<std::int16_t>(hdr, kOffBitpix, static_cast<std::int16_t>(8 * bpv));
    write_field<float>(hdr, kOffPixdim, 1.0f);  // qfac
    for (int i = 0; i < 3; ++i)
        write_field<float>(hdr, kOffPixdim + 4 * (i + 1), static_cast<float>(img.spacing[i]));
    write_field<float>(hdr, kOffVoxOffset, 352.0f);
    write_field<float>(hdr, kOffSclSlope, img.scl_slope);
    write_field<float>(hdr, kOffSclInter, img.scl_inter);
    write_field<std::int16_t>(hdr, kOffSformCode, 1);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c)
            write_field<float>(hdr, kOffSrowX + 16 * r + 4 * c, static_cast<float>(img.affine(r, c)));
    std::memcpy(hdr + kOffMagic, "n+1", 4);

    const std::uint8_t ext[4] = {0, 0, 0, 0};  // no extensions

    bool gzip = path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
    if (gzip) {
        GzFile out(path, "wb");
        if (!out.f) throw IoError("cannot open " + path + " for writing");
        if (gzwrite(out.f, hdr, kHeaderSize) != kHeaderSize || gzwrite(out.f, ext, 4) != 4)
            throw IoError("short write to " + path);
        std::size_t done = 0;
        while (done < nbytes) {
            unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(nbytes - done, 1u << 28));
            if (gzwrite(out.f, img.payload.data() + done, chunk) != static_cast<int>(chunk))
                throw IoError("short write to " + path);
            done += chunk;
        }
    } else {
        std::FILE* f = std::fopen(path.c_str(), "wb");
        if (!f) throw IoError("cannot open " + path + " for writing");
        bool ok = std::fwrite(hdr, 1, kHeaderSize, f) == kHeaderSize &&
                  std::fwrite(ext, 1, 4, f) == 4 &&
                  std::fwrite(img.payload.data(), 1, nbytes, f) == nbytes;
        if (std::fclose(f) != 0) ok = false;
        if (!ok) throw IoError("short write to " + path);
    }
}

namespace {

template <class T>
void copy_to_double(const std::vector<std::uint8_t>& payload, double slope, double inter,
                    std::vector<double>& out) {
    std::size_t n = payload.size() / sizeof(T);
    out.resize(n);
    const T* src = reinterpret_cast<const T*>(payload.data());
    for (std::size_t i = 0; i < n; ++i) out[i] = slope * static_cast<double>(src[i]) + inter;
}

template <class T>
void copy_to_int(const std::vector<std::uint8_t>& payload, std::vector<std::int32_t>& out) {
    std::size_t n = payload.size() / sizeof(T);
    out.resize(n);
    const T* src = reinterpret_cast<const T*>(payload.data());
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::int32_t>(src[i]);
}

}  // namespace

CtVolume read_ct_volume(const std::string& path) {
    NiftiImage img = read_nifti_image(path);
    CtVolume vol;
    vol.grid = GridD(img.dims[0], img.dims[1], img.dims[2]);
    vol.spacing = img.spacing;
    vol.affine = img.affine;
    double slope = img.scl_slope != 0.0f ? img.scl_slope : 1.0;
    double inter = img.scl_slope != 0.0f ? img.scl_inter : 0.0;
    switch (img.datatype) {
        case NiftiDatatype::u8: copy_to_double<std::uint8_t>(img.payload, slope, inter, vol.grid.raw()); break;
        case NiftiDatatype::i16: copy_to_double<std::int16_t>(img.payload, slope, inter, vol.grid.raw()); break;
        case NiftiDatatype::i32: copy_to_double<std::int32_t>(img.payload, slope, inter, vol.grid.raw()); break;
        case NiftiDatatype::f32: copy_to_double<float>(img.payload, slope, inter, vol.grid.raw()); break;
        case NiftiDatatype::f64: copy_to_double<double>(img.payload, slope, inter, vol.grid.raw()); break;
    }
    return vol;
}

SegMap read_seg_map(const std::string& path) {
    NiftiImage img = read_nifti_image(path);
    if (!nifti_is_integer(img.datatype))
        throw UnsupportedDatatype(path + ": segmentation maps need an integer datatype");
    SegMap seg;
    seg.labels = GridI(img.dims[0], img.dims[1], img.dims[2]);
    seg.spacing = img.spacing;
    seg.affine = img.affine;
    switch (img.datatype) {
        case NiftiDatatype::u8: copy_to_int<std::uint8_t>(img.payload, seg.labels.raw()); break;
        case NiftiDatatype::i16: copy_to_int<std::int16_t>(img.payload, seg.labels.raw()); break;
        case NiftiDatatype::i32: copy_to_int<std::int32_t>(img.payload, seg.labels.raw()); break;
        default: break;
    }
    seg.organ_table = btcv_organ_table();
    for (std::int32_t v : seg.labels.raw()) {
        if (v < 0) throw ParseError(path + ": negative label value");
        if (!seg.organ_table.count(v)) seg.organ_table[v] = "organ_" + std::to_string(v);
    }
    return seg;
}

void write_nifti(const CtVolume& vol, const std::string& path) {
    NiftiImage img;
    img.dims = {vol.height(), vol.width(), vol.depth()};
    img.datatype = NiftiDatatype::f64;
    img.spacing = vol.spacing;
    img.affine = vol.affine;
    img.payload.resize(vol.grid.raw().size() * sizeof(double));
    std::memcpy(img.payload.data(), vol.grid.raw().data(), img.payload.size());
    write_nifti_image(img, path);
}

void write_nifti(const SegMap& seg, const std::string& path) {
    NiftiImage img;
    img.dims = {seg.height(), seg.width(), seg.depth()};
    img.datatype = NiftiDatatype::i16;
    img.spacing = seg.spacing;
    img.affine = seg.affine;
    img.payload.resize(seg.labels.raw().size() * sizeof(std::int16_t));
    auto* dst = reinterpret_cast<std::int16_t*>(img.payload.data());
    const auto& src = seg.labels.raw();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<std::int16_t>(src[i]);
    write_nifti_image(img, path);
}

}  // namespace mosaic
