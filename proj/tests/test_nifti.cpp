#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mosaic/nifti.hpp"
#include "mosaic/rng.hpp"

using namespace mosaic;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "mosaic_nifti_tests";
    fs::create_directories(dir);
    return dir;
}

// Header built from the NIfTI-1 standard's field offsets, independent of the
// library's writer.
std::vector<std::uint8_t> raw_header(std::int16_t dx, std::int16_t dy, std::int16_t dz,
                                     std::int16_t datatype, std::int16_t bitpix,
                                     float scl_slope = 0.0f, float scl_inter = 0.0f) {
    std::vector<std::uint8_t> hdr(352, 0);
    auto put = [&](int off, auto value) { std::memcpy(hdr.data() + off, &value, sizeof(value)); };
    put(0, std::int32_t{348});
    put(40, std::int16_t{3});
    put(42, dx);
    put(44, dy);
    put(46, dz);
    put(70, datatype);
    put(72, bitpix);
    put(80, 1.0f);  // pixdim[1..3]
    put(84, 1.0f);
    put(88, 1.0f);
    put(108, 352.0f);  // vox_offset
    put(112, scl_slope);
    put(116, scl_inter);
    std::memcpy(hdr.data() + 344, "n+1", 4);
    return hdr;
}

void write_file(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("ct volume round-trip is bit-identical") {
    CtVolume vol;
    vol.grid = GridD(4, 4, 4);
    std::mt19937_64 rng(7);
    for (double& v : vol.grid.raw()) v = det_uniform(rng, -100, 300);
    vol.spacing = {0.8, 0.8, 2.5};
    auto path = (temp_dir() / "roundtrip.nii").string();
    write_nifti(vol, path);

    CtVolume back = read_ct_volume(path);
    REQUIRE(back.height() == 4);
    REQUIRE(back.width() == 4);
    REQUIRE(back.depth() == 4);
    CHECK(std::memcmp(back.grid.raw().data(), vol.grid.raw().data(),
                      vol.grid.raw().size() * sizeof(double)) == 0);
    for (int i = 0; i < 3; ++i) CHECK(back.spacing[i] == doctest::Approx(vol.spacing[i]).epsilon(1e-6));
}

TEST_CASE("scl_slope rescaling follows slope * v + inter") {
    // raw int16 voxels 0..7, slope 2, inter 10
    auto hdr = raw_header(2, 2, 2, 4, 16, 2.0f, 10.0f);
    std::vector<std::uint8_t> bytes = hdr;
    for (std::int16_t v = 0; v < 8; ++v) {
        bytes.push_back(static_cast<std::uint8_t>(v & 0xff));
        bytes.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    auto path = temp_dir() / "scl.nii";
    write_file(path, bytes);

    CtVolume vol = read_ct_volume(path.string());
    CHECK(vol.grid(1, 0, 0) == 2.0 * 1 + 10.0);
    CHECK(vol.grid(1, 0, 1) == 2.0 * 5 + 10.0);  // raw voxel 5 -> 20
}

TEST_CASE("bad sizeof_hdr is a ParseError") {
    auto path = temp_dir() / "bad.nii";
    std::vector<std::uint8_t> junk(400, 0);
    junk[0] = 42;
    write_file(path, junk);
    CHECK_THROWS_AS(read_nifti_image(path.string()), ParseError);
}

TEST_CASE("bad magic is a ParseError") {
    auto hdr = raw_header(2, 2, 2, 4, 16);
    std::memcpy(hdr.data() + 344, "xxx", 4);
    hdr.resize(352 + 16, 0);
    auto path = temp_dir() / "magic.nii";
    write_file(path, hdr);
    CHECK_THROWS_AS(read_nifti_image(path.string()), ParseError);
}

TEST_CASE("rank other than 3 is UnsupportedRank") {
    auto hdr = raw_header(2, 2, 2, 4, 16);
    std::int16_t rank = 4;
    std::memcpy(hdr.data() + 40, &rank, 2);
    hdr.resize(352 + 16, 0);
    auto path = temp_dir() / "rank.nii";
    write_file(path, hdr);
    CHECK_THROWS_AS(read_nifti_image(path.string()), UnsupportedRank);
}

TEST_CASE("unknown datatype code is UnsupportedDatatype") {
    auto hdr = raw_header(2, 2, 2, 128, 24);  // RGB24, unsupported here
    hdr.resize(352 + 24, 0);
    auto path = temp_dir() / "dtype.nii";
    write_file(path, hdr);
    CHECK_THROWS_AS(read_nifti_image(path.string()), UnsupportedDatatype);
}

TEST_CASE("truncated payload is a ParseError") {
    auto hdr = raw_header(4, 4, 4, 16, 32);
    hdr.resize(352 + 10, 0);  // needs 256 payload bytes
    auto path = temp_dir() / "trunc.nii";
    write_file(path, hdr);
    CHECK_THROWS_AS(read_nifti_image(path.string()), ParseError);
}

TEST_CASE("segmap write layout: 352-byte preamble plus int16 payload") {
    SegMap seg;
    seg.labels = GridI(2, 2, 2, 0);
    seg.organ_table = btcv_organ_table();
    auto path = temp_dir() / "seg.nii";
    write_nifti(seg, path.string());
    CHECK(fs::file_size(path) == 352 + 2 * 2 * 2 * 2);
}

TEST_CASE("writing to a directory path is an IoError") {
    SegMap seg;
    seg.labels = GridI(2, 2, 2, 0);
    CHECK_THROWS_AS(write_nifti(seg, temp_dir().string()), IoError);
}

TEST_CASE("raw image round-trip is bit-exact for all datatypes, gz and plain") {
    std::mt19937_64 rng(99);
    for (auto dt : {NiftiDatatype::u8, NiftiDatatype::i16, NiftiDatatype::i32, NiftiDatatype::f32,
                    NiftiDatatype::f64}) {
        NiftiImage img;
        img.dims = {3, 5, 2};
        img.datatype = dt;
        img.spacing = {1.5, 0.7, 3.0};
        img.payload.resize(img.voxel_count() * nifti_bytes_per_voxel(dt));
        for (auto& b : img.payload) b = static_cast<std::uint8_t>(rng());

        for (const char* ext : {".nii", ".nii.gz"}) {
            auto path = (temp_dir() / ("rt_" + std::to_string(int(dt)) + ext)).string();
            write_nifti_image(img, path);
            NiftiImage back = read_nifti_image(path);
            REQUIRE(back.datatype == dt);
            REQUIRE(back.dims == img.dims);
            CHECK(back.payload == img.payload);
        }
    }
}

TEST_CASE("byte-swapped files read correctly") {
    // big-endian variant of the scl test file
    auto hdr = raw_header(2, 1, 1, 4, 16);
    auto swap = [&](int off, int width) {
        for (int i = 0, j = width - 1; i < j; ++i, --j) std::swap(hdr[off + i], hdr[off + j]);
    };
    swap(0, 4);
    for (int off : {40, 42, 44, 46, 70, 72}) swap(off, 2);
    for (int off : {80, 84, 88, 108, 112, 116}) swap(off, 4);
    hdr.push_back(0x01);  // voxel 0: 0x0102 big-endian = 258
    hdr.push_back(0x02);
    hdr.push_back(0x00);  // voxel 1: 3
    hdr.push_back(0x03);
    auto path = temp_dir() / "swapped.nii";
    write_file(path, hdr);

    CtVolume vol = read_ct_volume(path.string());
    CHECK(vol.grid(0, 0, 0) == 258.0);
    CHECK(vol.grid(1, 0, 0) == 3.0);
}

TEST_CASE("segmap loader rejects float volumes") {
    CtVolume vol;
    vol.grid = GridD(2, 2, 2, 1.0);
    auto path = (temp_dir() / "float_as_seg.nii").string();
    write_nifti(vol, path);
    CHECK_THROWS_AS(read_seg_map(path), UnsupportedDatatype);
}

TEST_CASE("two-file hdr/img pairs load through the ni1 branch") {
    auto hdr = raw_header(2, 2, 1, 4, 16);
    std::memcpy(hdr.data() + 344, "ni1", 4);
    float vox_offset = 0.0f;  // payload starts at 0 in the .img file
    std::memcpy(hdr.data() + 108, &vox_offset, 4);
    hdr.resize(348);
    write_file(temp_dir() / "pair.hdr", hdr);

    std::vector<std::uint8_t> img;
    for (std::int16_t v : {10, 20, 30, 40}) {
        img.push_back(static_cast<std::uint8_t>(v & 0xff));
        img.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    write_file(temp_dir() / "pair.img", img);

    CtVolume vol = read_ct_volume((temp_dir() / "pair.hdr").string());
    CHECK(vol.grid(0, 0, 0) == 10.0);
    CHECK(vol.grid(1, 1, 0) == 40.0);

    fs::remove(temp_dir() / "pair.img");
    CHECK_THROWS_AS(read_ct_volume((temp_dir() / "pair.hdr").string()), IoError);
}

TEST_CASE("orientation codes come from the affine's dominant directions") {
    CHECK(orientation_code(Affine4::Identity()) == "RAS");
    Affine4 flipped = Affine4::Identity();
    flipped(0, 0) = -1;
    flipped(1, 1) = -2;
    flipped(2, 2) = -0.5;
    CHECK(orientation_code(flipped) == "LPI");
}

TEST_CASE("corrupted headers throw instead of crashing") {
    // seed a valid file, then flip bytes all over the header
    auto hdr = raw_header(3, 3, 3, 4, 16);
    hdr.resize(352 + 3 * 3 * 3 * 2, 1);
    auto path = temp_dir() / "mutated.nii";

    std::mt19937_64 rng(0xf022);
    int parsed = 0, rejected = 0;
    for (int trial = 0; trial < 400; ++trial) {
        auto mutated = hdr;
        if (trial % 8 == 7) {
            // header claims a ~70 TB payload; the reader must fail cheaply
            for (int axis = 0; axis < 3; ++axis) {
                mutated[static_cast<std::size_t>(42 + 2 * axis)] = 0xff;
                mutated[static_cast<std::size_t>(43 + 2 * axis)] = 0x7f;
            }
        } else if (trial % 4 == 3) {
            // aim at the fields that size allocations: dim[1..3], vox_offset
            auto pos = static_cast<std::size_t>(42 + 2 * (trial % 3));
            mutated[pos] = 0xff;
            mutated[pos + 1] = 0x7f;
            mutated[108 + trial % 4] = static_cast<std::uint8_t>(rng());
        } else {
            int flips = 1 + static_cast<int>(det_uniform(rng) * 4);
            for (int f = 0; f < flips; ++f) {
                auto pos = static_cast<std::size_t>(det_uniform(rng) * 352);
                mutated[pos] = static_cast<std::uint8_t>(rng());
            }
        }
        write_file(path, mutated);
        try {
            NiftiImage img = read_nifti_image(path.string());
            CHECK(img.voxel_count() > 0);
            ++parsed;
        } catch (const Error&) {
            ++rejected;
        }
    }
    CHECK(parsed + rejected == 400);
    CHECK(rejected > 0);  // some mutations must hit the validated fields
}
