#include "mosaic/slicer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "mosaic/rng.hpp"

namespace mosaic {

const char* view_name(ViewId v) {
    switch (v) {
        case ViewId::axial: return "axial";
        case ViewId::coronal: return "coronal";
        case ViewId::sagittal: return "sagittal";
    }
    return "?";
}

ViewId view_from_name(const std::string& name) {
    if (name == "axial") return ViewId::axial;
    if (name == "coronal") return ViewId::coronal;
    if (name == "sagittal") return ViewId::sagittal;
    throw ConfigError("unknown view '" + name + "'");
}

template <class Scalar>
Index view_slice_count(const VolumeGrid<Scalar>& grid, ViewId view) {
    switch (view) {
        case ViewId::axial: return grid.depth();
        case ViewId::coronal: return grid.width();
        case ViewId::sagittal: return grid.height();
    }
    return 0;
}

template <class Scalar>
Slice<Scalar> extract_slice(const VolumeGrid<Scalar>& grid, ViewId view, Index index) {
    if (index < 0 || index >= view_slice_count(grid, view))
        throw IndexError("extract_slice: index out of range");
    const Index h = grid.height(), w = grid.width(), d = grid.depth();
    Slice<Scalar> out;
    out.view = view;
    out.index = index;
    switch (view) {
        case ViewId::axial: {
            Plane<Scalar> p(h, w);
            for (Index x = 0; x < h; ++x)
                for (Index y = 0; y < w; ++y) p(x, y) = grid(x, y, index);
            out.data = std::move(p);
            break;
        }
        case ViewId::coronal: {
            Plane<Scalar> p(h, d);
            for (Index x = 0; x < h; ++x)
                for (Index z = 0; z < d; ++z) p(x, z) = grid(x, index, z);
            out.data = rotate90_ccw(p);
            break;
        }
        case ViewId::sagittal: {
            Plane<Scalar> p(w, d);
            for (Index y = 0; y < w; ++y)
                for (Index z = 0; z < d; ++z) p(y, z) = grid(index, y, z);
            Plane<Scalar> pt = p.transpose();
            out.data = rotate90_ccw(pt);
            break;
        }
    }
    return out;
}

template <class Scalar>
std::vector<Slice<Scalar>> extract_view(const VolumeGrid<Scalar>& grid, ViewId view) {
    std::vector<Slice<Scalar>> slices;
    const Index n = view_slice_count(grid, view);
    slices.reserve(n);
    for (Index i = 0; i < n; ++i) slices.push_back(extract_slice(grid, view, i));
    return slices;
}

template Index view_slice_count<double>(const VolumeGrid<double>&, ViewId);
template Index view_slice_count<std::int32_t>(const VolumeGrid<std::int32_t>&, ViewId);
template Slice<double> extract_slice<double>(const VolumeGrid<double>&, ViewId, Index);
template Slice<std::int32_t> extract_slice<std::int32_t>(const VolumeGrid<std::int32_t>&, ViewId,
                                                         Index);
template std::vector<Slice<double>> extract_view<double>(const VolumeGrid<double>&, ViewId);
template std::vector<Slice<std::int32_t>> extract_view<std::int32_t>(
    const VolumeGrid<std::int32_t>&, ViewId);

std::vector<IntensitySlice> extract_view(const CtVolume& vol, ViewId view) {
    return extract_view(vol.grid, view);
}

std::vector<LabelSlice> extract_view(const SegMap& seg, ViewId view) {
    return extract_view(seg.labels, view);
}

namespace {

struct CanvasPlan {
    Index scaled_rows, scaled_cols;
    Index row_off, col_off;
};

CanvasPlan plan_canvas(Index rows, Index cols, Index target) {
    double scale = static_cast<double>(target) / static_cast<double>(std::max(rows, cols));
    CanvasPlan p;
    p.scaled_rows = std::max<Index>(1, static_cast<Index>(std::lround(rows * scale)));
    p.scaled_cols = std::max<Index>(1, static_cast<Index>(std::lround(cols * scale)));
    p.row_off = (target - p.scaled_rows) / 2;
    p.col_off = (target - p.scaled_cols) / 2;
    return p;
}

// Pixel-center mapping; an unchanged axis maps index -> index exactly.
inline double src_coord(Index out, Index out_n, Index in_n) {
    return (static_cast<double>(out) + 0.5) * static_cast<double>(in_n) /
               static_cast<double>(out_n) -
           0.5;
}

double sample_bilinear(const Image& g, double ri, double ci) {
    ri = std::clamp(ri, 0.0, static_cast<double>(g.rows() - 1));
    ci = std::clamp(ci, 0.0, static_cast<double>(g.cols() - 1));
    Index r0 = static_cast<Index>(std::floor(ri));
    Index c0 = static_cast<Index>(std::floor(ci));
    Index r1 = std::min<Index>(r0 + 1, g.rows() - 1);
    Index c1 = std::min<Index>(c0 + 1, g.cols() - 1);
    double fr = ri - static_cast<double>(r0);
    double fc = ci - static_cast<double>(c0);
    return (1 - fr) * ((1 - fc) * g(r0, c0) + fc * g(r0, c1)) +
           fr * ((1 - fc) * g(r1, c0) + fc * g(r1, c1));
}

}  // namespace

IntensitySlice standardize(const IntensitySlice& slice, Index target) {
    const Image& g = slice.data;
    if (g.rows() < 1 || g.cols() < 1) throw InvalidSlice("standardize: empty slice");
    CanvasPlan p = plan_canvas(g.rows(), g.cols(), target);
    Image canvas = Image::Zero(target, target);
    for (Index r = 0; r < p.scaled_rows; ++r) {
        double ri = src_coord(r, p.scaled_rows, g.rows());
        for (Index c = 0; c < p.scaled_cols; ++c) {
            double ci = src_coord(c, p.scaled_cols, g.cols());
            canvas(p.row_off + r, p.col_off + c) = sample_bilinear(g, ri, ci);
        }
    }
    return {std::move(canvas), slice.view, slice.index};
}

LabelSlice standardize(const LabelSlice& slice, Index target) {
    const LabelImage& g = slice.data;
    if (g.rows() < 1 || g.cols() < 1) throw InvalidSlice("standardize: empty slice");
    CanvasPlan p = plan_canvas(g.rows(), g.cols(), target);
    LabelImage canvas = LabelImage::Zero(target, target);
    for (Index r = 0; r < p.scaled_rows; ++r) {
        Index ri = static_cast<Index>(
            std::clamp(std::lround(src_coord(r, p.scaled_rows, g.rows())), 0l,
                       static_cast<long>(g.rows() - 1)));
        for (Index c = 0; c < p.scaled_cols; ++c) {
            Index ci = static_cast<Index>(
                std::clamp(std::lround(src_coord(c, p.scaled_cols, g.cols())), 0l,
                           static_cast<long>(g.cols() - 1)));
            canvas(p.row_off + r, p.col_off + c) = g(ri, ci);
        }
    }
    return {std::move(canvas), slice.view, slice.index};
}

TriSlice make_triplet(const std::vector<IntensitySlice>& slices, Index i) {
    const auto n = static_cast<Index>(slices.size());
    if (n < 1) throw IndexError("make_triplet: empty slice sequence");
    if (i < 0 || i >= n) throw IndexError("make_triplet: index out of range");
    TriSlice t;
    t.center_index = i;
    if (i >= 1 && i <= n - 2) {
        t.channels = {slices[i - 1].data, slices[i].data, slices[i + 1].data};
    } else {
        t.channels = {slices[i].data, slices[i].data, slices[i].data};
    }
    return t;
}

MultiViewTensor fuse_views(const TriSlice& axial, const TriSlice& coronal,
                           const TriSlice& sagittal) {
    MultiViewTensor out;
    int k = 0;
    for (const TriSlice* t : {&axial, &coronal, &sagittal})
        for (const Image& ch : t->channels) out.channels[k++] = ch;
    for (int i = 1; i < 9; ++i) {
        if (out.channels[i].rows() != out.channels[0].rows() ||
            out.channels[i].cols() != out.channels[0].cols())
            throw ShapeError("fuse_views: channel shapes differ");
    }
    return out;
}

namespace {

Image rotate_bilinear(const Image& g, double angle_deg) {
    double th = angle_deg * M_PI / 180.0;
    double ct = std::cos(th), st = std::sin(th);
    double cr = static_cast<double>(g.rows() - 1) / 2.0;
    double cc = static_cast<double>(g.cols() - 1) / 2.0;
    Image out = Image::Zero(g.rows(), g.cols());
    for (Index r = 0; r < g.rows(); ++r) {
        for (Index c = 0; c < g.cols(); ++c) {
            // inverse rotation of the output coordinate
            double dr = static_cast<double>(r) - cr;
            double dc = static_cast<double>(c) - cc;
            double sr = ct * dr + st * dc + cr;
            double sc = -st * dr + ct * dc + cc;
            if (sr < -0.5 || sr > g.rows() - 0.5 || sc < -0.5 || sc > g.cols() - 0.5)
                continue;  // zero fill
            out(r, c) = sample_bilinear(g, sr, sc);
        }
    }
    return out;
}

}  // namespace

MultiViewTensor augment(const MultiViewTensor& tensor, std::uint64_t seed,
                        const AugmentConfig& config) {
    if (config.p_hflip < 0 || config.p_hflip > 1 || config.p_vflip < 0 || config.p_vflip > 1)
        throw ConfigError("augment: flip probabilities must lie in [0,1]");
    if (config.max_angle_deg < 0) throw ConfigError("augment: max_angle_deg must be >= 0");

    std::mt19937_64 rng(seed);
    // fixed draw order keeps the seed path independent of the config
    double uh = det_uniform(rng);
    double uv = det_uniform(rng);
    double ua = det_uniform(rng);
    bool hflip = uh < config.p_hflip;
    bool vflip = uv < config.p_vflip;
    double angle = (2.0 * ua - 1.0) * config.max_angle_deg;

    MultiViewTensor out = tensor;
    for (Image& ch : out.channels) {
        if (hflip) ch = ch.rowwise().reverse().eval();
        if (vflip) ch = ch.colwise().reverse().eval();
        if (config.max_angle_deg > 0 && angle != 0.0) ch = rotate_bilinear(ch, angle);
    }
    return out;
}

void write_pgm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
    for (Index r = 0; r < img.rows(); ++r) {
        for (Index c = 0; c < img.cols(); ++c) {
            double v = std::clamp(img(r, c), 0.0, 1.0);
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
        }
    }
    if (!out) throw IoError("short write to " + path);
}

void dump_tensor(const MultiViewTensor& tensor, const std::string& bin_path,
                 const std::string& json_path) {
    static const char* kChannelNames[9] = {"axial_prev",    "axial_center",    "axial_next",
                                           "coronal_prev",  "coronal_center",  "coronal_next",
                                           "sagittal_prev", "sagittal_center", "sagittal_next"};
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw IoError("cannot open " + bin_path + " for writing");
    for (const Image& ch : tensor.channels) {
        for (Index r = 0; r < ch.rows(); ++r) {
            for (Index c = 0; c < ch.cols(); ++c) {
                float v = static_cast<float>(ch(r, c));
                bin.write(reinterpret_cast<const char*>(&v), sizeof(float));
            }
        }
    }
    if (!bin) throw IoError("short write to " + bin_path);

    nlohmann::json meta;
    meta["dims"] = {9, tensor.channels[0].rows(), tensor.channels[0].cols()};
    meta["dtype"] = "float32";
    meta["byte_order"] = "little";
    meta["layout"] = "channel, row, column";
    meta["channel_order"] = kChannelNames;
    std::ofstream js(json_path);
    if (!js) throw IoError("cannot open " + json_path + " for writing");
    js << meta.dump(2) << "\n";
}

}  // namespace mosaic
