#include <algorithm>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "mosaic/filtering.hpp"

using namespace mosaic;

namespace {

LabelSlice slice_with_foreground(Index rows, Index cols, int pixels, int label = 1) {
    LabelSlice s;
    s.data = LabelImage::Zero(rows, cols);
    for (int i = 0; i < pixels; ++i) s.data(i / cols, i % cols) = label;
    return s;
}

SegMap seg_with_axial_band(Index h, Index w, Index d, Index z0, Index z1) {
    SegMap seg;
    seg.labels = GridI(h, w, d, 0);
    seg.organ_table = btcv_organ_table();
    for (Index z = z0; z <= z1; ++z) seg.labels(h / 2, w / 2, z) = 1;
    return seg;
}

}  // namespace

TEST_CASE("the informativeness threshold is inclusive") {
    // 10x10 slice, tau = 0.05: 5 pixels is exactly on the boundary
    CHECK(label_informative(slice_with_foreground(10, 10, 5), 0.05).label == 1);
    CHECK(label_informative(slice_with_foreground(10, 10, 4), 0.05).label == 0);
    CHECK(label_informative(slice_with_foreground(10, 10, 5), 0.05).foreground_ratio == 0.05);
}

TEST_CASE("all-zero slices are never informative for positive tau") {
    CHECK(label_informative(slice_with_foreground(8, 8, 0), 1e-9).label == 0);
    CHECK(label_informative(slice_with_foreground(8, 8, 0), 0.5).label == 0);
}

TEST_CASE("any positive label counts as foreground") {
    for (int organ : {1, 5, 13}) {
        auto l = label_informative(slice_with_foreground(10, 10, 7, organ), 0.05);
        CHECK(l.label == 1);
        CHECK(l.foreground_ratio == 0.07);
    }
}

TEST_CASE("tau outside [0,1] is a ConfigError") {
    auto s = slice_with_foreground(4, 4, 2);
    CHECK_THROWS_AS(label_informative(s, -0.1), ConfigError);
    CHECK_THROWS_AS(label_informative(s, 1.1), ConfigError);
}

TEST_CASE("filter_volume marks exactly the band carrying the organ") {
    SegMap seg = seg_with_axial_band(12, 12, 30, 10, 20);
    auto labels = filter_volume(seg, ViewId::axial, 1e-4);
    REQUIRE(labels.size() == 30);
    for (Index z = 0; z < 30; ++z) {
        CHECK(labels[static_cast<std::size_t>(z)].label == (z >= 10 && z <= 20 ? 1 : 0));
        // oracle: one labeled voxel per band slice out of 12 * 12 pixels
        double expected = (z >= 10 && z <= 20) ? 1.0 / 144.0 : 0.0;
        CHECK(labels[static_cast<std::size_t>(z)].foreground_ratio == expected);
    }
}

TEST_CASE("tau = 0 retains everything") {
    SegMap seg = seg_with_axial_band(6, 6, 8, 2, 3);
    for (const auto& l : filter_volume(seg, ViewId::axial, 0.0)) CHECK(l.label == 1);
}

TEST_CASE("an empty segmentation retains nothing at positive tau") {
    SegMap seg;
    seg.labels = GridI(6, 6, 6, 0);
    seg.organ_table = btcv_organ_table();
    for (ViewId view : kAllViews)
        for (const auto& l : filter_volume(seg, view, 0.001)) CHECK(l.label == 0);
}

TEST_CASE("retention is monotone in tau") {
    SegMap seg = seg_with_axial_band(10, 10, 40, 5, 25);
    // widen the band so ratios vary by slice
    for (Index z = 10; z <= 18; ++z)
        for (Index x = 0; x < 5; ++x)
            for (Index y = 0; y < 5; ++y) seg.labels(x, y, z) = 2;

    auto retained_at = [&](double tau) {
        std::vector<Index> kept;
        for (const auto& l : filter_volume(seg, ViewId::axial, tau))
            if (l.label) kept.push_back(l.slice_index);
        return kept;
    };
    auto loose = retained_at(0.001);
    auto strict = retained_at(0.1);
    for (Index idx : strict)
        CHECK(std::find(loose.begin(), loose.end(), idx) != loose.end());
    CHECK(strict.size() <= loose.size());
}

TEST_CASE("retention report reproduces the 143/83 axial row") {
    RetentionInput counts;
    counts[ViewId::axial] = {{143, 83}};
    RetentionReport report = retention_report(counts);
    REQUIRE(report.rows.size() == 1);
    CHECK(std::round(report.rows[0].retention_rate * 100) / 100 == 0.58);
    CHECK(std::round(report.rows[0].reduction_pct * 100) / 100 == 41.96);
}

TEST_CASE("full retention means zero reduction") {
    RetentionInput counts;
    counts[ViewId::coronal] = {{100, 100}};
    RetentionReport report = retention_report(counts);
    CHECK(report.rows[0].retention_rate == 1.0);
    CHECK(report.rows[0].reduction_pct == 0.0);
}

TEST_CASE("aggregation means totals and retained counts across volumes") {
    RetentionInput counts;
    counts[ViewId::axial] = {{100, 50}, {200, 100}};
    RetentionReport report = retention_report(counts);
    CHECK(report.rows[0].total_slices == 150.0);
    CHECK(report.rows[0].retained_slices == 75.0);
    CHECK(report.rows[0].retention_rate == 0.5);
}

TEST_CASE("empty retention input is an error") {
    CHECK_THROWS_AS(retention_report(RetentionInput{}), EmptyDataset);
}

TEST_CASE("weighted_bce hand values") {
    std::vector<double> half = {0.5};
    std::vector<int> one = {1};
    CHECK(weighted_bce(half, one, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    std::vector<double> perfect = {1.0};
    CHECK(weighted_bce(perfect, one, 1.0) == doctest::Approx(1e-7).epsilon(1e-3));

    std::vector<double> scores = {0.9, 0.1};
    std::vector<int> labels = {1, 0};
    double expected = (2.0 * -std::log(0.9) + -std::log(0.9)) / 2.0;
    CHECK(weighted_bce(scores, labels, 2.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(weighted_bce(scores, labels, 2.0) == doctest::Approx(0.15804).epsilon(1e-4));
}

TEST_CASE("pos_weight = 1 reduces to plain BCE") {
    std::vector<double> scores = {0.2, 0.7, 0.99, 0.4};
    std::vector<int> labels = {0, 1, 1, 0};
    double weighted = weighted_bce(scores, labels, 1.0);
    double plain = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        plain += labels[i] ? -std::log(scores[i]) : -std::log(1 - scores[i]);
    plain /= static_cast<double>(scores.size());
    CHECK(std::abs(weighted - plain) < 1e-12);
}

TEST_CASE("weighted_bce rejects mismatched lengths") {
    std::vector<double> scores = {0.5, 0.5};
    std::vector<int> labels = {1};
    CHECK_THROWS_AS(weighted_bce(scores, labels, 1.0), ShapeError);
}

TEST_CASE("ground-truth scorer returns foreground ratios") {
    SegMap seg = seg_with_axial_band(10, 10, 20, 4, 6);
    GroundTruthScorer scorer(seg);
    CHECK(scorer.score(ViewId::axial, 5) == 0.01);
    CHECK(scorer.score(ViewId::axial, 0) == 0.0);
    CHECK_THROWS_AS(scorer.score(ViewId::axial, 50), IndexError);
}

TEST_CASE("file scorer reads the score csv schema") {
    auto path = std::string("/tmp/mosaic_filescorer_test.csv");
    {
        std::ofstream out(path);
        out << "volume_id,view,slice_index,score\n";
        out << "vol7,axial,0,0.25\n";
        out << "vol7,axial,1,0.75\n";
        out << "vol7,coronal,0,1.0\n";
        out << "other,axial,0,0.99\n";
    }
    FileScorer scorer(path, "vol7");
    CHECK(scorer.score(ViewId::axial, 0) == 0.25);
    CHECK(scorer.score(ViewId::axial, 1) == 0.75);
    CHECK(scorer.score(ViewId::coronal, 0) == 1.0);
    CHECK_THROWS_AS(scorer.score(ViewId::axial, 2), MissingPredictions);
    CHECK_THROWS_AS(scorer.score(ViewId::sagittal, 0), MissingPredictions);
}

TEST_CASE("file scorer rejects bad rows") {
    auto path = std::string("/tmp/mosaic_filescorer_bad.csv");
    {
        std::ofstream out(path);
        out << "volume_id,view,slice_index,score\n";
        out << "v,axial,0,1.5\n";
    }
    CHECK_THROWS_AS(FileScorer(path, "v"), ParseError);
    {
        std::ofstream out(path);
        out << "volume_id,view,slice_index,score\n";
        out << "v,axial,0,0.5\n";
        out << "v,axial,0,0.6\n";
    }
    CHECK_THROWS_AS(FileScorer(path, "v"), ParseError);
}
