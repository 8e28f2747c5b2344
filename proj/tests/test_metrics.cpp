#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mosaic/metrics.hpp"
#include "mosaic/phantom.hpp"
#include "mosaic/report.hpp"
#include "mosaic/rng.hpp"
#include "oracles.hpp"

using namespace mosaic;

TEST_CASE("confusion metrics hand cases") {
    std::vector<double> perfect = {0.9, 0.8, 0.1, 0.2};
    std::vector<int> labels = {1, 1, 0, 0};
    ConfusionMetrics m = confusion_metrics(perfect, labels);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);

    std::vector<double> all_neg = {0.1, 0.2, 0.3, 0.4};
    ConfusionMetrics z = confusion_metrics(all_neg, labels);
    CHECK(z.precision == 0.0);
    CHECK(z.recall == 0.0);
    CHECK(z.f1 == 0.0);

    std::vector<double> mixed = {0.9, 0.6, 0.4, 0.1};
    std::vector<int> mixed_labels = {1, 0, 1, 0};
    ConfusionMetrics h = confusion_metrics(mixed, mixed_labels);
    CHECK(h.precision == 0.5);
    CHECK(h.recall == 0.5);
    CHECK(h.f1 == 0.5);
}

TEST_CASE("recall never increases with the threshold") {
    std::mt19937_64 rng(3);
    std::vector<double> scores(60);
    std::vector<int> labels(60);
    for (std::size_t i = 0; i < 60; ++i) {
        scores[i] = det_uniform(rng);
        labels[i] = det_uniform(rng) < 0.4;
    }
    double prev = 2.0;
    for (double thr = 0.0; thr <= 1.0; thr += 0.05) {
        double r = confusion_metrics(scores, labels, thr).recall;
        CHECK(r <= prev + 1e-12);
        prev = r;
    }
}

TEST_CASE("roc_auc hand cases") {
    std::vector<double> sep = {0.9, 0.8, 0.2, 0.1};
    std::vector<int> labels = {1, 1, 0, 0};
    CHECK(roc_auc(sep, labels) == 1.0);

    std::vector<double> tied(6, 0.5);
    std::vector<int> half = {1, 0, 1, 0, 1, 0};
    CHECK(roc_auc(tied, half) == 0.5);

    std::vector<double> paper = {0.1, 0.4, 0.35, 0.8};
    std::vector<int> paper_labels = {0, 0, 1, 1};
    CHECK(roc_auc(paper, paper_labels) == 0.75);

    std::vector<int> ones = {1, 1, 1, 1};
    CHECK_THROWS_AS(roc_auc(paper, ones), UndefinedMetric);
}

TEST_CASE("pr_auc hand cases") {
    std::vector<double> sep = {0.9, 0.8, 0.2, 0.1};
    std::vector<int> labels = {1, 1, 0, 0};
    CHECK(pr_auc(sep, labels) == 1.0);

    // single positive ranked last of n -> 1/n
    std::vector<double> worst = {0.9, 0.8, 0.7, 0.1};
    std::vector<int> one_pos = {0, 0, 0, 1};
    CHECK(pr_auc(worst, one_pos) == doctest::Approx(0.25).epsilon(1e-12));

    // constant scores -> prevalence
    std::vector<double> tied(10, 0.3);
    std::vector<int> labels3 = {1, 0, 0, 1, 0, 0, 1, 0, 0, 0};
    CHECK(pr_auc(tied, labels3) == doctest::Approx(0.3).epsilon(1e-12));

    std::vector<int> zeros(4, 0);
    CHECK_THROWS_AS(pr_auc(sep, zeros), UndefinedMetric);
}

TEST_CASE("ranking metrics match brute-force oracles on random data") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t n = 5 + static_cast<std::size_t>(det_uniform(rng) * 100);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool ties = trial % 2;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = ties ? std::round(det_uniform(rng) * 8) / 8.0 : det_uniform(rng);
            labels[i] = det_uniform(rng) < 0.35;
        }
        // ensure both classes
        labels[0] = 1;
        labels[1] = 0;

        CHECK(std::abs(roc_auc(scores, labels) - oracle::roc_auc_pairs(scores, labels)) < 1e-12);
        CHECK(std::abs(pr_auc(scores, labels) -
                       oracle::average_precision_thresholds(scores, labels)) < 1e-12);
    }
}

TEST_CASE("roc_auc is invariant under strictly monotone score transforms") {
    std::mt19937_64 rng(12);
    std::vector<double> scores(40);
    std::vector<int> labels(40);
    for (std::size_t i = 0; i < 40; ++i) {
        scores[i] = det_uniform(rng);
        labels[i] = det_uniform(rng) < 0.5;
    }
    labels[0] = 1;
    labels[1] = 0;
    double base = roc_auc(scores, labels);
    std::vector<double> squashed(40), scaled(40);
    for (std::size_t i = 0; i < 40; ++i) {
        squashed[i] = 1.0 / (1.0 + std::exp(-6 * (scores[i] - 0.5)));
        scaled[i] = 0.2 + 0.5 * scores[i];
    }
    CHECK(roc_auc(squashed, labels) == doctest::Approx(base).epsilon(1e-12));
    CHECK(roc_auc(scaled, labels) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("phantom: centered 3-voxel ball in a 32-cube holds 123 voxels") {
    Phantom p = make_phantom(1, {32, 32, 32}, {{1, {16, 16, 16}, {3, 3, 3}}});
    std::int64_t count = 0;
    for (std::int32_t v : p.seg.labels.raw()) count += v == 1 ? 1 : 0;

    // oracle: direct membership loop
    std::int64_t expected = 0;
    for (int x = 0; x < 32; ++x)
        for (int y = 0; y < 32; ++y)
            for (int z = 0; z < 32; ++z) {
                double q = (std::pow((x - 16) / 3.0, 2) + std::pow((y - 16) / 3.0, 2) +
                            std::pow((z - 16) / 3.0, 2));
                expected += q <= 1.0 ? 1 : 0;
            }
    CHECK(expected == 123);
    CHECK(count == expected);
}

TEST_CASE("phantoms are deterministic per seed") {
    auto layout = default_phantom_layout({20, 20, 20});
    Phantom a = make_phantom(42, {20, 20, 20}, layout);
    Phantom b = make_phantom(42, {20, 20, 20}, layout);
    CHECK(a.volume.grid.raw() == b.volume.grid.raw());
    CHECK(a.seg.labels.raw() == b.seg.labels.raw());
    Phantom c = make_phantom(43, {20, 20, 20}, layout);
    CHECK(a.volume.grid.raw() != c.volume.grid.raw());
}

TEST_CASE("phantom without organs is all background") {
    Phantom p = make_phantom(3, {8, 8, 8}, {});
    for (std::int32_t v : p.seg.labels.raw()) CHECK(v == 0);
}

TEST_CASE("out-of-bounds ellipsoids are rejected") {
    CHECK_THROWS_AS(make_phantom(1, {10, 10, 10}, {{1, {9, 5, 5}, {3, 3, 3}}}), ConfigError);
    CHECK_THROWS_AS(make_phantom(1, {10, 10, 10}, {{1, {5, 5, 5}, {0, 1, 1}}}), ConfigError);
}

TEST_CASE("priority order decides overlaps") {
    Phantom p = make_phantom(1, {16, 16, 16},
                             {{2, {8, 8, 8}, {4, 4, 4}}, {5, {8, 8, 8}, {2, 2, 2}}});
    CHECK(p.seg.labels(8, 8, 8) == 2);  // first entry wins
}

TEST_CASE("evaluate_predictions groups per organ and pools overall") {
    PredictionSet set;
    auto add = [&](int organ, Index s, double score, int label) {
        PredictionRecord r;
        r.volume_id = "v";
        r.view = ViewId::axial;
        r.slice_index = s;
        r.organ = organ;
        r.score = score;
        r.label = label;
        set.add(r);
    };
    add(1, 0, 0.9, 1);
    add(1, 1, 0.6, 0);
    add(1, 2, 0.4, 1);
    add(1, 3, 0.1, 0);
    add(2, 0, 0.95, 1);
    add(2, 1, 0.05, 0);

    MetricsReport report = evaluate_predictions(set);
    CHECK(report.per_organ.at(1).precision == 0.5);
    CHECK(report.per_organ.at(1).recall == 0.5);
    CHECK(report.per_organ.at(2).f1 == 1.0);
    CHECK(report.per_organ.at(1).support == 2);
    CHECK(report.overall.support == 3);

    // per-organ threshold override flips organ 1's low-score positive
    MetricsReport relaxed = evaluate_predictions(set, 0.5, {{1, 0.3}});
    CHECK(relaxed.per_organ.at(1).recall == 1.0);
}

TEST_CASE("emit_report writes consistent csv and json") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "mosaic_report_test";
    fs::create_directories(dir);

    Report report;
    RetentionInput counts;
    counts[ViewId::axial] = {{143, 83}};
    report.retention = retention_report(counts);

    auto csv_paths = emit_report(report, (dir / "out").string(), ReportFormat::csv);
    auto json_paths = emit_report(report, (dir / "out").string(), ReportFormat::json);
    REQUIRE(csv_paths.size() == 1);
    REQUIRE(json_paths.size() == 1);

    std::ifstream csv(csv_paths[0]);
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    CHECK(header == "view,total_slices,retained_slices,retention_rate,reduction_pct");
    CHECK(row.find("axial,143,83,") == 0);

    std::ifstream js(json_paths[0]);
    std::string json_body((std::istreambuf_iterator<char>(js)), std::istreambuf_iterator<char>());
    CHECK(json_body.find("\"retained_slices\": 83.0") != std::string::npos);

    Report empty;
    CHECK_THROWS_AS(emit_report(empty, (dir / "none").string(), ReportFormat::csv), EmptyReport);
}
