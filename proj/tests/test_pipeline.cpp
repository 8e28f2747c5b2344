// End-to-end forward pass at toy scale: phantom volume in, per-organ
// probabilities and a loss out. Checks composition, not learned quality.

#include <cmath>

#include "doctest.h"
#include "mosaic/filtering.hpp"
#include "mosaic/kernels.hpp"
#include "mosaic/normalize.hpp"
#include "mosaic/phantom.hpp"
#include "mosaic/prompts.hpp"
#include "mosaic/slc.hpp"

using namespace mosaic;

namespace {

MultiViewTensor fused_center_tensor(const CtVolume& vol) {
    std::array<std::vector<IntensitySlice>, 3> views;
    for (ViewId view : kAllViews) {
        for (const auto& s : extract_view(vol, view))
            views[static_cast<int>(view)].push_back(standardize(s, 64));
    }
    auto center = [](const std::vector<IntensitySlice>& v) {
        return make_triplet(v, static_cast<Index>(v.size()) / 2);
    };
    return fuse_views(center(views[0]), center(views[1]), center(views[2]));
}

}  // namespace

TEST_CASE("phantom to per-organ probabilities, twice, identically") {
    std::array<Index, 3> dims = {24, 24, 24};
    Phantom phantom = make_phantom(2718, dims, default_phantom_layout(dims));

    CtVolume prepped = percentile_normalize(window_hu(phantom.volume));
    MultiViewTensor tensor = fused_center_tensor(prepped);
    for (const auto& ch : tensor.channels) {
        CHECK(ch.rows() == 64);
        CHECK(ch.minCoeff() >= 0.0);
        CHECK(ch.maxCoeff() <= 1.0);
    }

    Vector z_img = toy_encode_image(tensor, kToyEmbedDim);

    std::vector<std::string> organs;
    for (const auto& [id, name] : btcv_organ_table())
        if (id > 0) organs.push_back(name);
    PromptBank bank = build_prompts(organs);

    Vector sims(kToyOrganCount);
    for (int k = 0; k < kToyOrganCount; ++k) {
        std::vector<Vector> embeddings;
        for (const auto& prompt : bank.prompts[static_cast<std::size_t>(k)])
            embeddings.push_back(toy_encode_text(prompt, kToyEmbedDim));
        Vector z_text = ensemble_text_embedding(embeddings);
        sims[k] = cosine_sim(z_img, z_text);
        CHECK(sims[k] >= -1.0);
        CHECK(sims[k] <= 1.0);
    }

    HeadParams head = random_head_params(kToyEmbedDim + kToyOrganCount, {24}, kToyOrganCount, 99);
    Vector y_hat = predict_head(z_img, sims, head);
    REQUIRE(y_hat.size() == kToyOrganCount);
    for (Index k = 0; k < y_hat.size(); ++k) {
        CHECK(y_hat[k] > 0.0);
        CHECK(y_hat[k] < 1.0);
    }

    // ground truth: organ present in the phantom at all
    std::vector<int> y(kToyOrganCount, 0);
    std::vector<std::int64_t> pos_counts(kToyOrganCount, 0);
    for (int k = 0; k < kToyOrganCount; ++k) {
        auto profile = organ_areas(phantom.seg, ViewId::axial, k + 1);
        bool present = center_slice(profile).has_value();
        y[static_cast<std::size_t>(k)] = present ? 1 : 0;
        pos_counts[static_cast<std::size_t>(k)] = present ? 40 : 0;
    }

    FocalConfig cfg;
    cfg.alpha = alpha_from_frequencies(pos_counts, 40 * kToyOrganCount);
    cfg.gamma = 2.0;
    double loss = cbfl_loss(y_hat, y, cfg);
    CHECK(std::isfinite(loss));

    // the whole pass is deterministic
    MultiViewTensor tensor2 = fused_center_tensor(prepped);
    Vector z2 = toy_encode_image(tensor2, kToyEmbedDim);
    CHECK(z2 == z_img);
    Vector y_hat2 = predict_head(z2, sims, head);
    CHECK(y_hat2 == y_hat);
    CHECK(cbfl_loss(y_hat2, y, cfg) == loss);
}

TEST_CASE("filtering plus selection feeds the slc engine coherently") {
    std::array<Index, 3> dims = {20, 20, 20};
    Phantom phantom = make_phantom(314, dims, default_phantom_layout(dims));
    GroundTruthScorer scorer(phantom.seg);

    for (ViewId view : kAllViews) {
        Index n = view_slice_count(phantom.seg.labels, view);
        std::vector<double> scores;
        for (Index s = 0; s < n; ++s) scores.push_back(scorer.score(view, s));
        auto selected_vec = top_percent_select(scores, 10);
        std::set<Index> selected(selected_vec.begin(), selected_vec.end());

        auto profile = organ_areas(phantom.seg, view, 6);  // liver
        SlcResult r = slc_score(profile, selected, {0.1, 1e-6});
        REQUIRE(r.slc.has_value());
        // the foreground-ratio scorer concentrates near the liver anchor
        CHECK(*r.slc > 0.2);
        CHECK(*r.slc <= 1.0);
    }
}
