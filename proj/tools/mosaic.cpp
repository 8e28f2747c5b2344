// mosaic: CT slice-selection toolkit CLI.
//
// Subcommands: phantom, slice, filter, stats, prompts, slc, eval,
// kernels-check. Exit code 0 on success, 2 on validation failure.

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "mosaic/config.hpp"
#include "mosaic/filtering.hpp"
#include "mosaic/kernels.hpp"
#include "mosaic/metrics.hpp"
#include "mosaic/nifti.hpp"
#include "mosaic/normalize.hpp"
#include "mosaic/organ_stats.hpp"
#include "mosaic/phantom.hpp"
#include "mosaic/prompts.hpp"
#include "mosaic/report.hpp"
#include "mosaic/slc.hpp"

namespace fs = std::filesystem;
using namespace mosaic;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::uint64_t seed = 1;
    int jobs = 1;
    ToolConfig config;

    void finalize() {
        if (!config_path.empty()) config = load_tool_config(config_path);
    }
};

std::vector<std::string> btcv_names() {
    std::vector<std::string> names;
    for (const auto& [id, name] : btcv_organ_table())
        if (id > 0) names.push_back(name);
    return names;
}

// --- phantom ---

int run_phantom(const GlobalOpts& g, const std::string& out_dir,
                const std::vector<Index>& dims_arg, bool gzip) {
    std::array<Index, 3> dims = {48, 48, 48};
    if (!dims_arg.empty()) {
        if (dims_arg.size() != 3) throw ConfigError("--dims needs exactly three values");
        dims = {dims_arg[0], dims_arg[1], dims_arg[2]};
    }
    fs::create_directories(out_dir);
    Phantom p = make_phantom(g.seed, dims, default_phantom_layout(dims));
    std::string ext = gzip ? ".nii.gz" : ".nii";
    write_nifti(p.volume, (fs::path(out_dir) / ("vol" + ext)).string());
    write_nifti(p.seg, (fs::path(out_dir) / ("seg" + ext)).string());
    std::cout << "wrote " << out_dir << "/vol" << ext << " and seg" << ext << " ("
              << dims[0] << "x" << dims[1] << "x" << dims[2] << ", seed " << g.seed << ")\n";
    return 0;
}

// --- slice ---

int run_slice(const GlobalOpts& g, const std::string& vol_path, const std::string& out_dir,
              Index axial, Index coronal, Index sagittal, bool pgm, bool do_augment,
              double p_hflip, double p_vflip, double max_angle) {
    CtVolume vol = read_ct_volume(vol_path);
    vol = percentile_normalize(window_hu(vol, g.config.window_lo, g.config.window_hi));

    std::array<std::vector<IntensitySlice>, 3> views;
    for (ViewId view : kAllViews) {
        auto slices = extract_view(vol, view);
        auto& dst = views[static_cast<int>(view)];
        dst.reserve(slices.size());
        for (const auto& s : slices) dst.push_back(standardize(s));
    }
    auto pick = [&](ViewId view, Index requested) {
        const auto& v = views[static_cast<int>(view)];
        Index n = static_cast<Index>(v.size());
        Index idx = requested >= 0 ? requested : n / 2;
        if (idx >= n) throw ConfigError(std::string(view_name(view)) + " index out of range");
        return idx;
    };
    Index ia = pick(ViewId::axial, axial);
    Index ic = pick(ViewId::coronal, coronal);
    Index is = pick(ViewId::sagittal, sagittal);

    MultiViewTensor tensor = fuse_views(make_triplet(views[0], ia), make_triplet(views[1], ic),
                                        make_triplet(views[2], is));
    if (do_augment) tensor = augment(tensor, g.seed, {p_hflip, p_vflip, max_angle});

    fs::create_directories(out_dir);
    fs::path base = fs::path(out_dir) / ("tensor_a" + std::to_string(ia) + "_c" +
                                         std::to_string(ic) + "_s" + std::to_string(is));
    dump_tensor(tensor, base.string() + ".bin", base.string() + ".json");
    if (pgm) {
        for (int ch = 0; ch < 9; ++ch)
            write_pgm(tensor.channels[static_cast<std::size_t>(ch)],
                      base.string() + "_ch" + std::to_string(ch) + ".pgm");
    }
    std::cout << "wrote " << base.string() << ".{bin,json" << (pgm ? ",pgm x9" : "") << "}\n";
    return 0;
}

// --- filter ---

int run_filter(const GlobalOpts& g, const std::vector<std::string>& seg_paths, double tau,
               const std::string& out_path, const std::string& labels_out) {
    double effective_tau = tau >= 0 ? tau : g.config.tau;
    std::vector<std::vector<InformativenessLabel>> volumes;
    for (const std::string& path : seg_paths) {
        SegMap seg = read_seg_map(path);
        std::vector<InformativenessLabel> labels;
        for (ViewId view : kAllViews) {
            auto view_labels = filter_volume(seg, view, effective_tau);
            labels.insert(labels.end(), view_labels.begin(), view_labels.end());
        }
        volumes.push_back(std::move(labels));
    }
    RetentionReport report = retention_report(volumes);
    write_retention_csv(report, out_path);
    std::cout << "wrote " << out_path << " (tau " << effective_tau << ")\n";

    if (!labels_out.empty()) {
        std::ofstream out(labels_out);
        if (!out) throw IoError("cannot open " + labels_out + " for writing");
        out << "volume_id,view,slice_index,label,foreground_ratio\n";
        out.precision(8);
        for (std::size_t v = 0; v < volumes.size(); ++v)
            for (const auto& l : volumes[v])
                out << seg_paths[v] << ',' << view_name(l.view) << ',' << l.slice_index << ','
                    << l.label << ',' << l.foreground_ratio << '\n';
        std::cout << "wrote " << labels_out << "\n";
    }
    return 0;
}

// --- stats ---

int run_stats(const GlobalOpts& g, const std::vector<std::string>& seg_paths,
              const std::string& out_path) {
    std::vector<SegMap> segs;
    segs.reserve(seg_paths.size());
    for (const std::string& path : seg_paths) segs.push_back(read_seg_map(path));
    OrganStats stats = organ_stats(segs, g.jobs);
    write_stats_csv(stats, out_path);
    std::cout << "wrote " << out_path << " (" << segs.size() << " volumes)\n";
    return 0;
}

// --- prompts ---

int run_prompts(const std::vector<std::string>& organs, const std::string& out_path) {
    PromptBank bank = build_prompts(organs.empty() ? btcv_names() : organs);
    std::string body = prompt_bank_json(bank);
    if (out_path.empty()) {
        std::cout << body << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw IoError("cannot open " + out_path + " for writing");
        out << body << "\n";
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

// --- slc ---

int run_slc(const GlobalOpts& g, const std::string& seg_path, const std::string& pred_path,
            std::vector<double> deltas, std::vector<double> tops, double threshold,
            const std::string& out_path, const std::string& model) {
    SegMap seg = read_seg_map(seg_path);
    PredictionSet preds = read_predictions_csv(pred_path);
    if (deltas.empty()) deltas = g.config.delta;
    if (tops.empty()) tops = g.config.top_percent;

    SlcSweepTable table =
        threshold >= 0 ? slc_threshold_sweep(seg, preds, deltas, threshold, g.config.epsilon)
                       : slc_sweep(seg, preds, deltas, tops, g.config.epsilon);
    write_sweep_csv(table, seg.organ_table, model, out_path);
    std::cout << "wrote " << out_path << " (" << table.rows.size() << " rows)\n";
    return 0;
}

// --- eval ---

std::map<std::tuple<std::string, int, Index, int>, int> read_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty label file");
    std::map<std::tuple<std::string, int, Index, int>, int> labels;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string vol, view, idx, organ, label;
        if (!std::getline(ss, vol, ',') || !std::getline(ss, view, ',') ||
            !std::getline(ss, idx, ',') || !std::getline(ss, organ, ',') ||
            !std::getline(ss, label))
            throw ParseError(path + ":" + std::to_string(lineno) + ": need 5 columns");
        auto key = std::make_tuple(vol, static_cast<int>(view_from_name(view)),
                                   static_cast<Index>(std::stol(idx)), std::stoi(organ));
        if (!labels.emplace(key, std::stoi(label)).second)
            throw ParseError(path + ":" + std::to_string(lineno) + ": duplicate key");
    }
    return labels;
}

int run_eval(const GlobalOpts& g, const std::string& pred_path, const std::string& labels_path,
             const std::string& out_path) {
    PredictionSet preds = read_predictions_csv(pred_path);
    if (!labels_path.empty()) {
        auto labels = read_labels_csv(labels_path);
        PredictionSet merged;
        for (PredictionRecord r : preds.records()) {
            auto key = std::make_tuple(r.volume_id, static_cast<int>(r.view), r.slice_index,
                                       r.organ);
            auto it = labels.find(key);
            if (it == labels.end())
                throw ConfigError("eval: no label for " + r.volume_id + "/" +
                                  view_name(r.view) + "/" + std::to_string(r.slice_index) +
                                  "/organ " + std::to_string(r.organ));
            r.label = it->second;
            merged.add(std::move(r));
        }
        preds = std::move(merged);
    }
    MetricsReport report = evaluate_predictions(preds, g.config.threshold);
    bool csv = out_path.size() > 4 && out_path.compare(out_path.size() - 4, 4, ".csv") == 0;
    if (csv)
        write_metrics_csv(report, btcv_organ_table(), out_path);
    else {
        std::ofstream out(out_path);
        if (!out) throw IoError("cannot open " + out_path + " for writing");
        out << metrics_json(report, btcv_organ_table()) << "\n";
    }
    std::cout << "wrote " << out_path << " (overall F1 " << report.overall.f1 << ")\n";
    return 0;
}

// --- kernels-check ---

int run_kernels_check(int seeds) {
    KernelCheckReport report = run_kernel_checks(seeds);
    for (const auto& c : report.checks) {
        std::cout << (c.passed ? "[ok]  " : "[FAIL] ") << c.name << ": max error "
                  << c.max_error << " (tolerance " << c.tolerance << ")\n";
    }
    std::cout << (report.all_passed() ? "all kernel checks passed\n"
                                      : "kernel checks FAILED\n");
    return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MOSAIC slice-selection toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--seed", g.seed, "seed for anything stochastic");
    app.add_option("--jobs", g.jobs, "worker threads for batch operations")
        ->check(CLI::PositiveNumber);

    // phantom
    auto* phantom_cmd = app.add_subcommand("phantom", "generate a synthetic volume + labels");
    std::string phantom_out = "phantom_out";
    std::vector<Index> phantom_dims;
    bool phantom_gzip = false;
    phantom_cmd->add_option("--out", phantom_out, "output directory");
    phantom_cmd->add_option("--dims", phantom_dims, "H W D (default 48 48 48)")->expected(3);
    phantom_cmd->add_flag("--gzip", phantom_gzip, "write .nii.gz");

    // slice
    auto* slice_cmd = app.add_subcommand("slice", "window, normalize, fuse a tri-view tensor");
    std::string slice_vol, slice_out = "slice_out";
    Index idx_axial = -1, idx_coronal = -1, idx_sagittal = -1;
    bool slice_pgm = false, slice_aug = false;
    double aug_hflip = 0.5, aug_vflip = 0.5, aug_angle = 10.0;
    slice_cmd->add_option("--vol", slice_vol, "input volume (.nii/.nii.gz)")->required();
    slice_cmd->add_option("--out", slice_out, "output directory");
    slice_cmd->add_option("--axial", idx_axial, "axial center index (default middle)");
    slice_cmd->add_option("--coronal", idx_coronal, "coronal center index");
    slice_cmd->add_option("--sagittal", idx_sagittal, "sagittal center index");
    slice_cmd->add_flag("--pgm", slice_pgm, "also export the 9 channels as PGM");
    slice_cmd->add_flag("--augment", slice_aug, "apply a seeded augmentation");
    slice_cmd->add_option("--p-hflip", aug_hflip, "horizontal flip probability");
    slice_cmd->add_option("--p-vflip", aug_vflip, "vertical flip probability");
    slice_cmd->add_option("--max-angle", aug_angle, "rotation bound in degrees");

    // filter
    auto* filter_cmd = app.add_subcommand("filter", "informativeness filtering + retention");
    std::vector<std::string> filter_segs;
    double filter_tau = -1;
    std::string filter_out = "retention.csv", filter_labels_out;
    filter_cmd->add_option("--seg", filter_segs, "segmentation map(s)")->required();
    filter_cmd->add_option("--tau", filter_tau, "foreground-ratio threshold");
    filter_cmd->add_option("--out", filter_out, "retention CSV");
    filter_cmd->add_option("--labels-out", filter_labels_out, "per-slice label CSV");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "organ volume-fraction and size statistics");
    std::vector<std::string> stats_segs;
    std::string stats_out = "stats.csv";
    stats_cmd->add_option("--seg", stats_segs, "segmentation map(s)")->required();
    stats_cmd->add_option("--out", stats_out, "stats CSV");

    // prompts
    auto* prompts_cmd = app.add_subcommand("prompts", "emit the organ prompt bank as JSON");
    std::vector<std::string> prompt_organs;
    std::string prompts_out;
    prompts_cmd->add_option("--organ", prompt_organs, "organ names (default: 13 BTCV organs)");
    prompts_cmd->add_option("--out", prompts_out, "output file (default stdout)");

    // slc
    auto* slc_cmd = app.add_subcommand("slc", "slice localization concordance sweep");
    std::string slc_seg, slc_pred, slc_out = "slc.csv", slc_model = "scores";
    std::vector<double> slc_deltas, slc_tops;
    double slc_threshold = -1;
    slc_cmd->add_option("--seg", slc_seg, "ground-truth segmentation")->required();
    slc_cmd->add_option("--pred", slc_pred, "prediction CSV")->required();
    slc_cmd->add_option("--delta", slc_deltas, "tolerance (repeatable)");
    slc_cmd->add_option("--top", slc_tops, "top-% cutoff (repeatable)");
    slc_cmd->add_option("--threshold", slc_threshold,
                        "select by score >= threshold instead of top-%");
    slc_cmd->add_option("--out", slc_out, "sweep CSV");
    slc_cmd->add_option("--model", slc_model, "model column value");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "precision/recall/F1/ROC-AUC/PR-AUC");
    std::string eval_pred, eval_labels, eval_out = "metrics.json";
    eval_cmd->add_option("--pred", eval_pred, "prediction CSV")->required();
    eval_cmd->add_option("--labels", eval_labels,
                         "label CSV (volume_id,view,slice_index,organ,label); optional when "
                         "the prediction file carries labels");
    eval_cmd->add_option("--out", eval_out, "metrics output (.json or .csv)");

    // kernels-check
    auto* kernels_cmd = app.add_subcommand("kernels-check", "gradient and invariant self-test");
    int kernel_seeds = 20;
    kernels_cmd->add_option("--seeds", kernel_seeds, "number of seeds")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
        g.finalize();
        if (phantom_cmd->parsed()) return run_phantom(g, phantom_out, phantom_dims, phantom_gzip);
        if (slice_cmd->parsed())
            return run_slice(g, slice_vol, slice_out, idx_axial, idx_coronal, idx_sagittal,
                             slice_pgm, slice_aug, aug_hflip, aug_vflip, aug_angle);
        if (filter_cmd->parsed())
            return run_filter(g, filter_segs, filter_tau, filter_out, filter_labels_out);
        if (stats_cmd->parsed()) return run_stats(g, stats_segs, stats_out);
        if (prompts_cmd->parsed()) return run_prompts(prompt_organs, prompts_out);
        if (slc_cmd->parsed())
            return run_slc(g, slc_seg, slc_pred, slc_deltas, slc_tops, slc_threshold, slc_out,
                           slc_model);
        if (eval_cmd->parsed()) return run_eval(g, eval_pred, eval_labels, eval_out);
        if (kernels_cmd->parsed()) return run_kernels_check(kernel_seeds);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
