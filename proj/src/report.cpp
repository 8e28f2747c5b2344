#include "mosaic/report.hpp"

#include <fstream>

#include "json.hpp"

namespace mosaic {

namespace {

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << body;
    if (!out) throw IoError("short write to " + path);
}

nlohmann::ordered_json sweep_json(const SlcSweepTable& table, const OrganTable& organs) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const SlcSweepRow& r : table.rows) {
        rows.push_back({{"delta", r.delta},
                        {"top_percent", r.top_percent},
                        {"organ", r.organ < 0 ? "overall" : organ_name(organs, r.organ)},
                        {"view", view_name(r.view)},
                        {"slc", r.slc}});
    }
    return rows;
}

nlohmann::ordered_json retention_json(const RetentionReport& report) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const RetentionRow& r : report.rows) {
        rows.push_back({{"view", view_name(r.view)},
                        {"total_slices", r.total_slices},
                        {"retained_slices", r.retained_slices},
                        {"retention_rate", r.retention_rate},
                        {"reduction_pct", r.reduction_pct}});
    }
    return rows;
}

}  // namespace

std::vector<std::string> emit_report(const Report& report, const std::string& stem,
                                     ReportFormat format) {
    if (!report.metrics && !report.slc && !report.retention)
        throw EmptyReport("emit_report: no sections present");

    std::vector<std::string> written;
    const bool csv = format == ReportFormat::csv;
    if (report.metrics) {
        std::string path = stem + (csv ? ".metrics.csv" : ".metrics.json");
        if (csv)
            write_metrics_csv(*report.metrics, report.organs, path);
        else
            write_text(path, metrics_json(*report.metrics, report.organs) + "\n");
        written.push_back(path);
    }
    if (report.slc) {
        std::string path = stem + (csv ? ".slc.csv" : ".slc.json");
        if (csv)
            write_sweep_csv(*report.slc, report.organs, report.model, path);
        else
            write_text(path, sweep_json(*report.slc, report.organs).dump(2) + "\n");
        written.push_back(path);
    }
    if (report.retention) {
        std::string path = stem + (csv ? ".retention.csv" : ".retention.json");
        if (csv)
            write_retention_csv(*report.retention, path);
        else
            write_text(path, retention_json(*report.retention).dump(2) + "\n");
        written.push_back(path);
    }
    return written;
}

}  // namespace mosaic
