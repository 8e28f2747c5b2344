#pragma once

#include <optional>
#include <string>

#include "mosaic/filtering.hpp"
#include "mosaic/metrics.hpp"
#include "mosaic/slc.hpp"

namespace mosaic {

enum class ReportFormat { csv, json };

// Everything the CLI can report on; any subset may be present.
struct Report {
    std::optional<MetricsReport> metrics;
    std::optional<SlcSweepTable> slc;
    std::optional<RetentionReport> retention;
    OrganTable organs = btcv_organ_table();
    std::string model = "scores";
};

// Writes <stem>.{metrics,slc,retention}.{csv|json}; the SLC section is the
// plot-ready long format. Throws EmptyReport when no section is present.
// Returns the paths written.
std::vector<std::string> emit_report(const Report& report, const std::string& stem,
                                     ReportFormat format);

}  // namespace mosaic
