#pragma once

#include <string>
#include <vector>

namespace mosaic {

// Defaults shared by the CLI subcommands; a --config JSON file overrides
// them, explicit flags override the file.
struct ToolConfig {
    double tau = 0.001;
    std::vector<double> delta = {0.01, 0.05, 0.1, 0.2};
    std::vector<double> top_percent = {1, 3, 5, 10};
    double epsilon = 1e-6;
    double window_lo = -50;
    double window_hi = 200;
    double threshold = 0.5;
};

ToolConfig load_tool_config(const std::string& path);

}  // namespace mosaic
