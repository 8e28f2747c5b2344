#include "mosaic/config.hpp"

#include <fstream>

#include "json.hpp"
#include "mosaic/errors.hpp"

namespace mosaic {

ToolConfig load_tool_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    ToolConfig cfg;
    try {
        cfg.tau = j.value("tau", cfg.tau);
        if (j.contains("delta")) cfg.delta = j.at("delta").get<std::vector<double>>();
        if (j.contains("top_percent"))
            cfg.top_percent = j.at("top_percent").get<std::vector<double>>();
        cfg.epsilon = j.value("epsilon", cfg.epsilon);
        if (j.contains("window")) {
            cfg.window_lo = j.at("window").value("lo", cfg.window_lo);
            cfg.window_hi = j.at("window").value("hi", cfg.window_hi);
        }
        cfg.threshold = j.value("threshold", cfg.threshold);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (cfg.tau < 0 || cfg.tau > 1) throw ConfigError(path + ": tau must lie in [0,1]");
    if (cfg.window_lo >= cfg.window_hi) throw ConfigError(path + ": window lo must be < hi");
    if (cfg.epsilon <= 0) throw ConfigError(path + ": epsilon must be > 0");
    for (double d : cfg.delta)
        if (d <= 0) throw ConfigError(path + ": delta values must be > 0");
    for (double t : cfg.top_percent)
        if (t <= 0 || t > 100) throw ConfigError(path + ": top_percent must lie in (0,100]");
    return cfg;
}

}  // namespace mosaic
