#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace heterograph::cli {

// Config/schema violations exit with code 2; runtime failures with 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config_path;
    std::optional<std::string> out_override;
    std::optional<std::uint64_t> seed_override;
    int jobs = 1;
    bool force = false;
    bool dry_run = false;
};

nlohmann::json load_config(const std::string& path);

// Each returns the number of failed runs (0 means full success).
int cmd_generate(const nlohmann::json& config, const Options& opts);
int cmd_train(const nlohmann::json& config, const Options& opts);
int cmd_ablate(const nlohmann::json& config, const Options& opts);
int cmd_analyze(const nlohmann::json& config, const Options& opts);
int cmd_report(const nlohmann::json& config, const Options& opts);

}  // namespace heterograph::cli
