#pragma once

#include "prep/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>

namespace prep {

enum class FlavorSelection { blender, llff, both };

const char* to_string(FlavorSelection f);
FlavorSelection parse_flavor(const std::string& s);

struct PipelineConfig {
    std::filesystem::path input_root;
    std::filesystem::path output_root;
    std::uint64_t k = 0;  // required; 0 means unset
    double h_b = std::numeric_limits<double>::quiet_NaN();  // required
    double h_b_step = 0.05;
    int h_s = 10;
    RotationMap rotation_map;
    /// Shell command; {frames_dir} and {model_dir} are replaced with quoted paths.
    std::string pose_cmd;
    double min_pose_coverage = 0.9;
    int max_retries = 2;
    FlavorSelection flavor = FlavorSelection::blender;
    bool strict = false;
    std::string filename_pattern = "{camera}_{index}";
    std::filesystem::path exclusion_list;
    unsigned jobs = 1;

    /// Throws ConfigError describing the first out-of-range field.
    void validate() const;
};

/// Flat `key = value` lines (TOML subset): strings in double quotes, numbers,
/// booleans, `#` comments. Keys are the PipelineConfig field names.
using RawConfig = std::map<std::string, std::string>;

RawConfig parse_config_text(const std::string& text, const std::string& source = "<config>");

/// Applies raw values onto `config`. Relative paths resolve against `base_dir`.
void apply_config(PipelineConfig& config, const RawConfig& raw, const std::filesystem::path& base_dir = {});

/// parse + apply + validate for a config file.
PipelineConfig load_config(const std::filesystem::path& file);

}  // namespace prep
