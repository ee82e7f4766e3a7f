#include "prep/config.hpp"

#include "prep/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace prep {

namespace fs = std::filesystem;

const char* to_string(FlavorSelection f) {
    switch (f) {
        case FlavorSelection::blender: return "blender";
        case FlavorSelection::llff: return "llff";
        case FlavorSelection::both: return "both";
    }
    return "?";
}

FlavorSelection parse_flavor(const std::string& s) {
    if (s == "blender" || s == "BLENDER_TRANSFORMS") {
        return FlavorSelection::blender;
    }
    if (s == "llff" || s == "LLFF") {
        return FlavorSelection::llff;
    }
    if (s == "both") {
        return FlavorSelection::both;
    }
    throw ConfigError("flavor must be blender, llff or both (got '" + s + "')");
}

void PipelineConfig::validate() const {
    if (input_root.empty()) {
        throw ConfigError("input_root is required");
    }
    if (output_root.empty()) {
        throw ConfigError("output_root is required");
    }
    if (k < 1) {
        throw ConfigError("k is required and must be >= 1");
    }
    if (std::isnan(h_b)) {
        throw ConfigError("h_b is required");
    }
    if (!(h_b >= 0.0 && h_b <= 1.0)) {
        throw ConfigError("h_b must be in [0, 1]");
    }
    if (!(h_b_step > 0.0)) {
        throw ConfigError("h_b_step must be positive");
    }
    if (h_s < 0 || h_s > 64) {
        throw ConfigError("h_s must be in [0, 64]");
    }
    if (!(min_pose_coverage > 0.0 && min_pose_coverage <= 1.0)) {
        throw ConfigError("min_pose_coverage must be in (0, 1]");
    }
    if (max_retries < 0 || max_retries > 100) {
        throw ConfigError("max_retries must be in [0, 100]");
    }
    if (pose_cmd.find("{frames_dir}") == std::string::npos || pose_cmd.find("{model_dir}") == std::string::npos) {
        throw ConfigError("pose_cmd must contain {frames_dir} and {model_dir}");
    }
    if (jobs < 1) {
        throw ConfigError("jobs must be >= 1");
    }
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + what);
}

// Returns the unescaped contents of a double-quoted string and the index just past it.
std::pair<std::string, std::size_t> quoted(const std::string& text, std::size_t start, const std::string& source,
                                           std::size_t line) {
    std::string out;
    for (std::size_t i = start + 1; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '"') {
            return {out, i + 1};
        }
        if (c == '\\') {
            if (++i >= text.size()) {
                break;
            }
            switch (text[i]) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(source, line, std::string("unknown escape \\") + text[i]);
            }
            continue;
        }
        out += c;
    }
    fail(source, line, "unterminated string");
}

}  // namespace

RawConfig parse_config_text(const std::string& text, const std::string& source) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        if (t[0] == '[') {
            fail(source, line_no, "tables are not supported; use flat keys");
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            fail(source, line_no, "expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        std::string rest = trim(t.substr(eq + 1));
        if (key.empty()) {
            fail(source, line_no, "empty key");
        }
        std::string value;
        if (!rest.empty() && rest[0] == '"') {
            auto [s, end] = quoted(rest, 0, source, line_no);
            const std::string tail = trim(rest.substr(end));
            if (!tail.empty() && tail[0] != '#') {
                fail(source, line_no, "unexpected text after string");
            }
            value = std::move(s);
        } else {
            if (const auto hash = rest.find('#'); hash != std::string::npos) {
                rest = trim(rest.substr(0, hash));
            }
            if (rest.empty()) {
                fail(source, line_no, "missing value for " + key);
            }
            value = rest;
        }
        if (!raw.emplace(key, value).second) {
            fail(source, line_no, "duplicate key " + key);
        }
    }
    return raw;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError(key + ": not a valid number '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") {
        return true;
    }
    if (value == "false") {
        return false;
    }
    throw ConfigError(key + ": expected true or false");
}

fs::path resolve(const fs::path& base, const std::string& value) {
    fs::path p(value);
    return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

void apply_config(PipelineConfig& c, const RawConfig& raw, const fs::path& base_dir) {
    for (const auto& [key, value] : raw) {
        if (key == "input_root") {
            c.input_root = resolve(base_dir, value);
        } else if (key == "output_root") {
            c.output_root = resolve(base_dir, value);
        } else if (key == "k") {
            c.k = parse_number<std::uint64_t>(key, value);
        } else if (key == "h_b") {
            c.h_b = parse_number<double>(key, value);
        } else if (key == "h_b_step") {
            c.h_b_step = parse_number<double>(key, value);
        } else if (key == "h_s") {
            c.h_s = parse_number<int>(key, value);
        } else if (key == "rotation_map") {
            c.rotation_map = RotationMap::parse(value);
        } else if (key == "pose_cmd") {
            c.pose_cmd = value;
        } else if (key == "min_pose_coverage") {
            c.min_pose_coverage = parse_number<double>(key, value);
        } else if (key == "max_retries") {
            c.max_retries = parse_number<int>(key, value);
        } else if (key == "flavor") {
            c.flavor = parse_flavor(value);
        } else if (key == "strict") {
            c.strict = parse_bool(key, value);
        } else if (key == "filename_pattern") {
            c.filename_pattern = value;
        } else if (key == "exclusion_list") {
            c.exclusion_list = resolve(base_dir, value);
        } else if (key == "jobs") {
            c.jobs = parse_number<unsigned>(key, value);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
}

PipelineConfig load_config(const fs::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot open config " + file.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    PipelineConfig config;
    apply_config(config, parse_config_text(ss.str(), file.string()), file.parent_path());
    config.validate();
    return config;
}

}  // namespace prep
