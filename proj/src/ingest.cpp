#include "prep/ingest.hpp"

#include "prep/error.hpp"
#include "prep/parallel.hpp"

#include <fnmatch.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>

namespace prep {

namespace fs = std::filesystem;

std::string FrameId::str() const {
    return camera_id + "/" + video_id + "/" + std::to_string(index);
}

Frame Frame::from_image(FrameId id, Image rgb, fs::path source_path) {
    if (rgb.channels != 3 || rgb.width < 1 || rgb.height < 1 ||
        rgb.data.size() != static_cast<std::size_t>(rgb.width) * rgb.height * 3) {
        throw std::invalid_argument("Frame: expected a non-empty 3-channel image");
    }
    Frame f;
    f.id_ = std::move(id);
    f.width_ = rgb.width;
    f.height_ = rgb.height;
    f.source_path_ = std::move(source_path);
    f.resident_ = std::make_shared<const Image>(std::move(rgb));
    return f;
}

Frame Frame::from_file(FrameId id, fs::path source_path, int width, int height) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("Frame: dimensions must be positive");
    }
    Frame f;
    f.id_ = std::move(id);
    f.width_ = width;
    f.height_ = height;
    f.source_path_ = std::move(source_path);
    return f;
}

std::shared_ptr<const Image> Frame::pixels() const {
    if (resident_) {
        return resident_;
    }
    Image img = read_image(source_path_);
    if (img.width != width_ || img.height != height_) {
        throw DecodeError(source_path_.string() + ": dimensions changed since enumeration");
    }
    if (rotated_) {
        img = rotate_180(img);
    }
    return std::make_shared<const Image>(std::move(img));
}

Frame Frame::rotated_180() const {
    Frame out = *this;
    out.rotated_ = !rotated_;
    if (resident_) {
        out.resident_ = std::make_shared<const Image>(prep::rotate_180(*resident_));
    }
    return out;
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::raw: return "raw";
        case Provenance::sampled: return "sampled";
        case Provenance::deblurred: return "deblurred";
        case Provenance::deduped: return "deduped";
    }
    return "?";
}

void FrameSet::check_order() const {
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (!(frames[i - 1].id() < frames[i].id())) {
            throw std::logic_error("FrameSet out of order at " + frames[i].id().str());
        }
    }
}

Rotation RotationMap::lookup(const std::string& camera_id) const {
    const auto it = entries.find(camera_id);
    return it == entries.end() ? Rotation::none : it->second;
}

RotationMap RotationMap::parse(const std::string& spec) {
    RotationMap map;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) {
            continue;
        }
        Rotation rot = Rotation::half_turn;
        if (const auto colon = item.find(':'); colon != std::string::npos) {
            const std::string value = item.substr(colon + 1);
            item.resize(colon);
            if (value == "half_turn" || value == "180") {
                rot = Rotation::half_turn;
            } else if (value == "none" || value == "0") {
                rot = Rotation::none;
            } else {
                throw ConfigError("rotation_map: unknown rotation '" + value + "'");
            }
        }
        map.entries[item] = rot;
    }
    return map;
}

std::string RotationMap::str() const {
    std::string out;
    for (const auto& [camera, rot] : entries) {
        if (!out.empty()) {
            out += ',';
        }
        out += camera + (rot == Rotation::half_turn ? ":half_turn" : ":none");
    }
    return out;
}

namespace {

struct NamePattern {
    std::regex regex;
    int camera_group = 0;
    int video_group = 0;
    int index_group = 0;
};

NamePattern compile_pattern(const std::string& pattern) {
    NamePattern out;
    std::string re = "^";
    int group = 0;
    for (std::size_t i = 0; i < pattern.size();) {
        if (pattern[i] == '{') {
            const auto close = pattern.find('}', i);
            if (close == std::string::npos) {
                throw ConfigError("filename_pattern: unterminated placeholder");
            }
            const std::string name = pattern.substr(i + 1, close - i - 1);
            ++group;
            if (name == "camera") {
                out.camera_group = group;
                re += "(.+?)";
            } else if (name == "video") {
                out.video_group = group;
                re += "(.+?)";
            } else if (name == "index") {
                out.index_group = group;
                re += "([0-9]+)";
            } else {
                throw ConfigError("filename_pattern: unknown placeholder {" + name + "}");
            }
            i = close + 1;
        } else {
            static const std::string special = R"(\^$.|?*+()[]{})";
            if (special.find(pattern[i]) != std::string::npos) {
                re += '\\';
            }
            re += pattern[i++];
        }
    }
    if (out.camera_group == 0 || out.index_group == 0) {
        throw ConfigError("filename_pattern must contain {camera} and {index}");
    }
    re += R"(\.(png|jpg|jpeg)$)";
    out.regex = std::regex(re, std::regex::ECMAScript | std::regex::icase);
    return out;
}

bool excluded(const std::vector<std::string>& globs, const FrameId& id, const std::string& filename) {
    const std::string key = id.str();
    return std::any_of(globs.begin(), globs.end(), [&](const std::string& g) {
        return fnmatch(g.c_str(), key.c_str(), 0) == 0 || fnmatch(g.c_str(), filename.c_str(), 0) == 0;
    });
}

}  // namespace

SourceScan enumerate_sources(const fs::path& root, const IngestOptions& options) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw IoError("input root is not a readable directory: " + root.string());
    }
    const NamePattern pattern = compile_pattern(options.filename_pattern);

    std::vector<fs::path> files;
    for (fs::directory_iterator it(root, ec), end; !ec && it != end; it.increment(ec)) {
        if (it->is_regular_file()) {
            files.push_back(it->path());
        }
    }
    if (ec) {
        throw IoError("cannot list " + root.string() + ": " + ec.message());
    }
    std::sort(files.begin(), files.end());

    SourceScan scan;
    scan.files_seen = files.size();

    struct Candidate {
        FrameId id;
        fs::path path;
    };
    std::vector<Candidate> candidates;
    for (const auto& path : files) {
        const std::string name = path.filename().string();
        std::smatch m;
        if (!std::regex_match(name, m, pattern.regex)) {
            scan.skipped.push_back({path, "pattern_mismatch", ""});
            continue;
        }
        FrameId id;
        id.camera_id = m[pattern.camera_group].str();
        id.video_id = pattern.video_group ? m[pattern.video_group].str() : "0";
        try {
            id.index = std::stoull(m[pattern.index_group].str());
        } catch (const std::out_of_range&) {
            scan.skipped.push_back({path, "pattern_mismatch", "index out of range"});
            continue;
        }
        if (excluded(options.exclusions, id, name)) {
            scan.skipped.push_back({path, "excluded", id.str()});
            continue;
        }
        candidates.push_back({std::move(id), path});
    }

    // decode everything once: catches corrupt files and records dimensions
    std::vector<std::optional<Frame>> decoded(candidates.size());
    std::vector<std::string> errors(candidates.size());
    parallel_for(candidates.size(), options.jobs, [&](std::size_t i) {
        const auto& c = candidates[i];
        try {
            Image img = read_image(c.path);
            if (options.resident_pixels) {
                decoded[i] = Frame::from_image(c.id, std::move(img), c.path);
            } else {
                decoded[i] = Frame::from_file(c.id, c.path, img.width, img.height);
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!decoded[i]) {
            spdlog::warn("skipping {}: {}", candidates[i].path.string(), errors[i]);
            scan.skipped.push_back({candidates[i].path, "decode_error", errors[i]});
            continue;
        }
        scan.frames.frames.push_back(std::move(*decoded[i]));
    }
    auto& frames = scan.frames.frames;
    std::stable_sort(frames.begin(), frames.end(), [](const Frame& a, const Frame& b) { return a.id() < b.id(); });
    // same id from two files (e.g. A_1.png and A_01.jpg): keep the first by path
    std::vector<Frame> unique;
    unique.reserve(frames.size());
    for (auto& f : frames) {
        if (!unique.empty() && unique.back().id() == f.id()) {
            scan.skipped.push_back({f.source_path(), "duplicate_id", f.id().str()});
            continue;
        }
        unique.push_back(std::move(f));
    }
    frames = std::move(unique);
    scan.frames.provenance = Provenance::raw;
    std::sort(scan.skipped.begin(), scan.skipped.end(),
              [](const SkippedSource& a, const SkippedSource& b) { return a.path < b.path; });
    return scan;
}

std::vector<std::string> read_exclusion_list(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open exclusion list " + path.string());
    }
    std::vector<std::string> globs;
    std::string line;
    while (std::getline(in, line)) {
        line.erase(0, line.find_first_not_of(" \t\r"));
        line.erase(line.find_last_not_of(" \t\r") + 1);
        if (!line.empty() && line[0] != '#') {
            globs.push_back(line);
        }
    }
    return globs;
}

FrameSet subsample(const FrameSet& frames, std::uint64_t k) {
    if (k == 0) {
        throw ConfigError("k must be >= 1");
    }
    FrameSet out;
    out.provenance = Provenance::sampled;
    std::uint64_t position = 0;
    for (std::size_t i = 0; i < frames.frames.size(); ++i) {
        const FrameId& id = frames.frames[i].id();
        if (i > 0) {
            const FrameId& prev = frames.frames[i - 1].id();
            const bool same_group = prev.camera_id == id.camera_id && prev.video_id == id.video_id;
            position = same_group ? position + 1 : 0;
        }
        if (position % k == 0) {
            out.frames.push_back(frames.frames[i]);
        }
    }
    return out;
}

Frame rotate_180(const Frame& frame) {
    return frame.rotated_180();
}

RotationResult apply_rotation_map(const FrameSet& frames, const RotationMap& map) {
    RotationResult result;
    result.frames.provenance = frames.provenance;
    result.frames.frames.reserve(frames.size());
    for (const auto& f : frames.frames) {
        if (map.lookup(f.id().camera_id) == Rotation::half_turn) {
            result.frames.frames.push_back(rotate_180(f));
            result.rotated.push_back(f.id());
        } else {
            result.frames.frames.push_back(f);
        }
    }
    return result;
}

}  // namespace prep
