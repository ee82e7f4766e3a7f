#pragma once

#include "prep/image.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace prep {

/// Identity of one frame: which camera, which video, and its position in source order.
/// Ordered lexicographically on the ids, numerically on the index.
struct FrameId {
    std::string camera_id;
    std::string video_id;
    std::uint64_t index = 0;

    /// "camera/video/index"
    std::string str() const;

    friend auto operator<=>(const FrameId&, const FrameId&) = default;
    friend bool operator==(const FrameId&, const FrameId&) = default;
};

/// One decoded frame. Pixels are either held in memory or decoded from
/// `source_path` on each access; the half-turn flag is applied on access in
/// the second case. Frames are immutable once built and cheap to copy.
class Frame {
public:
    Frame() = default;

    /// Frame backed by in-memory pixels (must be 3-channel RGB).
    static Frame from_image(FrameId id, Image rgb, std::filesystem::path source_path = {});

    /// Frame whose pixels are decoded from disk on demand.
    static Frame from_file(FrameId id, std::filesystem::path source_path, int width, int height);

    const FrameId& id() const { return id_; }
    int width() const { return width_; }
    int height() const { return height_; }
    const std::filesystem::path& source_path() const { return source_path_; }
    bool resident() const { return static_cast<bool>(resident_); }

    /// True when the frame's pixels differ from the source file by a half-turn.
    bool rotated() const { return rotated_; }

    /// RGB pixels with any rotation applied.
    std::shared_ptr<const Image> pixels() const;

    /// Rotated copy. In-memory pixels are rotated eagerly; disk-backed frames toggle the lazy flag.
    Frame rotated_180() const;

private:
    FrameId id_;
    int width_ = 0;
    int height_ = 0;
    std::filesystem::path source_path_;
    std::shared_ptr<const Image> resident_;
    bool rotated_ = false;
};

enum class Provenance { raw, sampled, deblurred, deduped };

const char* to_string(Provenance p);

/// Frames in strictly increasing FrameId order, tagged with the stage that produced them.
struct FrameSet {
    std::vector<Frame> frames;
    Provenance provenance = Provenance::raw;

    std::size_t size() const { return frames.size(); }
    bool empty() const { return frames.empty(); }

    /// Throws std::logic_error if ids are not strictly increasing.
    void check_order() const;
};

enum class Rotation { none, half_turn };

/// camera_id -> rotation. Missing cameras are not rotated.
struct RotationMap {
    std::map<std::string, Rotation> entries;

    Rotation lookup(const std::string& camera_id) const;

    /// Parses "B,C" (half-turn for each listed camera) or "B:half_turn,C:none".
    static RotationMap parse(const std::string& spec);
    std::string str() const;
};

/// A file under the input root that did not become a frame.
struct SkippedSource {
    std::filesystem::path path;
    std::string reason;  // "excluded" | "decode_error" | "duplicate_id" | "pattern_mismatch"
    std::string detail;
};

struct IngestOptions {
    /// Placeholders {camera}, {video}, {index}; the extension (png, jpg, jpeg) is implied.
    std::string filename_pattern = "{camera}_{index}";
    /// Glob patterns matched against both the FrameId string and the file name.
    std::vector<std::string> exclusions;
    bool resident_pixels = false;
    unsigned jobs = 1;
};

struct SourceScan {
    FrameSet frames;
    std::vector<SkippedSource> skipped;
    std::size_t files_seen = 0;
};

SourceScan enumerate_sources(const std::filesystem::path& root, const IngestOptions& options);

/// Reads an exclusion list: one glob per line, blank lines and '#' comments ignored.
std::vector<std::string> read_exclusion_list(const std::filesystem::path& path);

/// Keeps positions 0, k, 2k, ... of every (camera, video) group. Throws ConfigError for k == 0.
FrameSet subsample(const FrameSet& frames, std::uint64_t k);

Frame rotate_180(const Frame& frame);

struct RotationResult {
    FrameSet frames;
    std::vector<FrameId> rotated;
};

RotationResult apply_rotation_map(const FrameSet& frames, const RotationMap& map);

}  // namespace prep
