#pragma once

#include "prep/config.hpp"
#include "prep/ingest.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace prep {

struct AttemptRecord {
    int attempt = 0;
    double h_b = 0.0;
    std::size_t sampled = 0;
    std::size_t deblurred = 0;
    std::size_t deduped = 0;
    std::size_t posed = 0;
    double coverage = 0.0;
    int pose_exit_code = 0;
    // ok | pose_cmd_failed | model_unreadable | low_coverage | no_frames
    std::string status;
};

/// Everything a run did. `document` is what lands in manifest.json and
/// `frame_records` the lines of frames.jsonl; the typed fields mirror the
/// parts tests and the CLI read most often.
struct PipelineManifest {
    std::string status;  // ok | nothing_to_do | failed
    std::size_t raw = 0;
    std::size_t sampled = 0;
    std::vector<AttemptRecord> attempts;
    std::vector<std::string> pose_missing;
    std::vector<std::filesystem::path> outputs;
    std::string determinism_hash;
    nlohmann::ordered_json document;
    std::vector<nlohmann::ordered_json> frame_records;
};

/// sample -> rotate -> blur filter -> dedup -> external pose estimation ->
/// convert, re-running from the blur stage with h_b raised by h_b_step while
/// pose coverage stays below min_pose_coverage and retries remain. Writes
/// manifest.json and frames.jsonl under output_root. Throws ConfigError for a
/// bad config and IoError when the input root is unreadable; a run that
/// exhausts its retries returns status "failed".
PipelineManifest run_pipeline(const PipelineConfig& config);

/// Substitutes {frames_dir} / {model_dir} with single-quoted shell paths.
std::string expand_pose_command(const std::string& tmpl, const std::filesystem::path& frames_dir,
                                const std::filesystem::path& model_dir);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace prep
