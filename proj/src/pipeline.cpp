#include "prep/pipeline.hpp"

#include "prep/blur_filter.hpp"
#include "prep/error.hpp"
#include "prep/near_dup.hpp"
#include "prep/nerf_dataset.hpp"
#include "prep/sparse_model.hpp"

#include <spdlog/spdlog.h>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

namespace prep {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string expand_pose_command(const std::string& tmpl, const fs::path& frames_dir, const fs::path& model_dir) {
    auto quote = [](const fs::path& p) {
        std::string out = "'";
        for (const char c : p.string()) {
            if (c == '\'') {
                out += "'\\''";
            } else {
                out += c;
            }
        }
        return out + "'";
    };
    std::string out = tmpl;
    for (const auto& [key, value] : {std::pair{std::string("{frames_dir}"), quote(frames_dir)},
                                     std::pair{std::string("{model_dir}"), quote(model_dir)}}) {
        for (std::size_t pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + value.size())) {
            out.replace(pos, key.size(), value);
        }
    }
    return out;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string hash_hex(std::uint64_t bits) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(bits));
    return buf;
}

json config_json(const PipelineConfig& c) {
    json j;
    j["input_root"] = c.input_root.string();
    j["output_root"] = c.output_root.string();
    j["k"] = c.k;
    j["h_b"] = c.h_b;
    j["h_b_step"] = c.h_b_step;
    j["h_s"] = c.h_s;
    j["rotation_map"] = c.rotation_map.str();
    j["pose_cmd"] = c.pose_cmd;
    j["min_pose_coverage"] = c.min_pose_coverage;
    j["max_retries"] = c.max_retries;
    j["flavor"] = to_string(c.flavor);
    j["strict"] = c.strict;
    j["filename_pattern"] = c.filename_pattern;
    j["exclusion_list"] = c.exclusion_list.string();
    return j;
}

std::string frame_file_name(const Frame& f) {
    if (!f.source_path().empty()) {
        return f.source_path().filename().string();
    }
    return f.id().camera_id + "_" + f.id().video_id + "_" + std::to_string(f.id().index) + ".png";
}

/// Materializes frames for the external estimator: untouched sources are copied
/// byte for byte, rotated or in-memory frames are re-encoded.
void stage_frames(const FrameSet& frames, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& f : frames.frames) {
        const fs::path target = dir / frame_file_name(f);
        if (!f.rotated() && !f.source_path().empty() && fs::exists(f.source_path())) {
            fs::copy_file(f.source_path(), target, fs::copy_options::overwrite_existing);
        } else {
            write_image(target, *f.pixels());
        }
    }
}

int run_command(const std::string& command, const fs::path& log) {
    const std::string wrapped = "( " + command + " ) > '" + log.string() + "' 2>&1";
    spdlog::debug("running: {}", command);
    const int rc = std::system(wrapped.c_str());
    if (rc == -1) {
        return -1;
    }
    if (WIFEXITED(rc)) {
        return WEXITSTATUS(rc);
    }
    return 128 + (WIFSIGNALED(rc) ? WTERMSIG(rc) : 0);
}

json skipped_json(const std::vector<SkippedSource>& skipped) {
    json arr = json::array();
    for (const auto& s : skipped) {
        json e;
        e["file"] = s.path.filename().string();
        e["reason"] = s.reason;
        if (!s.detail.empty()) {
            e["detail"] = s.detail;
        }
        arr.push_back(std::move(e));
    }
    return arr;
}

json stage_json(std::size_t in, std::size_t kept) {
    json j;
    j["input"] = in;
    j["kept"] = kept;
    j["removed"] = in - kept;
    return j;
}

void write_outputs(PipelineManifest& m, const PipelineConfig& config, json timings) {
    // the hash covers everything except wall-clock data
    std::string canonical = m.document.dump();
    for (const auto& r : m.frame_records) {
        canonical += '\n';
        canonical += r.dump();
    }
    m.determinism_hash = fnv1a_hex(canonical);
    m.document["determinism_hash"] = m.determinism_hash;
    m.document["timings"] = std::move(timings);

    fs::create_directories(config.output_root);
    {
        std::ofstream out(config.output_root / "manifest.json", std::ios::trunc);
        if (!out) {
            throw IoError("cannot write manifest under " + config.output_root.string());
        }
        out << m.document.dump(2) << '\n';
    }
    std::ofstream out(config.output_root / "frames.jsonl", std::ios::trunc);
    for (const auto& r : m.frame_records) {
        out << r.dump() << '\n';
    }
}

}  // namespace

PipelineManifest run_pipeline(const PipelineConfig& config) {
    config.validate();
    PipelineManifest m;
    json timings;
    json attempt_timings = json::array();

    auto t0 = Clock::now();
    IngestOptions ingest;
    ingest.filename_pattern = config.filename_pattern;
    ingest.jobs = config.jobs;
    if (!config.exclusion_list.empty()) {
        ingest.exclusions = read_exclusion_list(config.exclusion_list);
    }
    const SourceScan scan = enumerate_sources(config.input_root, ingest);
    timings["enumerate"] = seconds_since(t0);
    m.raw = scan.frames.size();
    spdlog::info("enumerated {} frame(s), {} skipped", m.raw, scan.skipped.size());

    m.document["config"] = config_json(config);
    m.document["stage_order"] = {"enumerate", "subsample", "rotate", "blur_filter", "dedup", "pose_estimation",
                                 "convert"};
    json sources;
    sources["files_seen"] = scan.files_seen;
    sources["frames"] = m.raw;
    sources["skipped"] = skipped_json(scan.skipped);
    m.document["sources"] = std::move(sources);

    // prepare the output tree; only directories this tool owns are cleared
    fs::create_directories(config.output_root);
    fs::remove_all(config.output_root / "attempts");
    fs::remove_all(config.output_root / "dataset");

    if (scan.frames.empty()) {
        m.status = "nothing_to_do";
        m.document["status"] = m.status;
        m.document["counts"] = {{"raw", 0}, {"sampled", 0}, {"deblurred", 0}, {"deduped", 0}, {"posed", 0}};
        m.document["rotated"] = json::array();
        m.document["attempts"] = json::array();
        write_outputs(m, config, std::move(timings));
        spdlog::info("no frames found under {}; nothing to do", config.input_root.string());
        return m;
    }

    t0 = Clock::now();
    const FrameSet sampled = subsample(scan.frames, config.k);
    timings["subsample"] = seconds_since(t0);
    m.sampled = sampled.size();

    t0 = Clock::now();
    const RotationResult rotation = apply_rotation_map(sampled, config.rotation_map);
    timings["rotate"] = seconds_since(t0);
    json rotated = json::array();
    for (const auto& id : rotation.rotated) {
        rotated.push_back(id.str());
    }
    m.document["rotated"] = std::move(rotated);
    const std::set<FrameId> rotated_ids(rotation.rotated.begin(), rotation.rotated.end());
    const std::set<FrameId> sampled_ids = [&] {
        std::set<FrameId> s;
        for (const auto& f : sampled.frames) {
            s.insert(f.id());
        }
        return s;
    }();

    json attempts = json::array();
    json final_counts;
    bool success = false;
    std::string failure;
    const int max_attempts = 1 + config.max_retries;
    for (int attempt = 1; attempt <= max_attempts && !success; ++attempt) {
        json at;
        AttemptRecord rec;
        rec.attempt = attempt;
        rec.h_b = config.h_b + (attempt - 1) * config.h_b_step;
        rec.sampled = rotation.frames.size();
        spdlog::info("attempt {} with h_b = {}", attempt, rec.h_b);

        std::map<FrameId, json> records;
        for (const auto& f : scan.frames.frames) {
            json r;
            r["attempt"] = attempt;
            r["frame"] = f.id().str();
            r["file"] = f.source_path().filename().string();
            r["rotated"] = rotated_ids.contains(f.id());
            r["disposition"] = sampled_ids.contains(f.id()) ? "pending" : "subsampled_out";
            records.emplace(f.id(), std::move(r));
        }

        t0 = Clock::now();
        const BlurFilterResult blur = filter_blurred(rotation.frames, rec.h_b, config.jobs);
        at["blur_filter"] = seconds_since(t0);
        for (const auto& rep : blur.reports) {
            auto& r = records.at(rep.frame);
            r["fm_score"] = rep.fm_score;
            r["lap_var"] = rep.lap_var;
            r["h_b"] = rep.h_b;
            r["blur_decision"] = to_string(rep.decision);
            if (rep.decision == BlurDecision::remove) {
                r["disposition"] = "blurred";
            }
        }
        rec.deblurred = blur.kept.size();

        t0 = Clock::now();
        const auto hashes = hash_frames(blur.kept, config.jobs);
        const auto clusters = cluster_hashes(hashes, config.h_s);
        const FrameSet deduped = reduce_duplicates(blur.kept, clusters);
        at["dedup"] = seconds_since(t0);
        for (const auto& h : hashes) {
            records.at(h.frame)["phash"] = hash_hex(h.bits);
        }
        json cluster_json = json::array();
        for (const auto& c : clusters) {
            json cj;
            cj["representative"] = c.representative.str();
            json members = json::array();
            for (const auto& mem : c.members) {
                members.push_back({{"frame", mem.frame.str()}, {"distance", mem.distance}});
                auto& r = records.at(mem.frame);
                r["disposition"] = "duplicate";
                r["representative"] = c.representative.str();
                r["distance"] = mem.distance;
            }
            cj["members"] = std::move(members);
            cluster_json.push_back(std::move(cj));
        }
        rec.deduped = deduped.size();
        for (const auto& f : deduped.frames) {
            records.at(f.id())["disposition"] = "kept";
        }

        at["attempt"] = attempt;
        json stages;
        stages["blur_filter"] = stage_json(rec.sampled, rec.deblurred);
        stages["dedup"] = stage_json(rec.deblurred, rec.deduped);

        std::vector<std::string> retained;
        std::optional<SparseModel> model;
        if (deduped.empty()) {
            rec.status = "no_frames";
        } else {
            const fs::path attempt_dir = config.output_root / "attempts" / std::to_string(attempt);
            const fs::path frames_dir = attempt_dir / "images";
            const fs::path model_dir = attempt_dir / "sparse";
            stage_frames(deduped, frames_dir);
            fs::create_directories(model_dir);
            for (const auto& f : deduped.frames) {
                retained.push_back(frame_file_name(f));
            }

            t0 = Clock::now();
            rec.pose_exit_code = run_command(expand_pose_command(config.pose_cmd, fs::absolute(frames_dir),
                                                                 fs::absolute(model_dir)),
                                             attempt_dir / "pose_cmd.log");
            at["pose_estimation"] = seconds_since(t0);
            if (rec.pose_exit_code != 0) {
                rec.status = "pose_cmd_failed";
                spdlog::warn("pose command exited with {}", rec.pose_exit_code);
            } else {
                try {
                    LocatedModel located = load_sparse_model(model_dir);
                    for (const auto& ignored : located.ignored_components) {
                        spdlog::warn("ignoring smaller reconstruction component {}", ignored.string());
                    }
                    model = std::move(located.model);
                } catch (const std::exception& e) {
                    rec.status = "model_unreadable";
                    spdlog::warn("cannot read sparse model: {}", e.what());
                }
            }
            if (model) {
                std::map<std::string, FrameId> by_name;
                for (const auto& f : deduped.frames) {
                    by_name.emplace(frame_file_name(f), f.id());
                }
                for (const auto& name : retained) {
                    auto& r = records.at(by_name.at(name));
                    if (model->find_image(name)) {
                        ++rec.posed;
                        r["disposition"] = "posed";
                    } else {
                        r["disposition"] = "pose_missing";
                    }
                }
                rec.coverage = static_cast<double>(rec.posed) / static_cast<double>(rec.deduped);
                rec.status = rec.coverage >= config.min_pose_coverage ? "ok" : "low_coverage";
                if (rec.status == "low_coverage") {
                    spdlog::warn("pose coverage {:.3f} below {:.3f}", rec.coverage, config.min_pose_coverage);
                }
            }
        }

        at["h_b"] = rec.h_b;
        at["status"] = rec.status;
        at["pose_exit_code"] = rec.pose_exit_code;
        at["counts"] = {{"sampled", rec.sampled},
                        {"deblurred", rec.deblurred},
                        {"deduped", rec.deduped},
                        {"posed", rec.posed}};
        at["coverage"] = rec.coverage;
        at["stages"] = std::move(stages);
        at["clusters"] = std::move(cluster_json);
        for (auto& [id, r] : records) {
            m.frame_records.push_back(std::move(r));
        }

        if (rec.status == "ok") {
            t0 = Clock::now();
            const fs::path dataset_dir = config.output_root / "dataset";
            const fs::path frames_dir = config.output_root / "attempts" / std::to_string(attempt) / "images";
            EmitOptions options;
            options.retained = retained;
            options.strict = config.strict;
            json outputs;
            try {
                fs::create_directories(dataset_dir / "images");
                for (const auto& name : retained) {
                    if (model->find_image(name)) {
                        fs::copy_file(frames_dir / name, dataset_dir / "images" / name,
                                      fs::copy_options::overwrite_existing);
                    }
                }
                std::vector<std::string> missing;
                if (config.flavor != FlavorSelection::llff) {
                    const auto ds = emit_transforms_json(*model, dataset_dir, options);
                    outputs["transforms_json"] = ds.file.string();
                    m.outputs.push_back(ds.file);
                    missing = ds.pose_missing;
                }
                if (config.flavor != FlavorSelection::blender) {
                    const auto ds = emit_llff(*model, dataset_dir, options);
                    outputs["poses_bounds"] = ds.file.string();
                    m.outputs.push_back(ds.file);
                    missing = ds.pose_missing;
                }
                m.pose_missing = missing;
                outputs["pose_missing"] = missing;
                success = true;
            } catch (const std::exception& e) {
                rec.status = "convert_failed";
                at["status"] = rec.status;
                failure = e.what();
                outputs["error"] = failure;
                spdlog::error("conversion failed: {}", failure);
            }
            at["convert"] = seconds_since(t0);
            m.document["outputs"] = std::move(outputs);
        }
        json t{{"attempt", attempt}};
        for (const char* key : {"blur_filter", "dedup", "pose_estimation", "convert"}) {
            if (at.contains(key)) {
                t[key] = at[key];
                at.erase(key);
            }
        }
        attempt_timings.push_back(std::move(t));

        final_counts = {{"raw", m.raw},
                        {"sampled", m.sampled},
                        {"deblurred", rec.deblurred},
                        {"deduped", rec.deduped},
                        {"posed", rec.posed}};
        attempts.push_back(std::move(at));
        m.attempts.push_back(rec);

        if (rec.status == "no_frames" || rec.status == "convert_failed") {
            // raising h_b can only remove more frames; a failed conversion is not a coverage problem
            failure = failure.empty() ? "no frames left after filtering" : failure;
            break;
        }
    }

    m.status = success ? "ok" : "failed";
    if (!success && failure.empty()) {
        failure = "pose estimation did not reach the required coverage after " +
                  std::to_string(m.attempts.size()) + " attempt(s)";
    }
    m.document["status"] = m.status;
    if (!success) {
        m.document["error"] = failure;
    }
    m.document["counts"] = std::move(final_counts);
    m.document["attempts"] = std::move(attempts);
    timings["attempts"] = std::move(attempt_timings);
    write_outputs(m, config, std::move(timings));
    if (success) {
        spdlog::info("done: {} -> {} -> {} -> {} frame(s)", m.raw, m.sampled, m.attempts.back().deblurred,
                     m.attempts.back().deduped);
    } else {
        spdlog::error("pipeline failed: {}", failure);
    }
    return m;
}

}  // namespace prep
