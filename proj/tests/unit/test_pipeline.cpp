#include "prep/error.hpp"
#include "prep/pipeline.hpp"
#include "prep/validate.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

#ifndef PREP_STUB_ESTIMATOR
#error "PREP_STUB_ESTIMATOR must point at the stub estimator binary"
#endif

namespace {

std::string stub(const std::string& flags = "") {
    std::string cmd = std::string("'") + PREP_STUB_ESTIMATOR + "'";
    if (!flags.empty()) {
        cmd += " " + flags;
    }
    return cmd + " {frames_dir} {model_dir}";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Pipeline : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        root_ = synth::scratch_dir("pipeline_corpus");
        synth::CorpusSpec spec;
        spec.width = 192;
        spec.height = 144;
        spec.total = 24;
        spec.blurred = 3;
        spec.near_duplicates = 4;
        spec.seed = 11;
        corpus_ = synth::write_corpus(root_ / "frames", spec);
        h_b_ = synth::calibrate_h_b(root_ / "frames", corpus_);
    }

    prep::PipelineConfig config(const std::string& out, const std::string& pose_cmd = stub()) const {
        prep::PipelineConfig c;
        c.input_root = root_ / "frames";
        c.output_root = root_ / out;
        c.k = 1;
        c.h_b = h_b_;
        c.h_s = 10;
        c.pose_cmd = pose_cmd;
        c.flavor = prep::FlavorSelection::both;
        return c;
    }

    std::set<std::string> files_of(synth::CorpusFrame::Kind kind) const {
        std::set<std::string> out;
        for (const auto& f : corpus_) {
            if (f.kind == kind) {
                out.insert(f.file);
            }
        }
        return out;
    }

    static inline fs::path root_;
    static inline std::vector<synth::CorpusFrame> corpus_;
    static inline double h_b_ = 0.0;
};

TEST_F(Pipeline, RemovesExactlyTheInjectedFrames) {
    const auto m = prep::run_pipeline(config("out_basic"));
    ASSERT_EQ(m.status, "ok");
    ASSERT_EQ(m.attempts.size(), 1u);
    EXPECT_EQ(m.raw, 24u);
    EXPECT_EQ(m.sampled, 24u);
    EXPECT_EQ(m.attempts[0].deblurred, 21u);
    EXPECT_EQ(m.attempts[0].deduped, 17u);
    EXPECT_EQ(m.attempts[0].posed, 17u);
    EXPECT_DOUBLE_EQ(m.attempts[0].coverage, 1.0);

    std::set<std::string> blurred;
    std::set<std::string> duplicates;
    for (const auto& r : m.frame_records) {
        const std::string d = r["disposition"];
        if (d == "blurred") {
            blurred.insert(r["file"].get<std::string>());
        } else if (d == "duplicate") {
            duplicates.insert(r["file"].get<std::string>());
        } else {
            EXPECT_EQ(d, "posed") << r.dump();
        }
    }
    EXPECT_EQ(blurred, files_of(synth::CorpusFrame::Kind::blurred));
    EXPECT_EQ(duplicates, files_of(synth::CorpusFrame::Kind::near_duplicate));

    EXPECT_EQ(m.outputs.size(), 2u);
    const auto report = prep::validate_dataset(root_ / "out_basic" / "dataset");
    EXPECT_TRUE(report.pass);
    for (const auto& v : report.violations) {
        ADD_FAILURE() << v;
    }
}

TEST_F(Pipeline, ManifestCountsTelescopeAndStagesAreOrdered) {
    const auto m = prep::run_pipeline(config("out_counts"));
    const json doc = json::parse(slurp(root_ / "out_counts" / "manifest.json"));
    const std::vector<std::string> order = doc["stage_order"];
    EXPECT_EQ(order, (std::vector<std::string>{"enumerate", "subsample", "rotate", "blur_filter", "dedup",
                                               "pose_estimation", "convert"}));
    const auto& counts = doc["counts"];
    EXPECT_EQ(counts["raw"], 24);
    EXPECT_EQ(counts["deblurred"], 21);
    EXPECT_EQ(counts["deduped"], 17);
    for (const auto& at : doc["attempts"]) {
        for (const char* stage : {"blur_filter", "dedup"}) {
            const auto& s = at["stages"][stage];
            EXPECT_EQ(s["input"].get<int>(), s["kept"].get<int>() + s["removed"].get<int>());
        }
        EXPECT_EQ(at["stages"]["blur_filter"]["kept"], at["stages"]["dedup"]["input"]);
    }
    EXPECT_TRUE(doc.contains("timings"));
    EXPECT_EQ(doc["determinism_hash"], m.determinism_hash);

    // every input frame appears exactly once per attempt in frames.jsonl
    std::map<int, std::multiset<std::string>> per_attempt;
    std::istringstream lines(slurp(root_ / "out_counts" / "frames.jsonl"));
    for (std::string line; std::getline(lines, line);) {
        const json r = json::parse(line);
        per_attempt[r["attempt"].get<int>()].insert(r["frame"].get<std::string>());
    }
    ASSERT_EQ(per_attempt.size(), 1u);
    const auto& frames = per_attempt.begin()->second;
    EXPECT_EQ(frames.size(), 24u);
    EXPECT_EQ(std::set<std::string>(frames.begin(), frames.end()).size(), 24u);
}

TEST_F(Pipeline, IdenticalRunsGiveIdenticalHashes) {
    const auto a = prep::run_pipeline(config("out_det"));
    const std::string frames_a = slurp(root_ / "out_det" / "frames.jsonl");
    json doc_a = json::parse(slurp(root_ / "out_det" / "manifest.json"));
    const auto b = prep::run_pipeline(config("out_det"));
    const std::string frames_b = slurp(root_ / "out_det" / "frames.jsonl");
    json doc_b = json::parse(slurp(root_ / "out_det" / "manifest.json"));

    EXPECT_EQ(a.determinism_hash, b.determinism_hash);
    EXPECT_EQ(frames_a, frames_b);
    doc_a.erase("timings");
    doc_b.erase("timings");
    EXPECT_EQ(doc_a.dump(), doc_b.dump());

    // worker count is not part of the result
    auto parallel = config("out_det");
    parallel.jobs = 3;
    EXPECT_EQ(prep::run_pipeline(parallel).determinism_hash, a.determinism_hash);

    // but a changed threshold is
    auto other = config("out_det");
    other.h_s = 0;
    EXPECT_NE(prep::run_pipeline(other).determinism_hash, a.determinism_hash);
}

TEST_F(Pipeline, LowCoverageTriggersOneEscalatedRetry) {
    auto c = config("out_retry", stub("--coverage 0.5"));
    c.min_pose_coverage = 0.8;
    c.max_retries = 1;
    const auto m = prep::run_pipeline(c);
    EXPECT_EQ(m.status, "failed");
    ASSERT_EQ(m.attempts.size(), 2u);
    EXPECT_DOUBLE_EQ(m.attempts[0].h_b, c.h_b);
    EXPECT_DOUBLE_EQ(m.attempts[1].h_b, c.h_b + c.h_b_step);
    for (const auto& a : m.attempts) {
        EXPECT_EQ(a.status, "low_coverage");
        EXPECT_LT(a.coverage, 0.8);
    }
    // the manifest still records every attempt
    const json doc = json::parse(slurp(root_ / "out_retry" / "manifest.json"));
    EXPECT_EQ(doc["attempts"].size(), 2u);
    EXPECT_EQ(doc["status"], "failed");
    EXPECT_TRUE(doc.contains("error"));
    EXPECT_FALSE(fs::exists(root_ / "out_retry" / "dataset" / "transforms.json"));
}

TEST_F(Pipeline, RetryCanRecover) {
    const fs::path state = root_ / "retry_state";
    fs::remove(state);
    auto c = config("out_recover", stub("--first-coverage 0.5 --state '" + state.string() + "'"));
    c.min_pose_coverage = 0.8;
    c.max_retries = 3;
    const auto m = prep::run_pipeline(c);
    EXPECT_EQ(m.status, "ok");
    ASSERT_EQ(m.attempts.size(), 2u);
    EXPECT_EQ(m.attempts[0].status, "low_coverage");
    EXPECT_EQ(m.attempts[1].status, "ok");
    EXPECT_GT(m.attempts[1].h_b, m.attempts[0].h_b);
}

TEST_F(Pipeline, ThresholdsIncreaseMonotonically) {
    auto c = config("out_mono", stub("--coverage 0.5"));
    c.max_retries = 4;
    c.h_b_step = 0.05 * h_b_;
    const auto m = prep::run_pipeline(c);
    ASSERT_EQ(m.attempts.size(), 5u);
    for (std::size_t i = 1; i < m.attempts.size(); ++i) {
        EXPECT_GT(m.attempts[i].h_b, m.attempts[i - 1].h_b);
        EXPECT_LE(m.attempts[i].deblurred, m.attempts[i - 1].deblurred);
    }
}

TEST_F(Pipeline, FailingEstimatorIsRecordedPerAttempt) {
    auto c = config("out_fail", stub("--fail"));
    c.max_retries = 2;
    const auto m = prep::run_pipeline(c);
    EXPECT_EQ(m.status, "failed");
    ASSERT_EQ(m.attempts.size(), 3u);
    for (const auto& a : m.attempts) {
        EXPECT_EQ(a.status, "pose_cmd_failed");
        EXPECT_EQ(a.pose_exit_code, 1);
    }
}

TEST_F(Pipeline, UnreadableModelIsAFailedAttempt) {
    auto c = config("out_nomodel", "true {frames_dir} {model_dir}");
    c.max_retries = 0;
    const auto m = prep::run_pipeline(c);
    EXPECT_EQ(m.status, "failed");
    ASSERT_EQ(m.attempts.size(), 1u);
    EXPECT_EQ(m.attempts[0].status, "model_unreadable");
}

TEST_F(Pipeline, SubsampleAndRotationAreRecorded) {
    auto c = config("out_rot");
    c.k = 2;
    c.rotation_map = prep::RotationMap::parse("B");
    c.flavor = prep::FlavorSelection::blender;
    const auto m = prep::run_pipeline(c);
    EXPECT_EQ(m.sampled, 12u);
    const json doc = json::parse(slurp(root_ / "out_rot" / "manifest.json"));
    for (const auto& id : doc["rotated"]) {
        EXPECT_EQ(id.get<std::string>().rfind("B", 0), 0u) << id;
    }
    EXPECT_FALSE(doc["rotated"].empty());
    std::size_t subsampled_out = 0;
    for (const auto& r : m.frame_records) {
        if (r["disposition"] == "subsampled_out") {
            ++subsampled_out;
            EXPECT_FALSE(r.contains("fm_score"));
        }
    }
    EXPECT_EQ(subsampled_out, 12u);
    EXPECT_TRUE(prep::validate_dataset(root_ / "out_rot" / "dataset").pass);
}

TEST(PipelineEmpty, NothingToDoWithoutCallingTheEstimator) {
    const fs::path dir = synth::scratch_dir("pipeline_empty");
    fs::create_directories(dir / "in");
    const fs::path marker = dir / "called";
    prep::PipelineConfig c;
    c.input_root = dir / "in";
    c.output_root = dir / "out";
    c.k = 1;
    c.h_b = 0.1;
    c.pose_cmd = "touch '" + marker.string() + "' # {frames_dir} {model_dir}";
    const auto m = prep::run_pipeline(c);
    EXPECT_EQ(m.status, "nothing_to_do");
    EXPECT_EQ(m.raw, 0u);
    EXPECT_TRUE(m.attempts.empty());
    EXPECT_FALSE(fs::exists(marker));
    const json doc = json::parse(slurp(dir / "out" / "manifest.json"));
    for (const auto& [key, value] : doc["counts"].items()) {
        EXPECT_EQ(value, 0) << key;
    }
}

TEST(PipelineEmpty, MissingInputRootAndBadConfig) {
    const fs::path dir = synth::scratch_dir("pipeline_missing");
    prep::PipelineConfig c;
    c.input_root = dir / "nope";
    c.output_root = dir / "out";
    c.k = 1;
    c.h_b = 0.1;
    c.pose_cmd = "x {frames_dir} {model_dir}";
    EXPECT_THROW(prep::run_pipeline(c), prep::IoError);
    c.pose_cmd = "x";
    EXPECT_THROW(prep::run_pipeline(c), prep::ConfigError);
}

TEST(PoseCommand, PlaceholdersAreQuoted) {
    EXPECT_EQ(prep::expand_pose_command("est {frames_dir} -o {model_dir} {frames_dir}", "/a b", "/m"),
              "est '/a b' -o '/m' '/a b'");
    EXPECT_EQ(prep::expand_pose_command("e {frames_dir} {model_dir}", "/it's", "/m"), "e '/it'\\''s' '/m'");
}

TEST(PoseCommand, Fnv1aReferenceVectors) {
    EXPECT_EQ(prep::fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(prep::fnv1a_hex("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(prep::fnv1a_hex("foobar"), "85944171f73967e8");
}

}  // namespace
