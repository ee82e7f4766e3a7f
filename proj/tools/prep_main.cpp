// prep: turns extracted multi-camera frames into a cleaned, posed NeRF dataset.

#include "prep/config.hpp"
#include "prep/error.hpp"
#include "prep/image.hpp"
#include "prep/nerf_dataset.hpp"
#include "prep/pipeline.hpp"
#include "prep/quality_metrics.hpp"
#include "prep/sparse_model.hpp"
#include "prep/validate.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <fstream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kPipelineFailure = 3;
constexpr int kValidationFailure = 4;

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("prep");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* level = std::getenv("PREP_LOG")) {
        spdlog::set_level(spdlog::level::from_str(level));
    }
}

bool is_image(const fs::path& p) {
    std::string ext = p.extension().string();
    for (auto& c : ext) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<std::string> image_names(const fs::path& dir) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_image(entry.path())) {
            names.push_back(entry.path().filename().string());
        }
    }
    std::sort(names.begin(), names.end());
    return names;
}

nlohmann::ordered_json metric_line(const fs::path& a, const fs::path& b) {
    const prep::Image ia = prep::read_image(a);
    const prep::Image ib = prep::read_image(b);
    nlohmann::ordered_json j;
    j["a"] = a.string();
    j["b"] = b.string();
    const double p = prep::psnr(ia, ib);
    if (std::isinf(p)) {
        j["psnr_db"] = "inf";
    } else {
        j["psnr_db"] = p;
    }
    j["ssim"] = prep::ssim(ia, ib);
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();

    CLI::App app{"NeRF dataset preparation: sample, rotate, drop blurred and duplicate frames, pose, convert"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run the full pipeline");
    std::string config_file;
    run->add_option("--config", config_file, "Config file (flat key = value)")->required();
    std::optional<std::string> input_root, output_root, pose_cmd, rotation_map, flavor, filename_pattern,
        exclusion_list;
    std::optional<std::uint64_t> k;
    std::optional<double> h_b, h_b_step, min_pose_coverage;
    std::optional<int> h_s, max_retries;
    std::optional<unsigned> jobs;
    bool strict = false;
    run->add_option("--input-root,--input_root", input_root);
    run->add_option("--output-root,--output_root", output_root);
    run->add_option("--k", k, "Keep every k-th frame per video");
    run->add_option("--h-b,--h_b", h_b, "Blur threshold on the FM score");
    run->add_option("--h-b-step,--h_b_step", h_b_step, "h_b increment per retry");
    run->add_option("--h-s,--h_s", h_s, "Hamming radius for near duplicates");
    run->add_option("--rotation-map,--rotation_map", rotation_map, "Cameras to rotate, e.g. B,C");
    run->add_option("--pose-cmd,--pose_cmd", pose_cmd, "Estimator command with {frames_dir} and {model_dir}");
    run->add_option("--min-pose-coverage,--min_pose_coverage", min_pose_coverage);
    run->add_option("--max-retries,--max_retries", max_retries);
    run->add_option("--flavor", flavor, "blender | llff | both");
    run->add_option("--filename-pattern,--filename_pattern", filename_pattern);
    run->add_option("--exclusion-list,--exclusion_list", exclusion_list);
    run->add_option("--jobs", jobs);
    run->add_flag("--strict", strict, "Fail when a retained frame has no pose");

    // metrics
    auto* metrics = app.add_subcommand("metrics", "PSNR / SSIM between two images or two directories");
    std::string metric_a, metric_b;
    metrics->add_option("a", metric_a)->required();
    metrics->add_option("b", metric_b)->required();

    // validate
    auto* validate = app.add_subcommand("validate", "Re-check an emitted dataset");
    std::string dataset_dir;
    std::optional<std::string> validate_flavor;
    validate->add_option("dataset", dataset_dir)->required();
    validate->add_option("--flavor", validate_flavor, "blender | llff (default: whatever is present)");

    // convert
    auto* convert = app.add_subcommand("convert", "Convert a sparse model plus frames to a NeRF dataset");
    std::string model_dir, frames_dir, out_dir = "dataset", convert_flavor = "blender";
    bool convert_strict = false;
    convert->add_option("model_dir", model_dir)->required();
    convert->add_option("frames_dir", frames_dir)->required();
    convert->add_option("--out", out_dir, "Output directory");
    convert->add_option("--flavor", convert_flavor, "blender | llff | both");
    convert->add_flag("--strict", convert_strict);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) {
            prep::PipelineConfig config;
            {
                std::ifstream in(config_file);
                if (!in) {
                    throw prep::ConfigError("cannot open config " + config_file);
                }
                std::stringstream ss;
                ss << in.rdbuf();
                prep::apply_config(config, prep::parse_config_text(ss.str(), config_file),
                                   fs::path(config_file).parent_path());
            }
            prep::RawConfig overrides;
            auto set = [&](const char* key, const auto& value) {
                if (value) {
                    if constexpr (std::is_same_v<std::decay_t<decltype(*value)>, std::string>) {
                        overrides[key] = *value;
                    } else {
                        std::ostringstream os;
                        os.precision(17);
                        os << *value;
                        overrides[key] = os.str();
                    }
                }
            };
            set("input_root", input_root);
            set("output_root", output_root);
            set("k", k);
            set("h_b", h_b);
            set("h_b_step", h_b_step);
            set("h_s", h_s);
            set("rotation_map", rotation_map);
            set("pose_cmd", pose_cmd);
            set("min_pose_coverage", min_pose_coverage);
            set("max_retries", max_retries);
            set("flavor", flavor);
            set("filename_pattern", filename_pattern);
            set("exclusion_list", exclusion_list);
            set("jobs", jobs);
            if (strict) {
                overrides["strict"] = "true";
            }
            prep::apply_config(config, overrides);
            config.validate();

            const auto manifest = prep::run_pipeline(config);
            std::cout << (config.output_root / "manifest.json").string() << "\n";
            if (manifest.status == "nothing_to_do") {
                std::cout << "nothing to do\n";
            }
            return manifest.status == "failed" ? kPipelineFailure : kOk;
        }

        if (*metrics) {
            const fs::path a(metric_a), b(metric_b);
            if (fs::is_directory(a) && fs::is_directory(b)) {
                for (const auto& name : image_names(a)) {
                    if (fs::exists(b / name)) {
                        std::cout << metric_line(a / name, b / name).dump() << "\n";
                    } else {
                        spdlog::warn("{} has no counterpart in {}", name, b.string());
                    }
                }
            } else {
                std::cout << metric_line(a, b).dump() << "\n";
            }
            return kOk;
        }

        if (*validate) {
            std::optional<prep::DatasetFlavor> f;
            if (validate_flavor) {
                f = prep::parse_flavor(*validate_flavor) == prep::FlavorSelection::llff
                        ? prep::DatasetFlavor::llff
                        : prep::DatasetFlavor::blender_transforms;
            }
            const auto report = prep::validate_dataset(dataset_dir, f);
            nlohmann::ordered_json j;
            j["dataset"] = dataset_dir;
            j["pass"] = report.pass;
            j["violations"] = report.violations;
            std::cout << j.dump() << "\n";
            return report.pass ? kOk : kValidationFailure;
        }

        if (*convert) {
            const auto located = prep::load_sparse_model(model_dir);
            prep::EmitOptions options;
            options.retained = image_names(frames_dir);
            options.strict = convert_strict;
            const auto selection = prep::parse_flavor(convert_flavor);
            fs::create_directories(fs::path(out_dir) / options.image_dir);
            for (const auto& name : options.retained) {
                if (located.model.find_image(name)) {
                    fs::copy_file(fs::path(frames_dir) / name, fs::path(out_dir) / options.image_dir / name,
                                  fs::copy_options::overwrite_existing);
                }
            }
            std::vector<std::string> missing;
            if (selection != prep::FlavorSelection::llff) {
                const auto ds = prep::emit_transforms_json(located.model, out_dir, options);
                std::cout << ds.file.string() << "\n";
                missing = ds.pose_missing;
            }
            if (selection != prep::FlavorSelection::blender) {
                const auto ds = prep::emit_llff(located.model, out_dir, options);
                std::cout << ds.file.string() << "\n";
                missing = ds.pose_missing;
            }
            for (const auto& name : missing) {
                spdlog::warn("pose_missing: {}", name);
            }
            return kOk;
        }
    } catch (const prep::ConfigError& e) {
        spdlog::error("config: {}", e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kPipelineFailure;
    }
    return kOk;
}
