// Stand-in for a structure-from-motion tool. Writes a sparse model for the
// frames in <frames_dir> to <model_dir>, either synthesized (cameras on an
// orbit around the origin) or filtered from a canned model.

#include "prep/image.hpp"
#include "prep/pose.hpp"
#include "prep/sparse_model.hpp"

#include <Eigen/Geometry>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>

namespace fs = std::filesystem;

namespace {

std::vector<std::string> frame_names(const fs::path& dir) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") {
            names.push_back(entry.path().filename().string());
        }
    }
    std::sort(names.begin(), names.end());
    return names;
}

prep::SparseModel orbit_model(const std::vector<std::string>& names, std::uint64_t width, std::uint64_t height) {
    prep::SparseModel model;
    prep::CameraIntrinsics cam;
    cam.camera_id = 1;
    cam.model = prep::CameraModel::PINHOLE;
    cam.width = width;
    cam.height = height;
    const double f = 0.8 * static_cast<double>(width);
    cam.params = {f, f, width / 2.0, height / 2.0};
    model.cameras[1] = cam;

    const std::size_t n = names.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        const prep::Vec3 center(4.0 * std::cos(theta), 0.5, 4.0 * std::sin(theta));
        const prep::Vec3 z = (-center).normalized();
        const prep::Vec3 x = prep::Vec3(0.0, 1.0, 0.0).cross(z).normalized();
        const prep::Vec3 y = z.cross(x);
        prep::Mat3 r;
        r.row(0) = x;
        r.row(1) = y;
        r.row(2) = z;
        const prep::Vec3 t = -r * center;

        prep::ImagePose pose;
        pose.image_id = static_cast<std::uint32_t>(i + 1);
        pose.q = prep::rotmat_to_quat(r);
        pose.t = {t.x(), t.y(), t.z()};
        pose.camera_id = 1;
        pose.name = names[i];
        model.images[pose.image_id] = pose;
    }

    std::uint64_t id = 1;
    for (int a = -2; a <= 2; ++a) {
        for (int b = -2; b <= 2; ++b) {
            for (int c = -2; c <= 2; ++c) {
                prep::Point3D p;
                p.id = id;
                p.xyz = {0.5 * a, 0.5 * b, 0.5 * c};
                p.rgb = {128, 128, 128};
                for (const auto& [image_id, pose] : model.images) {
                    p.track.push_back({image_id, static_cast<std::uint32_t>(id - 1)});
                }
                model.points[id++] = p;
            }
        }
    }
    return model;
}

// Drops images not in `keep` and the track entries that referenced them.
prep::SparseModel restrict_to(prep::SparseModel model, const std::set<std::string>& keep) {
    std::set<std::uint32_t> dropped;
    for (auto it = model.images.begin(); it != model.images.end();) {
        if (!keep.contains(it->second.name)) {
            dropped.insert(it->first);
            it = model.images.erase(it);
        } else {
            ++it;
        }
    }
    for (auto it = model.points.begin(); it != model.points.end();) {
        auto& track = it->second.track;
        std::erase_if(track, [&](const prep::TrackElement& e) { return dropped.contains(e.image_id); });
        it = track.empty() ? model.points.erase(it) : std::next(it);
    }
    return model;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stub pose estimator"};
    std::string frames_dir, model_dir;
    double coverage = 1.0;
    std::optional<double> first_coverage;
    std::string state_file;
    std::string canned;
    bool binary = false;
    bool fail = false;
    app.add_option("frames_dir", frames_dir)->required();
    app.add_option("model_dir", model_dir)->required();
    app.add_option("--coverage", coverage, "Fraction of frames to register")->check(CLI::Range(0.0, 1.0));
    app.add_option("--first-coverage", first_coverage, "Coverage used when --state does not exist yet");
    app.add_option("--state", state_file, "Marker file created on the first call");
    app.add_option("--canned", canned, "Existing model to filter instead of synthesizing");
    app.add_flag("--binary", binary, "Write the binary encoding");
    app.add_flag("--fail", fail, "Exit with status 1 without writing anything");
    CLI11_PARSE(app, argc, argv);

    if (fail) {
        std::cerr << "stub estimator: failing on request\n";
        return 1;
    }
    if (first_coverage && !state_file.empty() && !fs::exists(state_file)) {
        std::ofstream(state_file) << "called\n";
        coverage = *first_coverage;
    }

    try {
        const auto names = frame_names(frames_dir);
        const auto n_keep = static_cast<std::size_t>(std::lround(coverage * static_cast<double>(names.size())));
        const std::set<std::string> keep(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(n_keep));

        prep::SparseModel model;
        if (!canned.empty()) {
            model = prep::load_sparse_model(canned).model;
        } else if (!names.empty()) {
            const prep::Image first = prep::read_image(fs::path(frames_dir) / names.front());
            model = orbit_model(names, first.width, first.height);
        }
        model = restrict_to(std::move(model), keep);

        fs::create_directories(model_dir);
        if (binary) {
            prep::write_colmap_binary(model, model_dir);
        } else {
            prep::write_colmap_text(model, model_dir);
        }
        std::cerr << "stub estimator: registered " << model.images.size() << " of " << names.size() << " frames\n";
    } catch (const std::exception& e) {
        std::cerr << "stub estimator: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
