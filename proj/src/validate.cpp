#include "prep/validate.hpp"

#include "prep/pose.hpp"

#include <cmath>
#include <numbers>

namespace prep {

namespace fs = std::filesystem;

namespace {

constexpr double kTolerance = 1e-6;

void check_rotation(const NerfFrame& frame, std::size_t index, ValidationReport& report) {
    const RotationError err = rotation_error(frame.c2w);
    if (!(err.orthonormality <= kTolerance) || !(err.determinant <= kTolerance)) {
        report.violations.push_back("non-orthonormal rotation in frame " + std::to_string(index) + " (" +
                                    frame.name + ")");
    }
}

bool image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    for (auto& c : ext) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

void check_blender(const fs::path& dir, ValidationReport& report) {
    NerfDataset ds;
    try {
        ds = read_transforms_json(dir / "transforms.json");
    } catch (const std::exception& e) {
        report.violations.push_back(std::string("unreadable transforms.json: ") + e.what());
        return;
    }
    if (!(ds.intrinsics.camera_angle_x > 0.0 && ds.intrinsics.camera_angle_x < std::numbers::pi)) {
        report.violations.push_back("camera_angle_x out of range");
    }
    if (ds.frames.empty()) {
        report.violations.push_back("no frames");
    }
    for (std::size_t i = 0; i < ds.frames.size(); ++i) {
        const auto& f = ds.frames[i];
        const Eigen::RowVector4d last = f.c2w.row(3);
        if ((last - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > kTolerance) {
            report.violations.push_back("bad homogeneous row in frame " + std::to_string(i));
        }
        check_rotation(f, i, report);
        if (!fs::exists(dir / f.file_path)) {
            report.violations.push_back("missing file: " + f.file_path);
        }
    }
}

void check_llff(const fs::path& dir, ValidationReport& report) {
    NerfDataset ds;
    try {
        ds = read_poses_bounds(dir / "poses_bounds.npy");
    } catch (const std::exception& e) {
        report.violations.push_back(std::string("unreadable poses_bounds.npy: ") + e.what());
        return;
    }
    if (ds.frames.empty()) {
        report.violations.push_back("no frames");
    }
    for (std::size_t i = 0; i < ds.frames.size(); ++i) {
        const auto& f = ds.frames[i];
        check_rotation(f, i, report);
        if (!(f.bounds->near > 0.0) || !(f.bounds->far > f.bounds->near)) {
            report.violations.push_back("non-positive bounds in frame " + std::to_string(i));
        }
        if (!(f.hwf[0] > 0.0 && f.hwf[1] > 0.0 && f.hwf[2] > 0.0)) {
            report.violations.push_back("non-positive H/W/focal in frame " + std::to_string(i));
        }
    }
    // LLFF pairs rows with the sorted image list, so counts must agree
    std::size_t images = 0;
    std::error_code ec;
    for (fs::directory_iterator it(dir / "images", ec), end; !ec && it != end; it.increment(ec)) {
        if (it->is_regular_file() && image_file(it->path())) {
            ++images;
        }
    }
    if (images < ds.frames.size()) {
        report.violations.push_back("missing file: images/ holds " + std::to_string(images) + " image(s) for " +
                                    std::to_string(ds.frames.size()) + " pose row(s)");
    } else if (images > ds.frames.size()) {
        report.violations.push_back("image count mismatch: " + std::to_string(images) + " image(s) for " +
                                    std::to_string(ds.frames.size()) + " pose row(s)");
    }
}

}  // namespace

ValidationReport validate_dataset(const fs::path& dataset_dir, std::optional<DatasetFlavor> flavor) {
    ValidationReport report;
    if (!fs::is_directory(dataset_dir)) {
        report.pass = false;
        report.violations.push_back("unreadable dataset: " + dataset_dir.string() + " is not a directory");
        return report;
    }
    const bool has_blender = fs::exists(dataset_dir / "transforms.json");
    const bool has_llff = fs::exists(dataset_dir / "poses_bounds.npy");
    const bool want_blender = flavor ? *flavor == DatasetFlavor::blender_transforms : has_blender;
    const bool want_llff = flavor ? *flavor == DatasetFlavor::llff : has_llff;
    if (!want_blender && !want_llff) {
        report.violations.push_back("unreadable dataset: no transforms.json or poses_bounds.npy");
    }
    if (want_blender) {
        check_blender(dataset_dir, report);
    }
    if (want_llff) {
        check_llff(dataset_dir, report);
    }
    report.pass = report.violations.empty();
    return report;
}

}  // namespace prep
