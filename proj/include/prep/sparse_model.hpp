#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prep {

/// Camera models accepted from the pose estimator; values are the on-disk model ids.
enum class CameraModel : int {
    SIMPLE_PINHOLE = 0,  // f, cx, cy
    PINHOLE = 1,         // fx, fy, cx, cy
    SIMPLE_RADIAL = 2,   // f, cx, cy, k
    OPENCV = 4,          // fx, fy, cx, cy, k1, k2, p1, p2
};

const char* to_string(CameraModel m);
std::optional<CameraModel> camera_model_from_name(const std::string& name);
std::optional<CameraModel> camera_model_from_id(int id);
std::size_t param_count(CameraModel m);

struct CameraIntrinsics {
    std::uint32_t camera_id = 0;
    CameraModel model = CameraModel::PINHOLE;
    std::uint64_t width = 0;
    std::uint64_t height = 0;
    std::vector<double> params;  // raw parameter list in model order

    double fx() const { return params.at(0); }
    double fy() const;
    double cx() const;
    double cy() const;
    std::vector<double> distortion() const;

    /// Empty when valid, otherwise a description of the violated invariant.
    std::string check() const;

    friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// World-to-camera pose of one registered image.
struct ImagePose {
    std::uint32_t image_id = 0;
    std::array<double, 4> q{1.0, 0.0, 0.0, 0.0};  // qw, qx, qy, qz
    std::array<double, 3> t{0.0, 0.0, 0.0};
    std::uint32_t camera_id = 0;
    std::string name;

    friend bool operator==(const ImagePose&, const ImagePose&) = default;
};

struct TrackElement {
    std::uint32_t image_id = 0;
    std::uint32_t point2d_idx = 0;

    friend bool operator==(const TrackElement&, const TrackElement&) = default;
};

struct Point3D {
    std::uint64_t id = 0;
    std::array<double, 3> xyz{};
    std::array<std::uint8_t, 3> rgb{};
    double error = 0.0;
    std::vector<TrackElement> track;

    friend bool operator==(const Point3D&, const Point3D&) = default;
};

/// Output of the sparse reconstruction. 2D keypoints are not retained.
struct SparseModel {
    std::map<std::uint32_t, CameraIntrinsics> cameras;
    std::map<std::uint32_t, ImagePose> images;
    std::map<std::uint64_t, Point3D> points;

    const ImagePose* find_image(const std::string& name) const;

    friend bool operator==(const SparseModel&, const SparseModel&) = default;
};

/// cameras.txt / images.txt / points3D.txt. Throws ParseError with file and line.
SparseModel parse_colmap_text(const std::filesystem::path& dir);

/// cameras.bin / images.bin / points3D.bin (little-endian). Throws ParseError with byte offset.
SparseModel parse_colmap_binary(const std::filesystem::path& dir);

void write_colmap_text(const SparseModel& model, const std::filesystem::path& dir);
void write_colmap_binary(const SparseModel& model, const std::filesystem::path& dir);

struct LocatedModel {
    SparseModel model;
    std::filesystem::path dir;
    bool binary = false;
    /// Other reconstructed components found next to the chosen one (fewer images).
    std::vector<std::filesystem::path> ignored_components;
};

/// Loads the model in `dir`, or if `dir` only holds numbered component
/// subdirectories, the one with the most registered images. Binary wins when
/// both encodings are present. Throws IoError when nothing is found.
LocatedModel load_sparse_model(const std::filesystem::path& dir);

}  // namespace prep
