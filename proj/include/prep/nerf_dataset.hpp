#pragma once

#include "prep/pose.hpp"
#include "prep/sparse_model.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace prep {

enum class DatasetFlavor { blender_transforms, llff };

const char* to_string(DatasetFlavor f);

struct IntrinsicsSummary {
    std::uint64_t width = 0;
    std::uint64_t height = 0;
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    double camera_angle_x = 0.0;
};

struct NerfFrame {
    std::string name;       // image name in the sparse model
    std::string file_path;  // relative to the dataset root
    Mat4 c2w = Mat4::Identity();
    std::optional<DepthBounds> bounds;  // LLFF only
    // LLFF only: (H, W, focal) column
    std::array<double, 3> hwf{};
};

struct NerfDataset {
    DatasetFlavor flavor = DatasetFlavor::blender_transforms;
    IntrinsicsSummary intrinsics;
    std::vector<NerfFrame> frames;  // sorted by name
    Similarity normalization;       // identity for LLFF
    std::vector<std::string> pose_missing;
    std::filesystem::path file;
};

struct EmitOptions {
    /// Frame file names that should appear in the dataset. Empty means every
    /// registered image in the model.
    std::vector<std::string> retained;
    std::string image_dir = "images";
    bool include_intrinsics = true;
    /// Missing poses become a PipelineError instead of a pose_missing entry.
    bool strict = false;
};

/// Writes `<out_dir>/transforms.json`: camera_angle_x, optional fl_x/fl_y/cx/cy/w/h,
/// and per-frame NeRF-convention, scene-normalized camera-to-world matrices.
NerfDataset emit_transforms_json(const SparseModel& model, const std::filesystem::path& out_dir,
                                 const EmitOptions& options = {});

/// Writes `<out_dir>/poses_bounds.npy`: N x 17 float64, each row the flattened
/// 3x5 [R | t | hwf] (columns -y, x, z of the NeRF-convention rotation) then near, far.
NerfDataset emit_llff(const SparseModel& model, const std::filesystem::path& out_dir,
                      const EmitOptions& options = {});

/// Parses a transforms.json written by emit_transforms_json (or any loader-compatible one).
NerfDataset read_transforms_json(const std::filesystem::path& file);

/// Parses poses_bounds.npy into frames (names are unknown: "row<i>").
NerfDataset read_poses_bounds(const std::filesystem::path& file);

// --- .npy container --------------------------------------------------------

struct NpyArray {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major
};

/// Version 1.0, '<f8', C order, header padded with spaces to a 64-byte boundary.
std::vector<std::uint8_t> encode_npy(const NpyArray& array);

/// Strict reader for 2-D '<f8' C-order arrays. Throws ParseError (byte offset) on violations.
NpyArray decode_npy(const std::vector<std::uint8_t>& bytes, const std::string& file_name = "<npy>");

}  // namespace prep
