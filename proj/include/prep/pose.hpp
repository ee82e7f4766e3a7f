#pragma once

#include "prep/sparse_model.hpp"

#include <Eigen/Core>

#include <array>
#include <utility>
#include <vector>

namespace prep {

using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;

/// Hamilton-convention rotation for (qw, qx, qy, qz). The quaternion is
/// renormalized; its norm must be within 1e-3 of 1 (GeometryError otherwise).
Mat3 quat_to_rotmat(const std::array<double, 4>& q);

/// Homogeneous world-to-camera matrix [R(q) | t].
Mat4 w2c_matrix(const ImagePose& pose);

/// Camera-to-world: R^T and -R^T t.
Mat4 w2c_to_c2w(const ImagePose& pose);

/// Inverse of a rigid 4x4 transform (either direction).
Mat4 invert_rigid(const Mat4& m);

/// Negates the y and z basis columns of the rotation block: estimator cameras
/// look along +z with y down, NeRF cameras look along -z with y up.
/// Translation is untouched; the map is its own inverse.
Mat4 colmap_to_nerf_convention(const Mat4& c2w);

/// x' = scale * (x + offset), applied to camera centers.
struct Similarity {
    double scale = 1.0;
    Vec3 offset = Vec3::Zero();
};

struct NormalizedPoses {
    std::vector<Mat4> poses;
    Similarity transform;
};

/// Centers camera positions on their centroid and scales the farthest to unit
/// distance. If every camera coincides the scale stays 1.
NormalizedPoses normalize_scene(const std::vector<Mat4>& c2w);

struct DepthBounds {
    double near = 0.0;
    double far = 0.0;
};

/// Linear-interpolation percentile (numpy's default) of unsorted values; p in [0, 100].
double percentile(std::vector<double> values, double p);

/// Camera-frame depths of every point whose track observes `pose`;
/// near = 0.9 * P1, far = 1.1 * P99 over the positive ones.
/// Throws GeometryError ("degenerate bounds") when none are in front of the camera.
DepthBounds compute_bounds(const SparseModel& model, const ImagePose& pose);

/// Largest |R R^T - I| entry and |det R - 1| of the upper-left 3x3 block.
struct RotationError {
    double orthonormality = 0.0;
    double determinant = 0.0;
};
RotationError rotation_error(const Mat4& m);

}  // namespace prep

namespace prep {

/// Unit quaternion (qw, qx, qy, qz) with qw >= 0 for a rotation matrix.
std::array<double, 4> rotmat_to_quat(const Mat3& r);

}  // namespace prep
