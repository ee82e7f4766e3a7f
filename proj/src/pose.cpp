#include "prep/pose.hpp"

#include "prep/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

namespace prep {

Mat3 quat_to_rotmat(const std::array<double, 4>& q) {
    const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    if (!(std::abs(norm - 1.0) <= 1e-3)) {
        throw GeometryError("quaternion norm " + std::to_string(norm) + " is not close to 1");
    }
    const double w = q[0] / norm;
    const double x = q[1] / norm;
    const double y = q[2] / norm;
    const double z = q[3] / norm;
    Mat3 r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

Mat4 w2c_matrix(const ImagePose& pose) {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = quat_to_rotmat(pose.q);
    m.topRightCorner<3, 1>() = Vec3(pose.t[0], pose.t[1], pose.t[2]);
    return m;
}

Mat4 invert_rigid(const Mat4& m) {
    const Mat3 rt = m.topLeftCorner<3, 3>().transpose();
    Mat4 out = Mat4::Identity();
    out.topLeftCorner<3, 3>() = rt;
    out.topRightCorner<3, 1>() = -rt * m.topRightCorner<3, 1>();
    return out;
}

Mat4 w2c_to_c2w(const ImagePose& pose) { return invert_rigid(w2c_matrix(pose)); }

Mat4 colmap_to_nerf_convention(const Mat4& c2w) {
    Mat4 out = c2w;
    out.block<3, 1>(0, 1) *= -1.0;
    out.block<3, 1>(0, 2) *= -1.0;
    return out;
}

NormalizedPoses normalize_scene(const std::vector<Mat4>& c2w) {
    if (c2w.empty()) {
        throw GeometryError("normalize_scene: no poses");
    }
    Vec3 centroid = Vec3::Zero();
    for (const auto& m : c2w) {
        centroid += m.topRightCorner<3, 1>();
    }
    centroid /= static_cast<double>(c2w.size());

    double max_norm = 0.0;
    for (const auto& m : c2w) {
        max_norm = std::max(max_norm, (m.topRightCorner<3, 1>() - centroid).norm());
    }
    NormalizedPoses out;
    out.transform.offset = -centroid;
    out.transform.scale = max_norm > 1e-12 ? 1.0 / max_norm : 1.0;
    out.poses.reserve(c2w.size());
    for (const auto& m : c2w) {
        Mat4 n = m;
        n.topRightCorner<3, 1>() = out.transform.scale * (m.topRightCorner<3, 1>() - centroid);
        out.poses.push_back(n);
    }
    return out;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) {
        throw std::invalid_argument("percentile of an empty set");
    }
    std::sort(values.begin(), values.end());
    const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

DepthBounds compute_bounds(const SparseModel& model, const ImagePose& pose) {
    const Mat3 r = quat_to_rotmat(pose.q);
    const Vec3 t(pose.t[0], pose.t[1], pose.t[2]);
    std::vector<double> depths;
    for (const auto& [id, point] : model.points) {
        const bool observed = std::any_of(point.track.begin(), point.track.end(),
                                          [&](const TrackElement& el) { return el.image_id == pose.image_id; });
        if (!observed) {
            continue;
        }
        const double z = (r * Vec3(point.xyz[0], point.xyz[1], point.xyz[2]) + t).z();
        if (z > 0.0) {
            depths.push_back(z);
        }
    }
    if (depths.empty()) {
        throw GeometryError("degenerate bounds for image " + pose.name);
    }
    return {0.9 * percentile(depths, 1.0), 1.1 * percentile(depths, 99.0)};
}

RotationError rotation_error(const Mat4& m) {
    const Mat3 r = m.topLeftCorner<3, 3>();
    return {(r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff(), std::abs(r.determinant() - 1.0)};
}

}  // namespace prep

namespace prep {

std::array<double, 4> rotmat_to_quat(const Mat3& r) {
    Eigen::Quaterniond q(r);
    q.normalize();
    if (q.w() < 0.0) {
        q.coeffs() *= -1.0;
    }
    return {q.w(), q.x(), q.y(), q.z()};
}

}  // namespace prep
