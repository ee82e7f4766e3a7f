#include "fixtures.hpp"

#include "prep/pose.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace fixture {

std::array<double, 4> random_quaternion(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::array<double, 4> q{n(rng), n(rng), n(rng), n(rng)};
    const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    for (double& v : q) {
        v /= norm;
    }
    return q;
}

prep::SparseModel random_model(std::uint64_t seed, int images, int points) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    prep::SparseModel model;

    const prep::CameraModel kinds[] = {prep::CameraModel::SIMPLE_PINHOLE, prep::CameraModel::PINHOLE,
                                       prep::CameraModel::SIMPLE_RADIAL, prep::CameraModel::OPENCV};
    std::uint32_t cam_id = 1;
    for (auto kind : kinds) {
        prep::CameraIntrinsics cam;
        cam.camera_id = cam_id;
        cam.model = kind;
        cam.width = 1920;
        cam.height = 1080;
        const double f = 900.0 + 200.0 * u(rng);
        const double cx = 960.0 + 10.0 * (u(rng) - 0.5), cy = 540.0 + 10.0 * (u(rng) - 0.5);
        switch (kind) {
            case prep::CameraModel::SIMPLE_PINHOLE:
                cam.params = {f, cx, cy};
                break;
            case prep::CameraModel::PINHOLE:
                cam.params = {f, f * (1.0 + 0.01 * u(rng)), cx, cy};
                break;
            case prep::CameraModel::SIMPLE_RADIAL:
                cam.params = {f, cx, cy, 0.01 * (u(rng) - 0.5)};
                break;
            case prep::CameraModel::OPENCV:
                cam.params = {f, f, cx, cy, 0.01 * u(rng), -0.01 * u(rng), 1e-4 * u(rng), -1e-4 * u(rng)};
                break;
        }
        model.cameras[cam_id++] = cam;
    }

    for (int i = 0; i < images; ++i) {
        const double theta = 2.0 * 3.141592653589793 * (i + 0.3 * u(rng)) / images;
        const double radius = 3.0 + 2.0 * u(rng);
        const prep::Vec3 center(radius * std::cos(theta), 0.5 * (u(rng) - 0.5), radius * std::sin(theta));
        const prep::Vec3 z = (-center).normalized();
        const prep::Vec3 x = prep::Vec3(0.0, 1.0, 0.0).cross(z).normalized();
        const prep::Vec3 y = z.cross(x);
        prep::Mat3 r;
        r.row(0) = x;
        r.row(1) = y;
        r.row(2) = z;
        const prep::Vec3 t = -r * center;
        prep::ImagePose pose;
        pose.image_id = static_cast<std::uint32_t>(10 + i);
        pose.q = prep::rotmat_to_quat(r);
        pose.t = {t.x(), t.y(), t.z()};
        pose.camera_id = static_cast<std::uint32_t>(1 + i % 4);
        pose.name = "A_" + std::to_string(i) + ".png";
        model.images[pose.image_id] = pose;
    }

    for (int p = 0; p < points; ++p) {
        prep::Point3D pt;
        pt.id = static_cast<std::uint64_t>(100 + p);
        pt.xyz = {u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5};
        pt.rgb = {static_cast<std::uint8_t>(rng() & 0xff), static_cast<std::uint8_t>(rng() & 0xff),
                  static_cast<std::uint8_t>(rng() & 0xff)};
        pt.error = u(rng);
        for (const auto& [id, img] : model.images) {
            if (u(rng) < 0.7 || pt.track.empty()) {
                pt.track.push_back({id, static_cast<std::uint32_t>(rng() % 5000)});
            }
        }
        model.points[pt.id] = pt;
    }
    return model;
}

}  // namespace fixture
