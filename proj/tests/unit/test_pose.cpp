#include "fixtures.hpp"
#include "oracles.hpp"

#include "prep/error.hpp"
#include "prep/pose.hpp"

#include <Eigen/LU>
#include <gtest/gtest.h>

#include <random>

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

prep::ImagePose random_pose(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    prep::ImagePose p;
    p.q = fixture::random_quaternion(rng);
    p.t = {u(rng), u(rng), u(rng)};
    return p;
}

}  // namespace

TEST(Quaternion, IdentityAndHalfTurnAboutZ) {
    EXPECT_EQ(prep::quat_to_rotmat({1, 0, 0, 0}), prep::Mat3::Identity());
    const prep::Mat3 r = prep::quat_to_rotmat({0, 0, 0, 1});
    EXPECT_LT(max_abs(r - prep::Vec3(-1, -1, 1).asDiagonal().toDenseMatrix()), 1e-15);
}

TEST(Quaternion, HamiltonConvention) {
    // +90 degrees about z maps x to y
    const double s = std::sqrt(0.5);
    const prep::Mat3 r = prep::quat_to_rotmat({s, 0, 0, s});
    EXPECT_LT((r * prep::Vec3::UnitX() - prep::Vec3::UnitY()).norm(), 1e-15);
}

TEST(Quaternion, RandomUnitQuaternionsAreRotations) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        const prep::Mat3 r = prep::quat_to_rotmat(fixture::random_quaternion(rng));
        EXPECT_LT(max_abs(r * r.transpose() - prep::Mat3::Identity()), 1e-9);
        EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
    }
}

TEST(Quaternion, NormToleranceAndRenormalization) {
    const prep::Mat3 r = prep::quat_to_rotmat({1.0005, 0, 0, 0});
    EXPECT_LT(max_abs(r - prep::Mat3::Identity()), 1e-15);
    EXPECT_THROW(prep::quat_to_rotmat({0, 0, 0, 0}), prep::GeometryError);
    EXPECT_THROW(prep::quat_to_rotmat({1.01, 0, 0, 0}), prep::GeometryError);
}

TEST(Quaternion, MatrixToQuaternionRoundTrip) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        auto q = fixture::random_quaternion(rng);
        const auto back = prep::rotmat_to_quat(prep::quat_to_rotmat(q));
        const double sign = q[0] < 0 ? -1.0 : 1.0;
        for (int k = 0; k < 4; ++k) {
            EXPECT_NEAR(back[k], sign * q[k], 1e-9);
        }
    }
}

TEST(Extrinsics, TranslationOnly) {
    prep::ImagePose p;
    p.t = {1, 2, 3};
    const prep::Mat4 c2w = prep::w2c_to_c2w(p);
    EXPECT_EQ((c2w.topRightCorner<3, 1>()), prep::Vec3(-1, -2, -3));
    EXPECT_EQ((c2w.topLeftCorner<3, 3>()), prep::Mat3::Identity());
}

TEST(Extrinsics, RoundTripsOnRandomPoses) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i) {
        const auto pose = random_pose(rng);
        const prep::Mat4 c2w = prep::w2c_to_c2w(pose);
        const prep::Mat4 w2c = prep::w2c_matrix(pose);
        EXPECT_LT(max_abs(c2w * w2c - prep::Mat4::Identity()), 1e-9);
        EXPECT_LT(max_abs(prep::invert_rigid(prep::invert_rigid(c2w)) - c2w), 1e-12);
        EXPECT_LT(max_abs(prep::invert_rigid(c2w) - w2c), 1e-12);
        const auto err = prep::rotation_error(c2w);
        EXPECT_LT(err.orthonormality, 1e-9);
        EXPECT_LT(err.determinant, 1e-9);
    }
}

TEST(Convention, FlipIsInvolutionAndKeepsDeterminant) {
    EXPECT_EQ(prep::colmap_to_nerf_convention(prep::Mat4::Identity()),
              Eigen::Vector4d(1, -1, -1, 1).asDiagonal().toDenseMatrix());
    std::mt19937_64 rng(4);
    for (int i = 0; i < 1000; ++i) {
        const prep::Mat4 c2w = prep::w2c_to_c2w(random_pose(rng));
        const prep::Mat4 flipped = prep::colmap_to_nerf_convention(c2w);
        EXPECT_EQ(prep::colmap_to_nerf_convention(flipped), c2w);
        EXPECT_EQ((flipped.topRightCorner<3, 1>()), (c2w.topRightCorner<3, 1>()));
        EXPECT_NEAR((flipped.topLeftCorner<3, 3>().determinant()), 1.0, 1e-9);
    }
}

TEST(Normalize, SingleCameraAndFixedPoint) {
    prep::Mat4 a = prep::Mat4::Identity();
    a(0, 3) = 2.0;
    const auto one = prep::normalize_scene({a});
    EXPECT_EQ((one.poses[0].topRightCorner<3, 1>()), prep::Vec3::Zero());
    EXPECT_EQ(one.transform.scale, 1.0);
    EXPECT_EQ(one.transform.offset, prep::Vec3(-2, 0, 0));

    prep::Mat4 l = prep::Mat4::Identity(), r = prep::Mat4::Identity();
    l(0, 3) = -1.0;
    r(0, 3) = 1.0;
    const auto pair = prep::normalize_scene({l, r});
    EXPECT_EQ(pair.poses[0], l);
    EXPECT_EQ(pair.poses[1], r);
    EXPECT_EQ(pair.transform.scale, 1.0);
}

TEST(Normalize, CentroidAndScaleOnRandomSets) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<prep::Mat4> poses;
        const int n = 2 + static_cast<int>(rng() % 30);
        for (int i = 0; i < n; ++i) {
            poses.push_back(prep::w2c_to_c2w(random_pose(rng)));
        }
        const auto out = prep::normalize_scene(poses);
        prep::Vec3 centroid = prep::Vec3::Zero();
        double max_norm = 0.0;
        for (std::size_t i = 0; i < out.poses.size(); ++i) {
            const prep::Vec3 c = out.poses[i].topRightCorner<3, 1>();
            centroid += c;
            max_norm = std::max(max_norm, c.norm());
            // rotation untouched
            EXPECT_EQ((out.poses[i].topLeftCorner<3, 3>()), (poses[i].topLeftCorner<3, 3>()));
            // recorded similarity reproduces the output
            const prep::Vec3 expect = out.transform.scale * (poses[i].topRightCorner<3, 1>() + out.transform.offset);
            EXPECT_LT((expect - c).norm(), 1e-12);
        }
        EXPECT_LE((centroid / n).norm(), 1e-12);
        EXPECT_NEAR(max_norm, 1.0, 1e-12);
        const auto again = prep::normalize_scene(out.poses);
        for (std::size_t i = 0; i < out.poses.size(); ++i) {
            EXPECT_LT(max_abs(again.poses[i] - out.poses[i]), 1e-12);
        }
    }
}

TEST(Bounds, SinglePoint) {
    prep::SparseModel m;
    m.cameras[1] = {1, prep::CameraModel::SIMPLE_PINHOLE, 100, 100, {50, 50, 50}};
    prep::ImagePose pose;
    pose.image_id = 1;
    pose.camera_id = 1;
    pose.name = "A_0.png";
    m.images[1] = pose;
    prep::Point3D p;
    p.id = 1;
    p.xyz = {0, 0, 5};
    p.track = {{1, 0}};
    m.points[1] = p;
    const auto b = prep::compute_bounds(m, pose);
    EXPECT_DOUBLE_EQ(b.near, 4.5);
    EXPECT_DOUBLE_EQ(b.far, 5.5);

    m.points[1].xyz = {0, 0, -5};
    EXPECT_THROW(prep::compute_bounds(m, pose), prep::GeometryError);
}

TEST(Bounds, MatchesBruteForcePercentiles) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto model = fixture::random_model(seed, 6, 80);
        for (const auto& [id, pose] : model.images) {
            const prep::Mat4 w2c = prep::w2c_matrix(pose);
            std::vector<double> depths;
            for (const auto& [pid, pt] : model.points) {
                const bool observed = std::any_of(pt.track.begin(), pt.track.end(),
                                                  [&](const prep::TrackElement& e) { return e.image_id == id; });
                if (!observed) {
                    continue;
                }
                const prep::Vec3 x(pt.xyz[0], pt.xyz[1], pt.xyz[2]);
                const double z = (w2c.topLeftCorner<3, 3>() * x + w2c.topRightCorner<3, 1>()).z();
                if (z > 0) {
                    depths.push_back(z);
                }
            }
            ASSERT_FALSE(depths.empty());
            const auto b = prep::compute_bounds(model, pose);
            EXPECT_NEAR(b.near, 0.9 * oracle::percentile(depths, 1.0), 1e-12);
            EXPECT_NEAR(b.far, 1.1 * oracle::percentile(depths, 99.0), 1e-12);
            EXPECT_GT(b.near, 0.0);
            EXPECT_LT(b.near, b.far);
        }
    }
}

TEST(Bounds, PercentileMatchesOracle) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(1 + rng() % 50);
        for (auto& x : v) {
            x = u(rng);
        }
        for (double p : {0.0, 1.0, 37.5, 50.0, 99.0, 100.0}) {
            EXPECT_NEAR(prep::percentile(v, p), oracle::percentile(v, p), 1e-12);
        }
    }
}
