#pragma once

#include "prep/sparse_model.hpp"

#include <cstdint>
#include <random>

namespace fixture {

/// Random unit quaternion (qw, qx, qy, qz), uniform on the sphere.
std::array<double, 4> random_quaternion(std::mt19937_64& rng);

/// A model with one camera of each supported kind, `images` cameras looking
/// roughly at the origin from radius 3..5, and `points` points near the
/// origin observed by a random subset of images. Every point is in front of
/// every camera.
prep::SparseModel random_model(std::uint64_t seed, int images = 6, int points = 40);

}  // namespace fixture
