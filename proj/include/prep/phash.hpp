#pragma once

#include "prep/image.hpp"
#include "prep/ingest.hpp"

#include <bit>
#include <cstdint>

namespace prep {

struct PerceptualHash {
    std::uint64_t bits = 0;
    FrameId frame;

    friend bool operator==(const PerceptualHash&, const PerceptualHash&) = default;
};

/// Number of differing bits.
inline int hamming(std::uint64_t u, std::uint64_t v) { return std::popcount(u ^ v); }

/// 64-bit DCT perceptual hash of an 8-bit image (RGB or gray).
///
/// Luma is shifted to the signed range [-127.5, 127.5], area-resampled to
/// 32x32 and transformed with an unnormalized 2-D DCT-II. The 8x8
/// lowest-frequency block is read row-major (row = vertical frequency); bit j
/// of that order is set iff coefficient j is strictly greater than the median
/// of the 63 AC coefficients. Bit 0 is the most significant bit and holds the
/// DC comparison, so it is set exactly when the image is brighter than mid-gray
/// on average (for flat images the AC terms vanish and the median is 0).
std::uint64_t phash64(const Image& img);

PerceptualHash phash64(const Frame& frame);

}  // namespace prep
