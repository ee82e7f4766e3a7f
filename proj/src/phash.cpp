#include "prep/phash.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace prep {

namespace {

constexpr std::size_t kGrid = 32;
constexpr std::size_t kBlock = 8;

// basis[k][x] = cos(pi (2x + 1) k / 64)
const std::array<std::array<double, kGrid>, kBlock>& dct_basis() {
    static const auto table = [] {
        std::array<std::array<double, kGrid>, kBlock> t{};
        for (std::size_t k = 0; k < kBlock; ++k) {
            for (std::size_t x = 0; x < kGrid; ++x) {
                t[k][x] = std::cos(std::numbers::pi * static_cast<double>((2 * x + 1) * k) / (2.0 * kGrid));
            }
        }
        return t;
    }();
    return table;
}

}  // namespace

std::uint64_t phash64(const Image& img) {
    Plane gray = gray_plane(img);
    for (auto& v : gray.values) {
        v -= 127.5;
    }
    const Plane small = area_resize(gray, kGrid, kGrid);
    const auto& basis = dct_basis();

    // separable: first along x for the 8 horizontal frequencies, then along y
    std::array<std::array<double, kBlock>, kGrid> along_x{};
    for (std::size_t y = 0; y < kGrid; ++y) {
        for (std::size_t u = 0; u < kBlock; ++u) {
            double acc = 0.0;
            for (std::size_t x = 0; x < kGrid; ++x) {
                acc += small(x, y) * basis[u][x];
            }
            along_x[y][u] = acc;
        }
    }
    std::array<double, kBlock * kBlock> coeffs{};
    for (std::size_t v = 0; v < kBlock; ++v) {
        for (std::size_t u = 0; u < kBlock; ++u) {
            double acc = 0.0;
            for (std::size_t y = 0; y < kGrid; ++y) {
                acc += along_x[y][u] * basis[v][y];
            }
            coeffs[v * kBlock + u] = acc;
        }
    }

    // Coefficients that are zero up to rounding are snapped to exactly zero, so
    // flat regions compare as equal to the median rather than by rounding noise.
    double l1 = 0.0;
    for (const double s : small.values) {
        l1 += std::abs(s);
    }
    const double eps = 1e-12 * l1;
    for (auto& c : coeffs) {
        if (std::abs(c) <= eps) {
            c = 0.0;
        }
    }

    std::array<double, kBlock * kBlock - 1> ac{};
    std::copy(coeffs.begin() + 1, coeffs.end(), ac.begin());
    std::nth_element(ac.begin(), ac.begin() + ac.size() / 2, ac.end());
    const double median = ac[ac.size() / 2];

    std::uint64_t bits = 0;
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (coeffs[j] > median) {
            bits |= std::uint64_t{1} << (63 - j);
        }
    }
    return bits;
}

PerceptualHash phash64(const Frame& frame) {
    return {phash64(*frame.pixels()), frame.id()};
}

}  // namespace prep
