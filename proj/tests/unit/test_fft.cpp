#include "oracles.hpp"

#include "prep/fft.hpp"

#include <gtest/gtest.h>

#include <random>

namespace {

prep::Plane random_plane(std::size_t w, std::size_t h, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    prep::Plane p(w, h);
    for (auto& v : p.values) {
        v = u(rng);
    }
    return p;
}

}  // namespace

TEST(Fft, ConstantPlaneHasOnlyDc) {
    const prep::Plane p(7, 5, 3.25);
    const auto s = prep::fft2d(p);
    for (std::size_t v = 0; v < 5; ++v) {
        for (std::size_t u = 0; u < 7; ++u) {
            const double expect = (u == 0 && v == 0) ? 3.25 * 35 : 0.0;
            EXPECT_NEAR(s(u, v).real(), expect, 1e-9);
            EXPECT_NEAR(s(u, v).imag(), 0.0, 1e-9);
        }
    }
}

TEST(Fft, ImpulseGivesFlatSpectrum) {
    for (auto [w, h] : {std::pair<std::size_t, std::size_t>{8, 8}, {6, 10}, {13, 1}}) {
        prep::Plane p(w, h);
        p(0, 0) = 1.0;
        const auto s = prep::fft2d(p);
        for (const auto& c : s.coefficients) {
            EXPECT_NEAR(c.real(), 1.0, 1e-9);
            EXPECT_NEAR(c.imag(), 0.0, 1e-9);
        }
    }
}

TEST(Fft, MatchesNaiveDftOnEveryShapeUpTo16) {
    std::mt19937_64 rng(11);
    for (std::size_t w = 1; w <= 16; ++w) {
        for (std::size_t h = 1; h <= 16; h += 3) {
            const auto p = random_plane(w, h, rng);
            const auto s = prep::fft2d(p);
            const auto ref = oracle::naive_dft2(p);
            for (std::size_t i = 0; i < ref.size(); ++i) {
                ASSERT_NEAR(s.coefficients[i].real(), ref[i].real(), 1e-9) << w << "x" << h;
                ASSERT_NEAR(s.coefficients[i].imag(), ref[i].imag(), 1e-9) << w << "x" << h;
            }
        }
    }
}

TEST(Fft, OneDimensionalPlanMatchesDirectSum) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t n : {1u, 2u, 3u, 5u, 12u, 64u, 100u, 1080u}) {
        std::vector<prep::Complex> x(n);
        for (auto& v : x) {
            v = {u(rng), u(rng)};
        }
        auto y = x;
        prep::FftPlan(n).forward(y);
        for (std::size_t k = 0; k < n; k += std::max<std::size_t>(1, n / 17)) {
            std::complex<double> acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                acc += x[j] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / n);
            }
            EXPECT_NEAR(std::abs(y[k] - acc), 0.0, 1e-9 * std::sqrt(static_cast<double>(n))) << n;
        }
    }
}

TEST(Fft, InverseRoundTrip) {
    std::mt19937_64 rng(3);
    for (auto [w, h] : {std::pair<std::size_t, std::size_t>{16, 16}, {15, 9}, {1, 7}, {31, 2}}) {
        const auto p = random_plane(w, h, rng);
        const auto back = prep::ifft2d(prep::fft2d(p));
        for (std::size_t i = 0; i < p.size(); ++i) {
            ASSERT_NEAR(back.values[i], p.values[i], 1e-9);
        }
    }
}

TEST(Fft, Parseval) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const auto p = random_plane(1 + rng() % 16, 1 + rng() % 16, rng);
        const auto s = prep::fft2d(p);
        double spatial = 0.0, spectral = 0.0;
        for (double v : p.values) {
            spatial += v * v;
        }
        for (const auto& c : s.coefficients) {
            spectral += std::norm(c);
        }
        spectral /= static_cast<double>(p.size());
        EXPECT_NEAR(spectral / spatial, 1.0, 1e-9);
    }
}

TEST(Fft, SpectrumMagnitudeMatchesFullTransform) {
    std::mt19937_64 rng(8);
    for (auto [w, h] : {std::pair<std::size_t, std::size_t>{16, 16}, {15, 9}, {1, 7}, {7, 1}, {30, 11}, {2, 3}}) {
        const auto p = random_plane(w, h, rng);
        const auto s = prep::fft2d(p);
        const auto m = prep::spectrum_magnitude(p);
        for (std::size_t v = 0; v < h; ++v) {
            for (std::size_t u = 0; u < w; ++u) {
                ASSERT_NEAR(m(u, v), std::abs(s(u, v)), 1e-9) << w << "x" << h << " at " << u << "," << v;
            }
        }
    }
}

TEST(Fft, CenterShiftMovesDcToMiddle) {
    prep::Plane p(5, 4);
    p(0, 0) = 1.0;
    const auto c = prep::center_shift(p);
    EXPECT_EQ(c(2, 2), 1.0);
    double sum = 0.0;
    for (double v : c.values) {
        sum += v;
    }
    EXPECT_EQ(sum, 1.0);
}

TEST(Fft, RejectsEmpty) {
    EXPECT_THROW(prep::FftPlan(0), std::invalid_argument);
    EXPECT_THROW(prep::fft2d(prep::Plane{}), std::invalid_argument);
}
