#include "oracles.hpp"
#include "synth.hpp"

#include "prep/quality_metrics.hpp"

#include <gtest/gtest.h>

#include <random>

TEST(Psnr, ClosedForms) {
    const prep::Image a(16, 16, 3, 100);
    EXPECT_TRUE(std::isinf(prep::psnr(a, a)));
    EXPECT_GT(prep::psnr(a, a), 0.0);
    EXPECT_EQ(prep::psnr(prep::Image(8, 8, 3, 255), prep::Image(8, 8, 3, 0)), 0.0);
    const double expected = 10.0 * std::log10(255.0 * 255.0 / 256.0);
    for (int c : {0, 50, 239}) {
        const double p = prep::psnr(prep::Image(20, 10, 3, static_cast<std::uint8_t>(c)),
                                    prep::Image(20, 10, 3, static_cast<std::uint8_t>(c + 16)));
        EXPECT_NEAR(p, 24.0482, 1e-3);
        EXPECT_NEAR(p, expected, 1e-12);
    }
}

TEST(Psnr, MismatchThrows) {
    EXPECT_THROW(prep::psnr(prep::Image(4, 4, 3, 0), prep::Image(4, 5, 3, 0)), std::invalid_argument);
    EXPECT_THROW(prep::psnr(prep::Image(4, 4, 3, 0), prep::Image(4, 4, 1, 0)), std::invalid_argument);
}

TEST(Psnr, InvariantUnderSharedPermutation) {
    std::mt19937_64 rng(1);
    const auto a = synth::noise(20, 12, 1), b = synth::noise(20, 12, 2);
    std::vector<std::size_t> perm(20 * 12);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    prep::Image pa(20, 12, 3), pb(20, 12, 3);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            pa.data[i * 3 + c] = a.data[perm[i] * 3 + c];
            pb.data[i * 3 + c] = b.data[perm[i] * 3 + c];
        }
    }
    EXPECT_NEAR(prep::psnr(pa, pb), prep::psnr(a, b), 1e-12);
}

TEST(Ssim, IdentityAndSymmetry) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 10; ++i) {
        const auto a = synth::texture(40, 30, rng()), b = synth::texture(40, 30, rng());
        EXPECT_NEAR(prep::ssim(a, a), 1.0, 1e-12);
        EXPECT_NEAR(prep::ssim(a, b), prep::ssim(b, a), 1e-12);
        const double s = prep::ssim(a, b);
        EXPECT_GE(s, -1.0);
        EXPECT_LE(s, 1.0);
    }
}

TEST(Ssim, MatchesWindowedOracle) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto a = synth::texture(37, 29, seed);
        const auto b = synth::gaussian_blur(synth::brighten(a, 10), 1.0);
        EXPECT_NEAR(prep::ssim(a, b), oracle::ssim(a, b), 1e-9);
        const auto n = synth::noise(37, 29, seed);
        EXPECT_NEAR(prep::ssim(a, n), oracle::ssim(a, n), 1e-9);
    }
}

TEST(Ssim, DecreasesWithNoise) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto a = synth::texture(64, 64, seed);
        std::mt19937_64 rng(seed);
        double prev = 1.0;
        for (double sigma : {5.0, 10.0, 20.0}) {
            std::normal_distribution<double> noise(0.0, sigma);
            prep::Image b = a;
            for (auto& v : b.data) {
                v = static_cast<std::uint8_t>(std::clamp(std::lround(v + noise(rng)), 0L, 255L));
            }
            const double s = prep::ssim(a, b);
            EXPECT_LT(s, prev) << seed << " " << sigma;
            prev = s;
        }
    }
}

TEST(Ssim, SizeChecks) {
    EXPECT_THROW(prep::ssim(prep::Image(10, 20, 3, 0), prep::Image(10, 20, 3, 0)), std::invalid_argument);
    EXPECT_THROW(prep::ssim(prep::Image(20, 20, 3, 0), prep::Image(21, 20, 3, 0)), std::invalid_argument);
}
