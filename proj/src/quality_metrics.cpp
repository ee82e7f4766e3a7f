#include "prep/quality_metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace prep {

double psnr(const Image& a, const Image& b, double max_value) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
        throw std::invalid_argument("psnr: images differ in size or channel count");
    }
    if (a.data.empty()) {
        throw std::invalid_argument("psnr: empty image");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        sum += d * d;
    }
    if (sum == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double mse = sum / static_cast<double>(a.data.size());
    return 10.0 * std::log10(max_value * max_value / mse);
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::array<double, kWindow> gaussian_taps() {
    std::array<double, kWindow> taps{};
    double total = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double x = i - kWindow / 2;
        taps[static_cast<std::size_t>(i)] = std::exp(-(x * x) / (2.0 * kSigma * kSigma));
        total += taps[static_cast<std::size_t>(i)];
    }
    for (auto& t : taps) {
        t /= total;
    }
    return taps;
}

// Valid-region separable filter: output is (w - 10) x (h - 10).
Plane filter_valid(const Plane& in, const std::array<double, kWindow>& taps) {
    const std::size_t ow = in.width - kWindow + 1;
    const std::size_t oh = in.height - kWindow + 1;
    Plane horizontal(ow, in.height);
    for (std::size_t y = 0; y < in.height; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < kWindow; ++k) {
                acc += taps[k] * in(x + k, y);
            }
            horizontal(x, y) = acc;
        }
    }
    Plane out(ow, oh);
    for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < kWindow; ++k) {
                acc += taps[k] * horizontal(x, y + k);
            }
            out(x, y) = acc;
        }
    }
    return out;
}

Plane product(const Plane& a, const Plane& b) {
    Plane out(a.width, a.height);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        out.values[i] = a.values[i] * b.values[i];
    }
    return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
        throw std::invalid_argument("ssim: images differ in size or channel count");
    }
    if (a.width < kWindow || a.height < kWindow) {
        throw std::invalid_argument("ssim: images must be at least 11x11");
    }
    const Plane x = gray_plane(a);
    const Plane y = gray_plane(b);
    const auto taps = gaussian_taps();

    const Plane mu_x = filter_valid(x, taps);
    const Plane mu_y = filter_valid(y, taps);
    const Plane xx = filter_valid(product(x, x), taps);
    const Plane yy = filter_valid(product(y, y), taps);
    const Plane xy = filter_valid(product(x, y), taps);

    constexpr double L = 255.0;
    constexpr double c1 = (0.01 * L) * (0.01 * L);
    constexpr double c2 = (0.03 * L) * (0.03 * L);
    double total = 0.0;
    for (std::size_t i = 0; i < mu_x.values.size(); ++i) {
        const double mx = mu_x.values[i];
        const double my = mu_y.values[i];
        const double vx = xx.values[i] - mx * mx;
        const double vy = yy.values[i] - my * my;
        const double cov = xy.values[i] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    return total / static_cast<double>(mu_x.values.size());
}

}  // namespace prep
