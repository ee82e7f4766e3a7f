#include "prep/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prep {

Image::Image(int w, int h, int c)
    : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0) {}

Image::Image(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

Image to_gray(const Image& rgb) {
    if (rgb.channels == 1) {
        return rgb;
    }
    if (rgb.channels != 3) {
        throw std::invalid_argument("to_gray: expected 1 or 3 channels");
    }
    Image out(rgb.width, rgb.height, 1);
    const std::size_t n = static_cast<std::size_t>(rgb.width) * rgb.height;
    const std::uint8_t* p = rgb.data.data();
    for (std::size_t i = 0; i < n; ++i, p += 3) {
        // integer form of the luma weights; +500 rounds half-up
        const std::uint32_t acc = 299u * p[0] + 587u * p[1] + 114u * p[2] + 500u;
        out.data[i] = static_cast<std::uint8_t>(acc / 1000u);
    }
    return out;
}

Plane gray_plane(const Image& img) {
    const Image gray = to_gray(img);
    Plane plane(static_cast<std::size_t>(gray.width), static_cast<std::size_t>(gray.height));
    std::transform(gray.data.begin(), gray.data.end(), plane.values.begin(),
                   [](std::uint8_t v) { return static_cast<double>(v); });
    return plane;
}

Image rotate_180(const Image& img) {
    Image out(img.width, img.height, img.channels);
    const std::size_t pixels = static_cast<std::size_t>(img.width) * img.height;
    const auto c = static_cast<std::size_t>(img.channels);
    for (std::size_t i = 0; i < pixels; ++i) {
        const std::size_t j = pixels - 1 - i;
        std::copy_n(img.data.begin() + static_cast<std::ptrdiff_t>(j * c), c,
                    out.data.begin() + static_cast<std::ptrdiff_t>(i * c));
    }
    return out;
}

namespace {

struct Tap {
    std::size_t src;
    double weight;
};

// For each output index, the input samples it overlaps and their normalized weights.
std::vector<std::vector<Tap>> area_taps(std::size_t in, std::size_t out) {
    std::vector<std::vector<Tap>> taps(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t i = 0; i < out; ++i) {
        const double lo = static_cast<double>(i) * scale;
        const double hi = static_cast<double>(i + 1) * scale;
        const auto first = static_cast<std::size_t>(std::floor(lo));
        const auto last = std::min(in - 1, static_cast<std::size_t>(std::ceil(hi)) - 1);
        double total = 0.0;
        for (std::size_t j = first; j <= last; ++j) {
            const double overlap =
                std::min(hi, static_cast<double>(j + 1)) - std::max(lo, static_cast<double>(j));
            if (overlap > 0.0) {
                taps[i].push_back({j, overlap});
                total += overlap;
            }
        }
        for (auto& t : taps[i]) {
            t.weight /= total;
        }
    }
    return taps;
}

}  // namespace

Plane area_resize(const Plane& src, std::size_t out_width, std::size_t out_height) {
    if (src.width == 0 || src.height == 0 || out_width == 0 || out_height == 0) {
        throw std::invalid_argument("area_resize: empty dimensions");
    }
    const auto xtaps = area_taps(src.width, out_width);
    const auto ytaps = area_taps(src.height, out_height);

    Plane horizontal(out_width, src.height);
    for (std::size_t y = 0; y < src.height; ++y) {
        const double* row = src.values.data() + y * src.width;
        for (std::size_t x = 0; x < out_width; ++x) {
            double acc = 0.0;
            for (const auto& t : xtaps[x]) {
                acc += t.weight * row[t.src];
            }
            horizontal(x, y) = acc;
        }
    }

    Plane out(out_width, out_height);
    for (std::size_t y = 0; y < out_height; ++y) {
        for (std::size_t x = 0; x < out_width; ++x) {
            double acc = 0.0;
            for (const auto& t : ytaps[y]) {
                acc += t.weight * horizontal(x, t.src);
            }
            out(x, y) = acc;
        }
    }
    return out;
}

}  // namespace prep
