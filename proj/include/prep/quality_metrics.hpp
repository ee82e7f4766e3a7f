#pragma once

#include "prep/image.hpp"

#include <string>

namespace prep {

/// 10 log10(max^2 / MSE) over every channel; +infinity when the images are identical.
/// Throws std::invalid_argument on a size or channel mismatch.
double psnr(const Image& a, const Image& b, double max_value = 255.0);

/// Mean structural similarity of the luma planes: 11x11 Gaussian window
/// (sigma 1.5), K1 = 0.01, K2 = 0.03, L = 255, averaged over every window
/// position that fits inside the image. Both sides must be at least 11x11.
double ssim(const Image& a, const Image& b);

struct MetricReport {
    std::string a;
    std::string b;
    double psnr_db = 0.0;
    double ssim = 0.0;
};

}  // namespace prep
