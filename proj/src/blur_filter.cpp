#include "prep/blur_filter.hpp"

#include "prep/fft.hpp"
#include "prep/parallel.hpp"

#include <algorithm>
#include <stdexcept>

namespace prep {

const char* to_string(BlurDecision d) { return d == BlurDecision::keep ? "keep" : "remove"; }

double sharpness_fm(const Plane& gray) {
    if (gray.width < 2 || gray.height < 2) {
        throw std::invalid_argument("sharpness_fm: plane must be at least 2x2");
    }
    const Plane centered = center_shift(spectrum_magnitude(gray));
    const double peak = *std::max_element(centered.values.begin(), centered.values.end());
    if (peak <= 0.0) {
        return 0.0;
    }
    const double threshold = peak / 1000.0;
    const auto above = std::count_if(centered.values.begin(), centered.values.end(),
                                     [threshold](double m) { return m > threshold; });
    return static_cast<double>(above) / static_cast<double>(centered.size());
}

double laplacian_variance(const Plane& gray) {
    if (gray.width < 3 || gray.height < 3) {
        throw std::invalid_argument("laplacian_variance: plane must be at least 3x3");
    }
    const std::size_t count = (gray.width - 2) * (gray.height - 2);
    // Welford, so large flat frames do not lose precision
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (std::size_t y = 1; y + 1 < gray.height; ++y) {
        for (std::size_t x = 1; x + 1 < gray.width; ++x) {
            const double r = gray(x, y - 1) + gray(x - 1, y) - 4.0 * gray(x, y) + gray(x + 1, y) + gray(x, y + 1);
            ++n;
            const double delta = r - mean;
            mean += delta / static_cast<double>(n);
            m2 += delta * (r - mean);
        }
    }
    return std::max(0.0, m2 / static_cast<double>(count));
}

SharpnessReport classify_blur(const Frame& frame, double h_b) {
    const Plane gray = gray_plane(*frame.pixels());
    SharpnessReport report;
    report.frame = frame.id();
    report.h_b = h_b;
    // frames too small to have a spectrum carry no detail; treat them as blurred
    report.fm_score = gray.width >= 2 && gray.height >= 2 ? sharpness_fm(gray) : 0.0;
    report.lap_var = gray.width >= 3 && gray.height >= 3 ? laplacian_variance(gray) : 0.0;
    report.decision = report.fm_score <= h_b ? BlurDecision::remove : BlurDecision::keep;
    return report;
}

BlurFilterResult filter_blurred(const FrameSet& frames, double h_b, unsigned jobs) {
    if (frames.provenance != Provenance::sampled) {
        throw std::invalid_argument(std::string("filter_blurred: expected sampled frames, got ") +
                                    to_string(frames.provenance));
    }
    BlurFilterResult result;
    result.reports.resize(frames.size());
    parallel_for(frames.size(), jobs,
                 [&](std::size_t i) { result.reports[i] = classify_blur(frames.frames[i], h_b); });
    result.kept.provenance = Provenance::deblurred;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (result.reports[i].decision == BlurDecision::keep) {
            result.kept.frames.push_back(frames.frames[i]);
        }
    }
    return result;
}

}  // namespace prep
