#pragma once

#include "prep/image.hpp"
#include "prep/ingest.hpp"

#include <vector>

namespace prep {

enum class BlurDecision { keep, remove };

const char* to_string(BlurDecision d);

struct SharpnessReport {
    FrameId frame;
    double fm_score = 0.0;  // in [0, 1]
    double lap_var = 0.0;   // advisory only
    BlurDecision decision = BlurDecision::keep;
    double h_b = 0.0;
};

/// Frequency-domain sharpness: the fraction of centered-spectrum coefficients
/// whose magnitude exceeds max|F| / 1000. An all-zero plane scores 0.
/// Requires at least 2x2.
double sharpness_fm(const Plane& gray);

/// Population variance of the 4-neighbour Laplacian over interior pixels.
/// Requires at least 3x3.
double laplacian_variance(const Plane& gray);

/// Scores a frame and marks it for removal iff fm_score <= h_b.
SharpnessReport classify_blur(const Frame& frame, double h_b);

struct BlurFilterResult {
    FrameSet kept;                         // provenance deblurred
    std::vector<SharpnessReport> reports;  // one per input frame, input order
};

/// Input must have provenance `sampled`.
BlurFilterResult filter_blurred(const FrameSet& frames, double h_b, unsigned jobs = 1);

}  // namespace prep
