#pragma once

#include "prep/image.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace prep {

using Complex = std::complex<double>;

/// Precomputed 1-D DFT of a fixed length. Power-of-two lengths use an
/// iterative radix-2 transform; any other length goes through Bluestein's
/// chirp-z reformulation on a power-of-two grid of size >= 2n-1.
class FftPlan {
public:
    explicit FftPlan(std::size_t n);

    std::size_t size() const { return n_; }

    /// In place: X[k] = sum_j x[j] exp(-2 pi i jk / n).
    void forward(std::span<Complex> data) const;
    /// In place, including the 1/n factor.
    void inverse(std::span<Complex> data) const;

private:
    void transform(std::span<Complex> data, bool inverse) const;
    void radix2(std::span<Complex> data, bool inverse) const;
    void bluestein(std::span<Complex> data, bool inverse) const;

    std::size_t n_;
    bool pow2_;
    std::size_t m_;                    // radix-2 length (n_ itself, or the Bluestein grid)
    std::vector<std::size_t> bitrev_;  // for length m_
    std::vector<Complex> stage_twiddle_;  // per butterfly span h: exp(-i pi j / h), j < h, at offset h - 1
    std::vector<Complex> chirp_;       // exp(-i pi k^2 / n), k < n
    std::vector<Complex> kernel_fft_;  // FFT_m of the conjugate chirp, wrapped
};

/// W x H grid of complex coefficients; coefficient (u, v) sits at v * width + u.
struct Spectrum {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<Complex> coefficients;

    Complex operator()(std::size_t u, std::size_t v) const { return coefficients[v * width + u]; }
    Complex& operator()(std::size_t u, std::size_t v) { return coefficients[v * width + u]; }
};

/// F(u, v) = sum_{x,y} plane(x, y) exp(-2 pi i (ux/W + vy/H)), exact input size.
Spectrum fft2d(const Plane& plane);

/// Inverse of fft2d; returns the real part of the reconstruction.
Plane ifft2d(const Spectrum& spectrum);

/// |F(u, v)| for a real plane. Uses Hermitian symmetry, so it costs roughly
/// half of fft2d; values agree with abs(fft2d(plane)) to rounding.
Plane spectrum_magnitude(const Plane& plane);

/// Moves the zero-frequency term to (W/2, H/2), like numpy.fft.fftshift.
Plane center_shift(const Plane& grid);

}  // namespace prep
