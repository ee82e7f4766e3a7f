#include "prep/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace prep {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

Complex mul(Complex a, Complex b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) {
        m <<= 1;
    }
    return m;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n), pow2_(is_pow2(n)), m_(0) {
    if (n == 0) {
        throw std::invalid_argument("FftPlan: length must be positive");
    }
    m_ = pow2_ ? n : next_pow2(2 * n - 1);

    bitrev_.resize(m_);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < m_) {
        ++bits;
    }
    for (std::size_t i = 0; i < m_; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b) {
            r |= ((i >> b) & 1u) << (bits - 1 - b);
        }
        bitrev_[i] = r;
    }
    stage_twiddle_.assign(m_ > 1 ? m_ - 1 : 0, Complex{});
    for (std::size_t half = 1; half < m_; half <<= 1) {
        for (std::size_t j = 0; j < half; ++j) {
            const double angle = -std::numbers::pi * static_cast<double>(j) / static_cast<double>(half);
            stage_twiddle_[half - 1 + j] = {std::cos(angle), std::sin(angle)};
        }
    }

    if (!pow2_) {
        chirp_.resize(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            // k^2 mod 2n keeps the angle small enough to stay accurate
            const std::size_t k2 = (k * k) % (2 * n_);
            const double angle = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n_);
            chirp_[k] = {std::cos(angle), std::sin(angle)};
        }
        kernel_fft_.assign(m_, Complex{});
        kernel_fft_[0] = std::conj(chirp_[0]);
        for (std::size_t k = 1; k < n_; ++k) {
            kernel_fft_[k] = std::conj(chirp_[k]);
            kernel_fft_[m_ - k] = std::conj(chirp_[k]);
        }
        radix2(kernel_fft_, false);
    }
}

void FftPlan::radix2(std::span<Complex> data, bool inverse) const {
    const std::size_t m = data.size();
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = bitrev_[i];
        if (i < j) {
            std::swap(data[i], data[j]);
        }
    }
    // plain arithmetic: std::complex operator* goes through the NaN-checking libcall
    double* d = reinterpret_cast<double*>(data.data());
    const double sign = inverse ? -1.0 : 1.0;
    for (std::size_t i = 0; i + 1 < m; i += 2) {
        const double ar = d[2 * i], ai = d[2 * i + 1];
        const double br = d[2 * i + 2], bi = d[2 * i + 3];
        d[2 * i] = ar + br;
        d[2 * i + 1] = ai + bi;
        d[2 * i + 2] = ar - br;
        d[2 * i + 3] = ai - bi;
    }
    for (std::size_t len = 4; len <= m; len <<= 1) {
        const std::size_t half = len / 2;
        // twiddles for this stage sit contiguously at stage_twiddle_[half - 1 ...]
        const double* w = reinterpret_cast<const double*>(stage_twiddle_.data() + (half - 1));
        for (std::size_t start = 0; start < m; start += len) {
            double* lo = d + 2 * start;
            double* hi = lo + 2 * half;
            for (std::size_t j = 0; j < half; ++j) {
                const double wr = w[2 * j], wi = sign * w[2 * j + 1];
                const double xr = hi[2 * j], xi = hi[2 * j + 1];
                const double br = xr * wr - xi * wi;
                const double bi = xr * wi + xi * wr;
                const double ar = lo[2 * j], ai = lo[2 * j + 1];
                lo[2 * j] = ar + br;
                lo[2 * j + 1] = ai + bi;
                hi[2 * j] = ar - br;
                hi[2 * j + 1] = ai - bi;
            }
        }
    }
}

void FftPlan::bluestein(std::span<Complex> data, bool inverse) const {
    thread_local std::vector<Complex> work;
    work.assign(m_, Complex{});
    for (std::size_t k = 0; k < n_; ++k) {
        const Complex x = inverse ? std::conj(data[k]) : data[k];
        work[k] = mul(x, chirp_[k]);
    }
    radix2(work, false);
    for (std::size_t k = 0; k < m_; ++k) {
        work[k] = mul(work[k], kernel_fft_[k]);
    }
    radix2(work, true);
    const double scale = 1.0 / static_cast<double>(m_);
    for (std::size_t k = 0; k < n_; ++k) {
        const Complex y = mul(work[k], chirp_[k]) * scale;
        data[k] = inverse ? std::conj(y) : y;
    }
}

void FftPlan::transform(std::span<Complex> data, bool inverse) const {
    if (data.size() != n_) {
        throw std::invalid_argument("FftPlan: length mismatch");
    }
    if (pow2_) {
        radix2(data, inverse);
    } else {
        bluestein(data, inverse);
    }
}

void FftPlan::forward(std::span<Complex> data) const { transform(data, false); }

void FftPlan::inverse(std::span<Complex> data) const {
    transform(data, true);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : data) {
        v *= scale;
    }
}

namespace {

void columns(Spectrum& s, const FftPlan& plan, bool inverse) {
    std::vector<Complex> column(s.height);
    for (std::size_t u = 0; u < s.width; ++u) {
        for (std::size_t v = 0; v < s.height; ++v) {
            column[v] = s(u, v);
        }
        if (inverse) {
            plan.inverse(column);
        } else {
            plan.forward(column);
        }
        for (std::size_t v = 0; v < s.height; ++v) {
            s(u, v) = column[v];
        }
    }
}

}  // namespace

Spectrum fft2d(const Plane& plane) {
    if (plane.width == 0 || plane.height == 0) {
        throw std::invalid_argument("fft2d: empty plane");
    }
    Spectrum s{plane.width, plane.height, std::vector<Complex>(plane.size())};
    const FftPlan row_plan(plane.width);
    const FftPlan col_plan(plane.height);
    for (std::size_t y = 0; y < plane.height; ++y) {
        std::span<Complex> row(s.coefficients.data() + y * plane.width, plane.width);
        for (std::size_t x = 0; x < plane.width; ++x) {
            row[x] = plane(x, y);
        }
        row_plan.forward(row);
    }
    columns(s, col_plan, false);
    return s;
}

Plane ifft2d(const Spectrum& spectrum) {
    Spectrum s = spectrum;
    const FftPlan row_plan(s.width);
    const FftPlan col_plan(s.height);
    columns(s, col_plan, true);
    Plane out(s.width, s.height);
    for (std::size_t y = 0; y < s.height; ++y) {
        std::span<Complex> row(s.coefficients.data() + y * s.width, s.width);
        row_plan.inverse(row);
        for (std::size_t x = 0; x < s.width; ++x) {
            out(x, y) = row[x].real();
        }
    }
    return out;
}

Plane spectrum_magnitude(const Plane& plane) {
    const std::size_t w = plane.width;
    const std::size_t h = plane.height;
    if (w == 0 || h == 0) {
        throw std::invalid_argument("spectrum_magnitude: empty plane");
    }
    const std::size_t half = w / 2 + 1;
    const FftPlan row_plan(w);
    const FftPlan col_plan(h);

    // Row transforms for columns u <= w/2 only; two real rows share one complex FFT.
    std::vector<Complex> rows(half * h);
    std::vector<Complex> z(w);
    for (std::size_t y = 0; y < h; y += 2) {
        const bool pair = y + 1 < h;
        for (std::size_t x = 0; x < w; ++x) {
            z[x] = {plane(x, y), pair ? plane(x, y + 1) : 0.0};
        }
        row_plan.forward(z);
        for (std::size_t u = 0; u < half; ++u) {
            const Complex zk = z[u];
            const Complex zc = std::conj(z[(w - u) % w]);
            rows[y * half + u] = 0.5 * (zk + zc);
            if (pair) {
                rows[(y + 1) * half + u] = Complex(0.0, -0.5) * (zk - zc);
            }
        }
    }

    Plane mag(w, h);
    std::vector<Complex> column(h);
    for (std::size_t u = 0; u < half; ++u) {
        for (std::size_t v = 0; v < h; ++v) {
            column[v] = rows[v * half + u];
        }
        col_plan.forward(column);
        for (std::size_t v = 0; v < h; ++v) {
            const double m = std::abs(column[v]);
            mag(u, v) = m;
            // Hermitian symmetry of a real input: |F(u, v)| = |F(-u, -v)|
            if (u != 0 && (w - u) != u) {
                mag(w - u, (h - v) % h) = m;
            }
        }
    }
    return mag;
}

Plane center_shift(const Plane& grid) {
    Plane out(grid.width, grid.height);
    const std::size_t sx = grid.width / 2;
    const std::size_t sy = grid.height / 2;
    for (std::size_t y = 0; y < grid.height; ++y) {
        const std::size_t ty = (y + sy) % grid.height;
        for (std::size_t x = 0; x < grid.width; ++x) {
            out((x + sx) % grid.width, ty) = grid(x, y);
        }
    }
    return out;
}

}  // namespace prep
