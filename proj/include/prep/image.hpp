#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace prep {

/// Interleaved 8-bit image, row-major, `channels` samples per pixel (1 or 3).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<std::uint8_t> data;

    Image() = default;
    Image(int w, int h, int c);
    Image(int w, int h, int c, std::uint8_t fill);

    std::size_t index(int x, int y, int c = 0) const {
        return (static_cast<std::size_t>(y) * width + x) * channels + c;
    }
    std::uint8_t& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
    std::uint8_t at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }

    bool empty() const { return data.empty(); }
    friend bool operator==(const Image&, const Image&) = default;
};

/// Dense grid of doubles, row-major (value(x, y) = values[y * width + x]).
struct Plane {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;

    Plane() = default;
    Plane(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), values(w * h, fill) {}

    double& operator()(std::size_t x, std::size_t y) { return values[y * width + x]; }
    double operator()(std::size_t x, std::size_t y) const { return values[y * width + x]; }
    std::size_t size() const { return values.size(); }
};

/// Luma 0.299 R + 0.587 G + 0.114 B, rounded half-up to 8 bits.
/// Single-channel input is returned unchanged.
Image to_gray(const Image& rgb);

/// to_gray() widened to doubles.
Plane gray_plane(const Image& img);

/// Output pixel (x, y) = input pixel (w-1-x, h-1-y).
Image rotate_180(const Image& img);

/// Area-averaging resample: every output cell is the coverage-weighted mean of
/// the input pixels it overlaps.
Plane area_resize(const Plane& src, std::size_t out_width, std::size_t out_height);

// --- codecs (libpng / libjpeg) ---------------------------------------------

/// Decodes PNG or JPEG (sniffed from the magic bytes) to 3-channel RGB.
/// Throws DecodeError on anything unreadable.
Image decode_image(std::span<const std::uint8_t> bytes);

/// Reads and decodes a file. Throws IoError if the file cannot be opened.
Image read_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const Image& img, int compression_level = 6);
std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality);

/// Writes PNG or JPEG depending on the extension of `path`.
void write_image(const std::filesystem::path& path, const Image& img, int jpeg_quality = 95);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace prep
