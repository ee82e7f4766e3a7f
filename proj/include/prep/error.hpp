#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace prep {

/// Invalid or out-of-range configuration value. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure reading or writing the filesystem.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An image file that exists but cannot be decoded.
class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed sparse-model or dataset file. Carries the file and either a
/// 1-based line number (text formats) or a byte offset (binary formats).
class ParseError : public std::runtime_error {
public:
    ParseError(std::string file, std::uint64_t location, bool is_byte_offset, const std::string& what)
        : std::runtime_error(file + (is_byte_offset ? " @byte " : ":") + std::to_string(location) + ": " + what),
          file_(std::move(file)),
          location_(location),
          byte_offset_(is_byte_offset) {}

    static ParseError at_line(std::string file, std::uint64_t line, const std::string& what) {
        return ParseError(std::move(file), line, false, what);
    }
    static ParseError at_byte(std::string file, std::uint64_t offset, const std::string& what) {
        return ParseError(std::move(file), offset, true, what);
    }

    const std::string& file() const noexcept { return file_; }
    std::uint64_t location() const noexcept { return location_; }
    bool is_byte_offset() const noexcept { return byte_offset_; }

private:
    std::string file_;
    std::uint64_t location_;
    bool byte_offset_;
};

/// Geometry that cannot produce a usable dataset (e.g. no points in front of a camera).
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A stage of the pipeline failed irrecoverably. Maps to CLI exit code 3.
class PipelineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace prep
