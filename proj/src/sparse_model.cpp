#include "prep/sparse_model.hpp"

#include "prep/error.hpp"
#include "prep/image.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little, "binary model I/O assumes a little-endian host");

namespace prep {

namespace fs = std::filesystem;

const char* to_string(CameraModel m) {
    switch (m) {
        case CameraModel::SIMPLE_PINHOLE: return "SIMPLE_PINHOLE";
        case CameraModel::PINHOLE: return "PINHOLE";
        case CameraModel::SIMPLE_RADIAL: return "SIMPLE_RADIAL";
        case CameraModel::OPENCV: return "OPENCV";
    }
    return "?";
}

std::optional<CameraModel> camera_model_from_name(const std::string& name) {
    for (auto m : {CameraModel::SIMPLE_PINHOLE, CameraModel::PINHOLE, CameraModel::SIMPLE_RADIAL,
                   CameraModel::OPENCV}) {
        if (name == to_string(m)) {
            return m;
        }
    }
    return std::nullopt;
}

std::optional<CameraModel> camera_model_from_id(int id) {
    switch (id) {
        case 0: return CameraModel::SIMPLE_PINHOLE;
        case 1: return CameraModel::PINHOLE;
        case 2: return CameraModel::SIMPLE_RADIAL;
        case 4: return CameraModel::OPENCV;
        default: return std::nullopt;
    }
}

std::size_t param_count(CameraModel m) {
    switch (m) {
        case CameraModel::SIMPLE_PINHOLE: return 3;
        case CameraModel::PINHOLE: return 4;
        case CameraModel::SIMPLE_RADIAL: return 4;
        case CameraModel::OPENCV: return 8;
    }
    return 0;
}

namespace {

bool single_focal(CameraModel m) { return m == CameraModel::SIMPLE_PINHOLE || m == CameraModel::SIMPLE_RADIAL; }

}  // namespace

double CameraIntrinsics::fy() const { return single_focal(model) ? params.at(0) : params.at(1); }
double CameraIntrinsics::cx() const { return single_focal(model) ? params.at(1) : params.at(2); }
double CameraIntrinsics::cy() const { return single_focal(model) ? params.at(2) : params.at(3); }

std::vector<double> CameraIntrinsics::distortion() const {
    const std::size_t first = single_focal(model) ? 3 : 4;
    return {params.begin() + static_cast<std::ptrdiff_t>(std::min(first, params.size())), params.end()};
}

std::string CameraIntrinsics::check() const {
    if (params.size() != param_count(model)) {
        return std::string(to_string(model)) + " expects " + std::to_string(param_count(model)) + " params, got " +
               std::to_string(params.size());
    }
    if (width == 0 || height == 0) {
        return "zero image size";
    }
    if (!(fx() > 0.0) || !(fy() > 0.0)) {
        return "focal length must be positive";
    }
    if (!(cx() > 0.0 && cx() < static_cast<double>(width)) || !(cy() > 0.0 && cy() < static_cast<double>(height))) {
        return "principal point outside the image";
    }
    return {};
}

const ImagePose* SparseModel::find_image(const std::string& name) const {
    for (const auto& [id, img] : images) {
        if (img.name == name) {
            return &img;
        }
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
//  text format
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        if (i > start) {
            out.push_back(line.substr(start, i - start));
        }
    }
    return out;
}

bool blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

bool comment(std::string_view line) {
    const auto first = line.find_first_not_of(" \t");
    return first != std::string_view::npos && line[first] == '#';
}

class TextFile {
public:
    explicit TextFile(const fs::path& path) : path_(path), in_(path) {
        if (!in_) {
            throw ParseError::at_line(path.filename().string(), 0, "missing or unreadable file");
        }
    }

    /// Next line that is not a comment; blank lines are returned only when keep_blank.
    bool next(std::string& line, bool keep_blank) {
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (comment(line) || (!keep_blank && blank(line))) {
                continue;
            }
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError::at_line(path_.filename().string(), line_no_, what);
    }

    template <typename T>
    T number(std::string_view token, const char* field) const {
        T value{};
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || ptr != token.data() + token.size()) {
            fail(std::string("bad ") + field + " '" + std::string(token) + "'");
        }
        return value;
    }

private:
    fs::path path_;
    std::ifstream in_;
    std::uint64_t line_no_ = 0;
};

void parse_cameras_txt(const fs::path& path, SparseModel& model) {
    TextFile file(path);
    std::string line;
    while (file.next(line, false)) {
        const auto tok = split_ws(line);
        if (tok.size() < 4) {
            file.fail("expected CAMERA_ID MODEL WIDTH HEIGHT PARAMS...");
        }
        CameraIntrinsics cam;
        cam.camera_id = file.number<std::uint32_t>(tok[0], "camera id");
        const auto m = camera_model_from_name(std::string(tok[1]));
        if (!m) {
            file.fail("unsupported camera model " + std::string(tok[1]));
        }
        cam.model = *m;
        cam.width = file.number<std::uint64_t>(tok[2], "width");
        cam.height = file.number<std::uint64_t>(tok[3], "height");
        for (std::size_t i = 4; i < tok.size(); ++i) {
            cam.params.push_back(file.number<double>(tok[i], "parameter"));
        }
        if (const auto problem = cam.check(); !problem.empty()) {
            file.fail(problem);
        }
        if (!model.cameras.emplace(cam.camera_id, cam).second) {
            file.fail("duplicate camera id " + std::to_string(cam.camera_id));
        }
    }
}

void parse_images_txt(const fs::path& path, SparseModel& model) {
    TextFile file(path);
    std::string line;
    while (file.next(line, false)) {
        const auto tok = split_ws(line);
        if (tok.size() < 10) {
            file.fail("expected IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME");
        }
        ImagePose img;
        img.image_id = file.number<std::uint32_t>(tok[0], "image id");
        for (std::size_t i = 0; i < 4; ++i) {
            img.q[i] = file.number<double>(tok[1 + i], "quaternion");
        }
        for (std::size_t i = 0; i < 3; ++i) {
            img.t[i] = file.number<double>(tok[5 + i], "translation");
        }
        img.camera_id = file.number<std::uint32_t>(tok[8], "camera id");
        img.name = std::string(tok[9]);
        for (std::size_t i = 10; i < tok.size(); ++i) {
            img.name += " " + std::string(tok[i]);
        }
        if (!model.cameras.contains(img.camera_id)) {
            file.fail("image " + std::to_string(img.image_id) + " references unknown camera " +
                      std::to_string(img.camera_id));
        }
        if (!model.images.emplace(img.image_id, img).second) {
            file.fail("duplicate image id " + std::to_string(img.image_id));
        }
        // the 2D point line follows; it may be empty
        file.next(line, true);
    }
}

void parse_points_txt(const fs::path& path, SparseModel& model) {
    TextFile file(path);
    std::string line;
    while (file.next(line, false)) {
        const auto tok = split_ws(line);
        if (tok.size() < 8 || (tok.size() - 8) % 2 != 0) {
            file.fail("expected POINT3D_ID X Y Z R G B ERROR (IMAGE_ID POINT2D_IDX)...");
        }
        Point3D p;
        p.id = file.number<std::uint64_t>(tok[0], "point id");
        for (std::size_t i = 0; i < 3; ++i) {
            p.xyz[i] = file.number<double>(tok[1 + i], "coordinate");
        }
        for (std::size_t i = 0; i < 3; ++i) {
            const auto c = file.number<unsigned>(tok[4 + i], "color");
            if (c > 255) {
                file.fail("color out of range");
            }
            p.rgb[i] = static_cast<std::uint8_t>(c);
        }
        p.error = file.number<double>(tok[7], "error");
        for (std::size_t i = 8; i < tok.size(); i += 2) {
            TrackElement el{file.number<std::uint32_t>(tok[i], "track image id"),
                            file.number<std::uint32_t>(tok[i + 1], "track point2d index")};
            if (!model.images.contains(el.image_id)) {
                file.fail("track references unknown image " + std::to_string(el.image_id));
            }
            p.track.push_back(el);
        }
        if (p.track.empty()) {
            file.fail("empty track");
        }
        if (!model.points.emplace(p.id, p).second) {
            file.fail("duplicate point id " + std::to_string(p.id));
        }
    }
}

}  // namespace

SparseModel parse_colmap_text(const fs::path& dir) {
    SparseModel model;
    parse_cameras_txt(dir / "cameras.txt", model);
    parse_images_txt(dir / "images.txt", model);
    parse_points_txt(dir / "points3D.txt", model);
    return model;
}

// ---------------------------------------------------------------------------
//  binary format
// ---------------------------------------------------------------------------

namespace {

class ByteReader {
public:
    ByteReader(const fs::path& path) : file_(path.filename().string()) {
        try {
            bytes_ = read_file_bytes(path);
        } catch (const IoError&) {
            throw ParseError::at_byte(file_, 0, "missing or unreadable file");
        }
    }

    template <typename T>
    T read() {
        if (bytes_.size() - pos_ < sizeof(T)) {
            fail("truncated stream");
        }
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string read_cstring() {
        const auto begin = bytes_.begin() + static_cast<std::ptrdiff_t>(pos_);
        const auto end = std::find(begin, bytes_.end(), std::uint8_t{0});
        if (end == bytes_.end()) {
            fail("unterminated name");
        }
        std::string s(begin, end);
        pos_ += s.size() + 1;
        return s;
    }

    void skip(std::uint64_t n) {
        if (bytes_.size() - pos_ < n) {
            fail("truncated stream");
        }
        pos_ += n;
    }

    std::uint64_t offset() const { return pos_; }
    bool at_end() const { return pos_ == bytes_.size(); }

    [[noreturn]] void fail(const std::string& what, std::optional<std::uint64_t> at = std::nullopt) const {
        throw ParseError::at_byte(file_, at.value_or(pos_), what);
    }

private:
    std::string file_;
    std::vector<std::uint8_t> bytes_;
    std::uint64_t pos_ = 0;
};

}  // namespace

SparseModel parse_colmap_binary(const fs::path& dir) {
    SparseModel model;
    {
        ByteReader r(dir / "cameras.bin");
        const auto count = r.read<std::uint64_t>();
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto record = r.offset();
            CameraIntrinsics cam;
            cam.camera_id = r.read<std::uint32_t>();
            const auto model_id = r.read<std::int32_t>();
            const auto m = camera_model_from_id(model_id);
            if (!m) {
                r.fail("unknown camera model id " + std::to_string(model_id), record + 4);
            }
            cam.model = *m;
            cam.width = r.read<std::uint64_t>();
            cam.height = r.read<std::uint64_t>();
            cam.params.resize(param_count(cam.model));
            for (auto& p : cam.params) {
                p = r.read<double>();
            }
            if (const auto problem = cam.check(); !problem.empty()) {
                r.fail(problem, record);
            }
            if (!model.cameras.emplace(cam.camera_id, cam).second) {
                r.fail("duplicate camera id", record);
            }
        }
        if (!r.at_end()) {
            r.fail("trailing bytes");
        }
    }
    {
        ByteReader r(dir / "images.bin");
        const auto count = r.read<std::uint64_t>();
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto record = r.offset();
            ImagePose img;
            img.image_id = r.read<std::uint32_t>();
            for (auto& v : img.q) {
                v = r.read<double>();
            }
            for (auto& v : img.t) {
                v = r.read<double>();
            }
            img.camera_id = r.read<std::uint32_t>();
            img.name = r.read_cstring();
            const auto n_points = r.read<std::uint64_t>();
            if (n_points > (std::uint64_t{1} << 40)) {
                r.fail("implausible 2D point count");
            }
            r.skip(n_points * (2 * sizeof(double) + sizeof(std::uint64_t)));
            if (!model.cameras.contains(img.camera_id)) {
                r.fail("image references unknown camera " + std::to_string(img.camera_id), record);
            }
            if (!model.images.emplace(img.image_id, img).second) {
                r.fail("duplicate image id", record);
            }
        }
        if (!r.at_end()) {
            r.fail("trailing bytes");
        }
    }
    {
        ByteReader r(dir / "points3D.bin");
        const auto count = r.read<std::uint64_t>();
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto record = r.offset();
            Point3D p;
            p.id = r.read<std::uint64_t>();
            for (auto& v : p.xyz) {
                v = r.read<double>();
            }
            for (auto& c : p.rgb) {
                c = r.read<std::uint8_t>();
            }
            p.error = r.read<double>();
            const auto track_len = r.read<std::uint64_t>();
            if (track_len == 0) {
                r.fail("empty track", record);
            }
            if (track_len > (std::uint64_t{1} << 32)) {
                r.fail("implausible track length");
            }
            p.track.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(track_len, 1 << 16)));
            for (std::uint64_t t = 0; t < track_len; ++t) {
                TrackElement el;
                el.image_id = r.read<std::uint32_t>();
                el.point2d_idx = r.read<std::uint32_t>();
                if (!model.images.contains(el.image_id)) {
                    r.fail("track references unknown image " + std::to_string(el.image_id), record);
                }
                p.track.push_back(el);
            }
            if (!model.points.emplace(p.id, p).second) {
                r.fail("duplicate point id", record);
            }
        }
        if (!r.at_end()) {
            r.fail("trailing bytes");
        }
    }
    return model;
}

// ---------------------------------------------------------------------------
//  writers
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::ofstream open_out(const fs::path& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    return out;
}

template <typename T>
void put(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

}  // namespace

void write_colmap_text(const SparseModel& model, const fs::path& dir) {
    fs::create_directories(dir);
    {
        auto out = open_out(dir / "cameras.txt", false);
        out << "# Camera list with one line of data per camera:\n"
            << "#   CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n"
            << "# Number of cameras: " << model.cameras.size() << "\n";
        for (const auto& [id, cam] : model.cameras) {
            out << id << ' ' << to_string(cam.model) << ' ' << cam.width << ' ' << cam.height;
            for (double p : cam.params) {
                out << ' ' << fmt_double(p);
            }
            out << '\n';
        }
    }
    {
        auto out = open_out(dir / "images.txt", false);
        out << "# Image list with two lines of data per image:\n"
            << "#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n"
            << "#   POINTS2D[] as (X, Y, POINT3D_ID)\n"
            << "# Number of images: " << model.images.size() << "\n";
        for (const auto& [id, img] : model.images) {
            out << id;
            for (double v : img.q) {
                out << ' ' << fmt_double(v);
            }
            for (double v : img.t) {
                out << ' ' << fmt_double(v);
            }
            out << ' ' << img.camera_id << ' ' << img.name << "\n\n";
        }
    }
    {
        auto out = open_out(dir / "points3D.txt", false);
        out << "# 3D point list with one line of data per point:\n"
            << "#   POINT3D_ID, X, Y, Z, R, G, B, ERROR, TRACK[] as (IMAGE_ID, POINT2D_IDX)\n"
            << "# Number of points: " << model.points.size() << "\n";
        for (const auto& [id, p] : model.points) {
            out << id;
            for (double v : p.xyz) {
                out << ' ' << fmt_double(v);
            }
            for (auto c : p.rgb) {
                out << ' ' << static_cast<unsigned>(c);
            }
            out << ' ' << fmt_double(p.error);
            for (const auto& el : p.track) {
                out << ' ' << el.image_id << ' ' << el.point2d_idx;
            }
            out << '\n';
        }
    }
}

void write_colmap_binary(const SparseModel& model, const fs::path& dir) {
    fs::create_directories(dir);
    {
        auto out = open_out(dir / "cameras.bin", true);
        put<std::uint64_t>(out, model.cameras.size());
        for (const auto& [id, cam] : model.cameras) {
            put<std::uint32_t>(out, id);
            put<std::int32_t>(out, static_cast<std::int32_t>(cam.model));
            put<std::uint64_t>(out, cam.width);
            put<std::uint64_t>(out, cam.height);
            for (double p : cam.params) {
                put<double>(out, p);
            }
        }
    }
    {
        auto out = open_out(dir / "images.bin", true);
        put<std::uint64_t>(out, model.images.size());
        for (const auto& [id, img] : model.images) {
            put<std::uint32_t>(out, id);
            for (double v : img.q) {
                put<double>(out, v);
            }
            for (double v : img.t) {
                put<double>(out, v);
            }
            put<std::uint32_t>(out, img.camera_id);
            out.write(img.name.c_str(), static_cast<std::streamsize>(img.name.size() + 1));
            put<std::uint64_t>(out, 0);
        }
    }
    {
        auto out = open_out(dir / "points3D.bin", true);
        put<std::uint64_t>(out, model.points.size());
        for (const auto& [id, p] : model.points) {
            put<std::uint64_t>(out, id);
            for (double v : p.xyz) {
                put<double>(out, v);
            }
            for (auto c : p.rgb) {
                put<std::uint8_t>(out, c);
            }
            put<double>(out, p.error);
            put<std::uint64_t>(out, p.track.size());
            for (const auto& el : p.track) {
                put<std::uint32_t>(out, el.image_id);
                put<std::uint32_t>(out, el.point2d_idx);
            }
        }
    }
}

namespace {

enum class Encoding { none, text, binary };

Encoding detect(const fs::path& dir) {
    if (fs::exists(dir / "cameras.bin") && fs::exists(dir / "images.bin") && fs::exists(dir / "points3D.bin")) {
        return Encoding::binary;
    }
    if (fs::exists(dir / "cameras.txt") && fs::exists(dir / "images.txt") && fs::exists(dir / "points3D.txt")) {
        return Encoding::text;
    }
    return Encoding::none;
}

SparseModel load(const fs::path& dir, Encoding enc) {
    return enc == Encoding::binary ? parse_colmap_binary(dir) : parse_colmap_text(dir);
}

}  // namespace

LocatedModel load_sparse_model(const fs::path& dir) {
    if (const auto enc = detect(dir); enc != Encoding::none) {
        return {load(dir, enc), dir, enc == Encoding::binary, {}};
    }
    std::vector<fs::path> components;
    std::error_code ec;
    for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
        if (it->is_directory() && detect(it->path()) != Encoding::none) {
            components.push_back(it->path());
        }
    }
    if (components.empty()) {
        throw IoError("no sparse model found under " + dir.string());
    }
    std::sort(components.begin(), components.end());
    LocatedModel best;
    bool have = false;
    for (const auto& c : components) {
        const auto enc = detect(c);
        SparseModel m = load(c, enc);
        if (!have || m.images.size() > best.model.images.size()) {
            if (have) {
                best.ignored_components.push_back(best.dir);
            }
            best.model = std::move(m);
            best.dir = c;
            best.binary = enc == Encoding::binary;
            have = true;
        } else {
            best.ignored_components.push_back(c);
        }
    }
    std::sort(best.ignored_components.begin(), best.ignored_components.end());
    return best;
}

}  // namespace prep
