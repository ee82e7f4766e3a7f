#include "prep/nerf_dataset.hpp"

#include "prep/error.hpp"
#include "prep/image.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <regex>

namespace prep {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(DatasetFlavor f) { return f == DatasetFlavor::llff ? "llff" : "blender"; }

namespace {

struct Selection {
    std::vector<const ImagePose*> poses;  // sorted by name
    std::vector<std::string> missing;
};

Selection select_frames(const SparseModel& model, const EmitOptions& options) {
    std::map<std::string, const ImagePose*> by_name;
    for (const auto& [id, img] : model.images) {
        by_name.emplace(img.name, &img);
    }
    Selection sel;
    if (options.retained.empty()) {
        for (const auto& [name, pose] : by_name) {
            sel.poses.push_back(pose);
        }
    } else {
        std::vector<std::string> wanted = options.retained;
        std::sort(wanted.begin(), wanted.end());
        wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
        for (const auto& name : wanted) {
            if (const auto it = by_name.find(name); it != by_name.end()) {
                sel.poses.push_back(it->second);
            } else {
                sel.missing.push_back(name);
            }
        }
    }
    if (!sel.missing.empty() && options.strict) {
        throw PipelineError("pose_missing for " + std::to_string(sel.missing.size()) + " frame(s), first: " +
                            sel.missing.front());
    }
    if (sel.poses.empty()) {
        throw GeometryError("no posed frames to emit");
    }
    return sel;
}

IntrinsicsSummary summarize(const SparseModel& model, const Selection& sel) {
    const auto& cam = model.cameras.at(sel.poses.front()->camera_id);
    for (const auto* p : sel.poses) {
        if (p->camera_id != cam.camera_id && !(model.cameras.at(p->camera_id) == cam)) {
            spdlog::warn("frames use more than one camera; shared intrinsics taken from camera {}", cam.camera_id);
            break;
        }
    }
    IntrinsicsSummary s;
    s.width = cam.width;
    s.height = cam.height;
    s.fx = cam.fx();
    s.fy = cam.fy();
    s.cx = cam.cx();
    s.cy = cam.cy();
    s.camera_angle_x = 2.0 * std::atan(static_cast<double>(cam.width) / (2.0 * cam.fx()));
    return s;
}

std::string relative_path(const EmitOptions& options, const std::string& name) {
    return options.image_dir.empty() ? name : options.image_dir + "/" + name;
}

ordered_json matrix_json(const Mat4& m) {
    ordered_json rows = ordered_json::array();
    for (int r = 0; r < 4; ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < 4; ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
}

}  // namespace

NerfDataset emit_transforms_json(const SparseModel& model, const fs::path& out_dir, const EmitOptions& options) {
    const Selection sel = select_frames(model, options);
    NerfDataset ds;
    ds.flavor = DatasetFlavor::blender_transforms;
    ds.intrinsics = summarize(model, sel);
    ds.pose_missing = sel.missing;

    std::vector<Mat4> c2w;
    c2w.reserve(sel.poses.size());
    for (const auto* p : sel.poses) {
        c2w.push_back(colmap_to_nerf_convention(w2c_to_c2w(*p)));
    }
    const NormalizedPoses normalized = normalize_scene(c2w);
    ds.normalization = normalized.transform;

    ordered_json doc;
    doc["camera_angle_x"] = ds.intrinsics.camera_angle_x;
    if (options.include_intrinsics) {
        doc["fl_x"] = ds.intrinsics.fx;
        doc["fl_y"] = ds.intrinsics.fy;
        doc["cx"] = ds.intrinsics.cx;
        doc["cy"] = ds.intrinsics.cy;
        doc["w"] = ds.intrinsics.width;
        doc["h"] = ds.intrinsics.height;
    }
    doc["frames"] = ordered_json::array();
    for (std::size_t i = 0; i < sel.poses.size(); ++i) {
        NerfFrame frame;
        frame.name = sel.poses[i]->name;
        frame.file_path = relative_path(options, frame.name);
        frame.c2w = normalized.poses[i];
        ordered_json entry;
        entry["file_path"] = frame.file_path;
        entry["transform_matrix"] = matrix_json(frame.c2w);
        doc["frames"].push_back(std::move(entry));
        ds.frames.push_back(std::move(frame));
    }

    fs::create_directories(out_dir);
    ds.file = out_dir / "transforms.json";
    write_text(ds.file, doc.dump(2) + "\n");
    return ds;
}

NerfDataset emit_llff(const SparseModel& model, const fs::path& out_dir, const EmitOptions& options) {
    const Selection sel = select_frames(model, options);
    NerfDataset ds;
    ds.flavor = DatasetFlavor::llff;
    ds.intrinsics = summarize(model, sel);
    ds.pose_missing = sel.missing;

    NpyArray array{sel.poses.size(), 17, {}};
    array.values.reserve(array.rows * array.cols);
    for (const auto* p : sel.poses) {
        const auto& cam = model.cameras.at(p->camera_id);
        NerfFrame frame;
        frame.name = p->name;
        frame.file_path = relative_path(options, p->name);
        frame.c2w = colmap_to_nerf_convention(w2c_to_c2w(*p));
        frame.bounds = compute_bounds(model, *p);
        frame.hwf = {static_cast<double>(cam.height), static_cast<double>(cam.width), cam.fx()};

        const Mat3 r = frame.c2w.topLeftCorner<3, 3>();
        Mat3 llff;
        llff.col(0) = -r.col(1);
        llff.col(1) = r.col(0);
        llff.col(2) = r.col(2);
        for (int row = 0; row < 3; ++row) {
            array.values.push_back(llff(row, 0));
            array.values.push_back(llff(row, 1));
            array.values.push_back(llff(row, 2));
            array.values.push_back(frame.c2w(row, 3));
            array.values.push_back(frame.hwf[static_cast<std::size_t>(row)]);
        }
        array.values.push_back(frame.bounds->near);
        array.values.push_back(frame.bounds->far);
        ds.frames.push_back(std::move(frame));
    }

    fs::create_directories(out_dir);
    ds.file = out_dir / "poses_bounds.npy";
    write_file_bytes(ds.file, encode_npy(array));
    return ds;
}

NerfDataset read_transforms_json(const fs::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw IoError("cannot open " + file.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError::at_line(file.filename().string(), 0, e.what());
    }
    NerfDataset ds;
    ds.flavor = DatasetFlavor::blender_transforms;
    ds.file = file;
    try {
        ds.intrinsics.camera_angle_x = doc.at("camera_angle_x").get<double>();
        ds.intrinsics.fx = doc.value("fl_x", 0.0);
        ds.intrinsics.fy = doc.value("fl_y", 0.0);
        ds.intrinsics.cx = doc.value("cx", 0.0);
        ds.intrinsics.cy = doc.value("cy", 0.0);
        ds.intrinsics.width = doc.value("w", std::uint64_t{0});
        ds.intrinsics.height = doc.value("h", std::uint64_t{0});
        for (const auto& entry : doc.at("frames")) {
            NerfFrame frame;
            frame.file_path = entry.at("file_path").get<std::string>();
            frame.name = fs::path(frame.file_path).filename().string();
            const auto& m = entry.at("transform_matrix");
            if (m.size() != 4) {
                throw ParseError::at_line(file.filename().string(), 0, "transform_matrix must have 4 rows");
            }
            for (int r = 0; r < 4; ++r) {
                if (m[static_cast<std::size_t>(r)].size() != 4) {
                    throw ParseError::at_line(file.filename().string(), 0, "transform_matrix rows must have 4 values");
                }
                for (int c = 0; c < 4; ++c) {
                    frame.c2w(r, c) = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
                }
            }
            ds.frames.push_back(std::move(frame));
        }
    } catch (const json::exception& e) {
        throw ParseError::at_line(file.filename().string(), 0, e.what());
    }
    return ds;
}

NerfDataset read_poses_bounds(const fs::path& file) {
    const NpyArray array = decode_npy(read_file_bytes(file), file.filename().string());
    if (array.cols != 17) {
        throw ParseError::at_byte(file.filename().string(), 0, "expected 17 columns");
    }
    NerfDataset ds;
    ds.flavor = DatasetFlavor::llff;
    ds.file = file;
    for (std::size_t i = 0; i < array.rows; ++i) {
        const double* row = array.values.data() + i * 17;
        Mat3 llff;
        Vec3 t;
        NerfFrame frame;
        for (int r = 0; r < 3; ++r) {
            llff(r, 0) = row[r * 5 + 0];
            llff(r, 1) = row[r * 5 + 1];
            llff(r, 2) = row[r * 5 + 2];
            t(r) = row[r * 5 + 3];
            frame.hwf[static_cast<std::size_t>(r)] = row[r * 5 + 4];
        }
        frame.c2w.topLeftCorner<3, 3>().col(0) = llff.col(1);
        frame.c2w.topLeftCorner<3, 3>().col(1) = -llff.col(0);
        frame.c2w.topLeftCorner<3, 3>().col(2) = llff.col(2);
        frame.c2w.topRightCorner<3, 1>() = t;
        frame.bounds = DepthBounds{row[15], row[16]};
        frame.name = "row" + std::to_string(i);
        ds.frames.push_back(std::move(frame));
    }
    if (!ds.frames.empty()) {
        ds.intrinsics.height = static_cast<std::uint64_t>(ds.frames[0].hwf[0]);
        ds.intrinsics.width = static_cast<std::uint64_t>(ds.frames[0].hwf[1]);
        ds.intrinsics.fx = ds.intrinsics.fy = ds.frames[0].hwf[2];
    }
    return ds;
}

// ---------------------------------------------------------------------------
//  .npy
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint8_t kMagic[6] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kFixedPreamble = 10;  // magic + version + u16 header length

}  // namespace

std::vector<std::uint8_t> encode_npy(const NpyArray& array) {
    if (array.values.size() != array.rows * array.cols) {
        throw std::invalid_argument("encode_npy: value count does not match shape");
    }
    std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" + std::to_string(array.rows) + ", " +
                         std::to_string(array.cols) + "), }";
    const std::size_t unpadded = kFixedPreamble + header.size() + 1;
    header.append((64 - unpadded % 64) % 64, ' ');
    header.push_back('\n');

    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.push_back(0x01);
    out.push_back(0x00);
    const auto len = static_cast<std::uint16_t>(header.size());
    out.push_back(static_cast<std::uint8_t>(len & 0xFF));
    out.push_back(static_cast<std::uint8_t>(len >> 8));
    out.insert(out.end(), header.begin(), header.end());
    const std::size_t payload = array.values.size() * sizeof(double);
    const std::size_t start = out.size();
    out.resize(start + payload);
    std::memcpy(out.data() + start, array.values.data(), payload);  // host is little-endian
    return out;
}

NpyArray decode_npy(const std::vector<std::uint8_t>& bytes, const std::string& file_name) {
    auto fail = [&](std::uint64_t offset, const std::string& what) -> void {
        throw ParseError::at_byte(file_name, offset, what);
    };
    if (bytes.size() < kFixedPreamble || std::memcmp(bytes.data(), kMagic, 6) != 0) {
        fail(0, "bad magic");
    }
    if (bytes[6] != 0x01 || bytes[7] != 0x00) {
        fail(6, "unsupported version");
    }
    const std::size_t header_len = bytes[8] | (static_cast<std::size_t>(bytes[9]) << 8);
    if (bytes.size() < kFixedPreamble + header_len) {
        fail(8, "truncated header");
    }
    if ((kFixedPreamble + header_len) % 64 != 0) {
        fail(8, "preamble not a multiple of 64 bytes");
    }
    const std::string header(bytes.begin() + kFixedPreamble,
                             bytes.begin() + static_cast<std::ptrdiff_t>(kFixedPreamble + header_len));
    static const std::regex grammar(
        R"(^\{'descr': '<f8', 'fortran_order': False, 'shape': \(([0-9]+), ([0-9]+)\), \} *\n$)");
    std::smatch m;
    if (!std::regex_match(header, m, grammar)) {
        fail(kFixedPreamble, "header does not match the expected grammar");
    }
    NpyArray array;
    array.rows = std::stoull(m[1].str());
    array.cols = std::stoull(m[2].str());
    const std::size_t payload = array.rows * array.cols * sizeof(double);
    if (bytes.size() - kFixedPreamble - header_len != payload) {
        fail(kFixedPreamble + header_len, "payload size does not match shape");
    }
    array.values.resize(array.rows * array.cols);
    std::memcpy(array.values.data(), bytes.data() + kFixedPreamble + header_len, payload);
    return array;
}

}  // namespace prep
