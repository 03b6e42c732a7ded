// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0

#include "gsr/io.hpp"

#include <json.hpp>
#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace gsr {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

using json = nlohmann::json;

std::vector<std::uint8_t> read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
    return data;
}

void write_file(const std::filesystem::path &path, const void *data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(static_cast<const char *>(data), static_cast<std::streamsize>(size));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// PLY

struct PlyProperty {
    std::string name;
    std::size_t offset = 0; // within one vertex record
    std::size_t size = 0;
    bool is_double = false;
};

std::size_t ply_type_size(const std::string &type, bool &is_float, bool &is_double) {
    is_float = type == "float" || type == "float32";
    is_double = type == "double" || type == "float64";
    if (is_float) return 4;
    if (is_double) return 8;
    if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
    if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
    if (type == "int" || type == "uint" || type == "int32" || type == "uint32") return 4;
    return 0;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

int degree_from_rest_count(std::size_t rest) {
    switch (rest) {
    case 0: return 0;
    case 9: return 1;
    case 24: return 2;
    case 45: return 3;
    default: return -1;
    }
}

} // namespace

SceneFile parse_ply(std::span<const std::uint8_t> bytes, const std::filesystem::path &source) {
    const std::string where = source.empty() ? std::string("<memory>") : source.string();
    const auto fail = [&](const std::string &msg) { throw ParseError(where + ": " + msg); };

    // Header: text lines up to and including "end_header\n".
    std::size_t pos = 0;
    std::size_t line_no = 0;
    const auto next_line = [&]() -> std::string {
        const std::size_t start = pos;
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        if (pos >= bytes.size()) fail("header line " + std::to_string(line_no + 1) + ": unterminated header");
        std::string line(reinterpret_cast<const char *>(bytes.data() + start), pos - start);
        ++pos;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };

    if (next_line() != "ply") fail("header line 1: missing 'ply' magic");

    std::size_t vertex_count = 0;
    bool have_vertex = false;
    bool in_vertex = false;
    bool seen_format = false;
    std::vector<PlyProperty> props;
    std::size_t stride = 0;
    while (true) {
        const std::string line = next_line();
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        const std::string at = "header line " + std::to_string(line_no) + ": ";
        if (kw == "end_header") break;
        if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
        if (kw == "format") {
            std::string fmt, ver;
            ls >> fmt >> ver;
            if (fmt != "binary_little_endian") fail(at + "unsupported format '" + fmt + "'");
            seen_format = true;
        } else if (kw == "element") {
            std::string name;
            long long count = -1;
            ls >> name >> count;
            if (ls.fail() || count < 0) fail(at + "malformed element declaration");
            if (name == "vertex") {
                if (have_vertex) fail(at + "duplicate vertex element");
                have_vertex = in_vertex = true;
                vertex_count = static_cast<std::size_t>(count);
            } else {
                if (!have_vertex) fail(at + "element '" + name + "' precedes the vertex element");
                in_vertex = false;
            }
        } else if (kw == "property") {
            std::string type, name;
            ls >> type;
            if (type == "list") fail(at + "list properties are not supported");
            ls >> name;
            if (ls.fail()) fail(at + "malformed property declaration");
            if (!in_vertex) continue;
            bool is_float = false, is_double = false;
            const std::size_t size = ply_type_size(type, is_float, is_double);
            if (size == 0) fail(at + "unknown property type '" + type + "'");
            const bool numeric_needed = name != "nx" && name != "ny" && name != "nz";
            if (numeric_needed && !is_float && !is_double)
                fail(at + "property '" + name + "' must be float or double");
            props.push_back({name, stride, size, is_double});
            stride += size;
        } else {
            fail(at + "unexpected keyword '" + kw + "'");
        }
    }
    if (!seen_format) fail("header: missing format line");
    if (!have_vertex) fail("header: missing vertex element");

    std::map<std::string, const PlyProperty *> by_name;
    for (const auto &p : props) by_name[p.name] = &p;
    const auto require = [&](const std::string &name) -> const PlyProperty * {
        auto it = by_name.find(name);
        if (it == by_name.end()) fail("header: missing required property '" + name + "'");
        return it->second;
    };

    const PlyProperty *pos_p[3] = {require("x"), require("y"), require("z")};
    const PlyProperty *dc_p[3] = {require("f_dc_0"), require("f_dc_1"), require("f_dc_2")};
    const PlyProperty *opacity_p = require("opacity");
    const PlyProperty *scale_p[3] = {require("scale_0"), require("scale_1"), require("scale_2")};
    const PlyProperty *rot_p[4] = {require("rot_0"), require("rot_1"), require("rot_2"), require("rot_3")};

    std::size_t rest_count = 0;
    while (by_name.count("f_rest_" + std::to_string(rest_count))) ++rest_count;
    const int degree = degree_from_rest_count(rest_count);
    if (degree < 0) fail("header: unsupported f_rest count " + std::to_string(rest_count));
    std::vector<const PlyProperty *> rest_p;
    for (std::size_t i = 0; i < rest_count; ++i) rest_p.push_back(by_name["f_rest_" + std::to_string(i)]);

    const std::size_t body = pos;
    if (stride == 0) fail("header: vertex element has no properties");
    if (vertex_count > (bytes.size() - body) / stride)
        fail("byte offset " + std::to_string(bytes.size()) + ": truncated body, expected " +
             std::to_string(vertex_count) + " vertices of " + std::to_string(stride) + " bytes");

    SceneFile scene;
    scene.source = source;
    scene.sh_degree = degree;
    scene.gaussians.reserve(vertex_count);
    const std::size_t per_channel = rest_count / 3;

    for (std::size_t v = 0; v < vertex_count; ++v) {
        const std::size_t base = body + v * stride;
        const auto read = [&](const PlyProperty *p) -> double {
            const std::uint8_t *src = bytes.data() + base + p->offset;
            double value;
            if (p->is_double) {
                std::memcpy(&value, src, 8);
            } else {
                float f;
                std::memcpy(&f, src, 4);
                value = f;
            }
            if (!std::isfinite(value))
                fail("byte offset " + std::to_string(base + p->offset) + ", field '" + p->name +
                     "': non-finite value");
            return value;
        };

        Gaussian g;
        g.mean = {read(pos_p[0]), read(pos_p[1]), read(pos_p[2])};
        g.scale = {std::exp(read(scale_p[0])), std::exp(read(scale_p[1])), std::exp(read(scale_p[2]))};
        g.opacity = sigmoid(read(opacity_p));
        const Quat q{read(rot_p[0]), read(rot_p[1]), read(rot_p[2]), read(rot_p[3])};
        g.color.degree = degree;
        g.color.coeffs.assign(static_cast<std::size_t>(sh_coeff_count(degree)), Vec3{});
        g.color.coeffs[0] = {read(dc_p[0]), read(dc_p[1]), read(dc_p[2])};
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t j = 0; j < per_channel; ++j) g.color.coeffs[j + 1][c] = read(rest_p[c * per_channel + j]);

        const double qn = q.norm();
        if (!(qn > 0.0))
            throw ValidationError(where + ": gaussian " + std::to_string(v) +
                                  ": rotation quaternion has zero norm");
        g.rotation = q.normalized();
        if (auto err = validation_error(g))
            throw ValidationError(where + ": gaussian " + std::to_string(v) + ": " + *err);
        scene.gaussians.push_back(std::move(g));
    }
    return scene;
}

SceneFile load_ply(const std::filesystem::path &path) {
    const auto bytes = read_file(path);
    return parse_ply(bytes, path);
}

std::vector<std::uint8_t> encode_ply(std::span<const Gaussian> gaussians) {
    int degree = 0;
    for (const auto &g : gaussians) degree = std::max(degree, g.color.degree);
    const std::size_t rest_per_channel = static_cast<std::size_t>(sh_coeff_count(degree)) - 1;

    std::ostringstream header;
    header << "ply\nformat binary_little_endian 1.0\nelement vertex " << gaussians.size() << "\n";
    for (const char *n : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"})
        header << "property float " << n << "\n";
    for (std::size_t i = 0; i < 3 * rest_per_channel; ++i) header << "property float f_rest_" << i << "\n";
    for (const char *n : {"opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"})
        header << "property float " << n << "\n";
    header << "end_header\n";

    const std::string h = header.str();
    std::vector<std::uint8_t> out(h.begin(), h.end());
    std::vector<float> rec;
    for (const auto &g : gaussians) {
        rec.clear();
        rec.insert(rec.end(), {static_cast<float>(g.mean.x), static_cast<float>(g.mean.y),
                               static_cast<float>(g.mean.z), 0.0f, 0.0f, 0.0f});
        for (std::size_t c = 0; c < 3; ++c) rec.push_back(static_cast<float>(g.color.coeffs[0][c]));
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t j = 0; j < rest_per_channel; ++j) {
                const std::size_t k = j + 1;
                rec.push_back(k < g.color.coeffs.size() ? static_cast<float>(g.color.coeffs[k][c]) : 0.0f);
            }
        rec.push_back(static_cast<float>(std::log(g.opacity / (1.0 - g.opacity))));
        for (std::size_t c = 0; c < 3; ++c) rec.push_back(static_cast<float>(std::log(g.scale[c])));
        rec.insert(rec.end(), {static_cast<float>(g.rotation.w), static_cast<float>(g.rotation.x),
                               static_cast<float>(g.rotation.y), static_cast<float>(g.rotation.z)});
        const auto *p = reinterpret_cast<const std::uint8_t *>(rec.data());
        out.insert(out.end(), p, p + rec.size() * sizeof(float));
    }
    return out;
}

void write_ply(std::span<const Gaussian> gaussians, const std::filesystem::path &path) {
    const auto bytes = encode_ply(gaussians);
    write_file(path, bytes.data(), bytes.size());
}

// ---------------------------------------------------------------------------
// Cameras

std::vector<Camera> CameraSet::cameras() const {
    std::vector<Camera> out;
    out.reserve(entries.size());
    for (const auto &e : entries) out.push_back(e.camera);
    return out;
}

namespace {

CameraRole parse_role(const std::string &s, const std::string &at) {
    if (s == "train") return CameraRole::Train;
    if (s == "test") return CameraRole::Test;
    throw ParseError(at + "unknown role '" + s + "'");
}

const char *role_name(CameraRole r) {
    switch (r) {
    case CameraRole::Train: return "train";
    case CameraRole::Test: return "test";
    case CameraRole::Unspecified: break;
    }
    return nullptr;
}

std::string id_string(const json &v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw ParseError("id must be a string or an integer");
}

CameraEntry parse_camera_entry(const json &j, const std::string &at) {
    if (!j.is_object()) throw ParseError(at + "expected an object");
    CameraEntry e;
    Camera &c = e.camera;
    e.id = id_string(j.at("id"));
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.contains("cx") ? j.at("cx").get<double>() : 0.5 * c.width;
    c.cy = j.contains("cy") ? j.at("cy").get<double>() : 0.5 * c.height;
    if (j.contains("near")) c.near = j.at("near").get<double>();
    if (j.contains("img_name")) e.image_name = j.at("img_name").get<std::string>();
    if (j.contains("role")) e.role = parse_role(j.at("role").get<std::string>(), at);

    if (j.contains("world_to_view")) {
        const auto &m = j.at("world_to_view");
        if (!m.is_array() || m.size() != 4) throw ParseError(at + "world_to_view must be a 4x4 array");
        for (std::size_t r = 0; r < 4; ++r) {
            if (!m[r].is_array() || m[r].size() != 4) throw ParseError(at + "world_to_view must be a 4x4 array");
            for (std::size_t col = 0; col < 4; ++col) c.world_to_view.m[r][col] = m[r][col].get<double>();
        }
    } else {
        // 3DGS layout: camera-to-world rotation and camera position.
        const auto &p = j.at("position");
        const auto &rot = j.at("rotation");
        if (!p.is_array() || p.size() != 3) throw ParseError(at + "position must have 3 entries");
        if (!rot.is_array() || rot.size() != 3) throw ParseError(at + "rotation must be 3x3");
        Mat3 c2w;
        for (std::size_t r = 0; r < 3; ++r) {
            if (!rot[r].is_array() || rot[r].size() != 3) throw ParseError(at + "rotation must be 3x3");
            for (std::size_t col = 0; col < 3; ++col) c2w.m[r][col] = rot[r][col].get<double>();
        }
        const Vec3 position{p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
        const Mat3 w2c = c2w.transposed();
        c.world_to_view = Mat4::affine(w2c, -(w2c * position));
    }
    if (auto err = validation_error(c)) throw ValidationError(at + *err);
    return e;
}

} // namespace

CameraSet parse_cameras(const std::string &text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &ex) {
        throw ParseError(std::string("camera file: ") + ex.what());
    }
    const json &list = doc.is_object() && doc.contains("cameras") ? doc.at("cameras") : doc;
    if (!list.is_array()) throw ParseError("camera file: expected an array of cameras");

    CameraSet set;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string at = "camera entry " + std::to_string(i) + ": ";
        CameraEntry e;
        try {
            e = parse_camera_entry(list[i], at);
        } catch (const json::exception &ex) {
            throw ParseError(at + ex.what());
        } catch (const ParseError &ex) {
            const std::string msg = ex.what();
            throw ParseError(msg.rfind(at, 0) == 0 ? msg : at + msg);
        }
        if (!ids.insert(e.id).second) throw ValidationError(at + "duplicate id '" + e.id + "'");
        set.entries.push_back(std::move(e));
    }
    return set;
}

CameraSet load_cameras(const std::filesystem::path &path) {
    const auto bytes = read_file(path);
    try {
        return parse_cameras(std::string(bytes.begin(), bytes.end()));
    } catch (const ParseError &ex) {
        throw ParseError(path.string() + ": " + ex.what());
    } catch (const ValidationError &ex) {
        throw ValidationError(path.string() + ": " + ex.what());
    }
}

std::string encode_cameras(const CameraSet &set) {
    json list = json::array();
    for (const auto &e : set.entries) {
        const Camera &c = e.camera;
        json j;
        j["id"] = e.id;
        j["width"] = c.width;
        j["height"] = c.height;
        j["fx"] = c.fx;
        j["fy"] = c.fy;
        j["cx"] = c.cx;
        j["cy"] = c.cy;
        j["near"] = c.near;
        json m = json::array();
        for (const auto &r : c.world_to_view.m) m.push_back({r[0], r[1], r[2], r[3]});
        j["world_to_view"] = m;
        if (e.image_name) j["img_name"] = *e.image_name;
        if (const char *r = role_name(e.role)) j["role"] = r;
        list.push_back(std::move(j));
    }
    return list.dump(2) + "\n";
}

void write_cameras(const CameraSet &set, const std::filesystem::path &path) {
    const std::string text = encode_cameras(set);
    write_file(path, text.data(), text.size());
}

// ---------------------------------------------------------------------------
// Images

Image to_image(const Framebuffer &fb) {
    Image img(fb.width, fb.height);
    img.rgb = fb.rgb;
    return img;
}

void write_png(const Image &image, const std::filesystem::path &path) {
    std::vector<std::uint8_t> pixels(image.rgb.size());
    for (std::size_t i = 0; i < pixels.size(); ++i)
        pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp<double>(image.rgb[i], 0.0, 1.0)));

    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, path.string().c_str(), 0, pixels.data(), 0, nullptr))
        throw IoError("cannot write PNG '" + path.string() + "': " + png.message);
}

Image load_png(const std::filesystem::path &path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.string().c_str()))
        throw IoError("cannot read PNG '" + path.string() + "': " + png.message);
    png.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr)) {
        png_image_free(&png);
        throw IoError("cannot decode PNG '" + path.string() + "': " + png.message);
    }
    Image img(static_cast<int>(png.width), static_cast<int>(png.height));
    for (std::size_t i = 0; i < pixels.size(); ++i) img.rgb[i] = static_cast<float>(pixels[i] / 255.0);
    return img;
}

void write_float_image(const Image &image, const std::filesystem::path &path) {
    std::vector<std::uint8_t> out(12 + image.rgb.size() * sizeof(float));
    std::memcpy(out.data(), "AAAF", 4);
    const std::uint32_t w = static_cast<std::uint32_t>(image.width);
    const std::uint32_t h = static_cast<std::uint32_t>(image.height);
    std::memcpy(out.data() + 4, &w, 4);
    std::memcpy(out.data() + 8, &h, 4);
    if (!image.rgb.empty()) std::memcpy(out.data() + 12, image.rgb.data(), image.rgb.size() * sizeof(float));
    write_file(path, out.data(), out.size());
}

Image load_float_image(const std::filesystem::path &path) {
    const auto bytes = read_file(path);
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "AAAF", 4) != 0)
        throw ParseError(path.string() + ": byte offset 0: missing AAAF magic");
    std::uint32_t w = 0, h = 0;
    std::memcpy(&w, bytes.data() + 4, 4);
    std::memcpy(&h, bytes.data() + 8, 4);
    const std::size_t expected = 12 + static_cast<std::size_t>(w) * h * 3 * sizeof(float);
    if (bytes.size() != expected)
        throw ParseError(path.string() + ": byte offset 12: expected " + std::to_string(expected - 12) +
                         " payload bytes, found " + std::to_string(bytes.size() - 12));
    Image img(static_cast<int>(w), static_cast<int>(h));
    if (!img.rgb.empty()) std::memcpy(img.rgb.data(), bytes.data() + 12, img.rgb.size() * sizeof(float));
    return img;
}

double psnr(const Image &a, const Image &b) {
    if (a.width != b.width || a.height != b.height)
        throw ValidationError("psnr: image dimensions differ");
    if (a.rgb.empty()) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rgb.size(); ++i) {
        const double d = static_cast<double>(a.rgb[i]) - b.rgb[i];
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(a.rgb.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double max_abs_difference(const Image &a, const Image &b) {
    if (a.width != b.width || a.height != b.height)
        throw ValidationError("image dimensions differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.rgb.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a.rgb[i]) - b.rgb[i]));
    return m;
}

} // namespace gsr
