// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0
//
// Scene and camera ingestion, image output and image metrics.
//
// Formats:
//   * binary little-endian PLY with the 3DGS vertex layout (x, y, z, nx, ny, nz,
//     f_dc_0..2, f_rest_*, opacity, scale_0..2, rot_0..3); stored scales are
//     logarithms, stored opacity is a logit, rot_0 is the quaternion w;
//   * cameras as JSON: either the 3DGS cameras.json layout (position plus
//     camera-to-world rotation) or explicit intrinsics with a 4x4 world_to_view;
//   * 8-bit RGB PNG and a raw float image ("AAAF", u32 width, u32 height, f32 RGB rows).

#pragma once

#include "gsr/core.hpp"
#include "gsr/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gsr {

class ParseError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

struct SceneFile {
    std::vector<Gaussian> gaussians;
    std::filesystem::path source;
    int sh_degree = 0;

    std::size_t size() const { return gaussians.size(); }
};

SceneFile load_ply(const std::filesystem::path &path);
SceneFile parse_ply(std::span<const std::uint8_t> bytes, const std::filesystem::path &source = {});
// Writes every Gaussian with the largest SH degree present, zero padded.
void write_ply(std::span<const Gaussian> gaussians, const std::filesystem::path &path);
std::vector<std::uint8_t> encode_ply(std::span<const Gaussian> gaussians);

enum class CameraRole { Unspecified, Train, Test };

struct CameraEntry {
    Camera camera;
    std::string id;
    std::optional<std::string> image_name;
    CameraRole role = CameraRole::Unspecified;
};

struct CameraSet {
    std::vector<CameraEntry> entries;

    std::vector<Camera> cameras() const;
    std::size_t size() const { return entries.size(); }
};

CameraSet load_cameras(const std::filesystem::path &path);
CameraSet parse_cameras(const std::string &text);
// Writes the explicit-intrinsics layout.
void write_cameras(const CameraSet &set, const std::filesystem::path &path);
std::string encode_cameras(const CameraSet &set);

struct Image {
    int width = 0;
    int height = 0;
    std::vector<float> rgb; // row major, 3 floats per pixel

    Image() = default;
    Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0.0f) {}
};

Image to_image(const Framebuffer &fb);

// round(255 * clamp(c, 0, 1)) per channel, no transfer curve.
void write_png(const Image &image, const std::filesystem::path &path);
Image load_png(const std::filesystem::path &path);

void write_float_image(const Image &image, const std::filesystem::path &path);
Image load_float_image(const std::filesystem::path &path);

// 10 log10(1 / MSE) over all channels; +infinity for identical images.
double psnr(const Image &a, const Image &b);

// Largest absolute per-channel difference.
double max_abs_difference(const Image &a, const Image &b);

} // namespace gsr
