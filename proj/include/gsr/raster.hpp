// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0
//
// Tile-based rasterizer that evaluates every Gaussian exactly in 3D: each
// pixel ray is the intersection of two screen planes pulled back into the
// Gaussian's unit space, and the Gaussian contributes with its value at the
// point of the ray closest to the unit-space origin. Contributions are sorted
// per pixel by the depth of that point and composited front to back.

#pragma once

#include "gsr/bounding.hpp"
#include "gsr/core.hpp"
#include "gsr/culling.hpp"
#include "gsr/filter.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gsr {

struct RenderConfig {
    double k = kDefaultKernelSize;
    double tau_rho = kDefaultTauRho;
    double epsilon_angle = kDefaultAngleEpsilon;
    int tile_size = 16;
    double alpha_cutoff = 1.0 / 255.0;
    double alpha_clamp = 0.999;
    double transmittance_epsilon = 1e-4;
    Vec3 background{0.0, 0.0, 0.0};
    // Bounded re-sort window; only exact per-pixel sorting (nullopt) is implemented.
    std::optional<std::size_t> resort_window;

    bool view_frustum_culling = true;
    bool tile_culling = true;
    bool near_tile_culling = true; // also drop tiles reached only in front of the near plane
    int threads = 1;               // 0 = hardware concurrency
};

std::optional<std::string> validation_error(const RenderConfig &config);
void validate(const RenderConfig &config); // throws ValidationError

struct PreparedGaussian {
    std::uint32_t index = 0; // position in the source scene
    GaussianFrame frame;     // unit space -> viewport / view space, filtered scales
    Mat4 t_world;            // unit space -> world space, filtered scales
    FilterState filter;
    double opacity_eff = 0.0; // opacity * amplitude, clamped to alpha_clamp
    ScreenRect rect;
    Vec3 mean_view;
    Vec2 mean_screen; // meaningful only when mean_in_front
    bool mean_in_front = false;
    ShCoeffs color;
};

struct Contribution {
    double rho2 = 0.0;
    double alpha = 0.0;
    double depth = 0.0; // view z of the max-contribution point
    Vec3 color;
    std::uint32_t source = 0;
};

// Final composited color plus remaining transmittance per pixel, row major.
struct Framebuffer {
    int width = 0;
    int height = 0;
    std::vector<float> rgb; // 3 floats per pixel
    std::vector<float> transmittance;

    Framebuffer() = default;
    Framebuffer(int w, int h);

    std::size_t pixel(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    Vec3 color(int x, int y) const;
    void set(int x, int y, const Vec3 &c, double t);
};

// Per-frame values the per-pixel evaluation needs besides the Gaussian.
struct PixelContext {
    Vec3 camera_center;
    double near = 0.0;
    double tau_rho = kDefaultTauRho;
    double alpha_cutoff = 1.0 / 255.0;

    static PixelContext make(const Camera &camera, const RenderConfig &config);
};

struct TileGrid {
    int tiles_x = 0;
    int tiles_y = 0;
    int tile_size = 16;
    int width = 0;
    int height = 0;

    static TileGrid make(const Camera &camera, int tile_size);
    std::size_t count() const { return static_cast<std::size_t>(tiles_x) * tiles_y; }
    ScreenRect rect(std::size_t tile) const; // continuous pixel bounds
};

struct TileBins {
    TileGrid grid;
    // Per tile, positions into the prepared list, ascending.
    std::vector<std::vector<std::uint32_t>> lists;
    std::size_t rect_pairs = 0;   // Gaussian/tile pairs from rect overlap alone
    std::size_t culled_pairs = 0; // pairs remaining after tile culling
};

struct RenderStats {
    std::size_t input_gaussians = 0;
    std::size_t prepared_gaussians = 0;
    std::size_t rect_pairs = 0;
    std::size_t tile_pairs = 0;
};

// Filter, view-frustum cull and bound every Gaussian. Preserves scene order.
std::vector<PreparedGaussian> preprocess(std::span<const Gaussian> scene, const Camera &camera,
                                         const RenderConfig &config);

TileBins bin_to_tiles(std::span<const PreparedGaussian> prepared, const Camera &camera,
                      const RenderConfig &config);

// Contribution of one Gaussian to the center of pixel (px, py).
std::optional<Contribution> evaluate_pixel(const PreparedGaussian &pg, int px, int py,
                                           const PixelContext &ctx);

struct BlendResult {
    Vec3 color;
    double transmittance = 1.0;
};

// Sorts by (depth, source) and composites front to back over `background`.
BlendResult blend_pixel(std::vector<Contribution> &contributions, const Vec3 &background,
                        double transmittance_epsilon);

Framebuffer render(std::span<const Gaussian> scene, const Camera &camera, const RenderConfig &config,
                   RenderStats *stats = nullptr);

} // namespace gsr
