// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0

#include "gsr/raster.hpp"

#include "gsr/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace gsr {

std::optional<std::string> validation_error(const RenderConfig &c) {
    if (!(c.k >= 0.0) || !std::isfinite(c.k)) return "kernel size k must be non-negative";
    if (!(c.tau_rho > 0.0)) return "tau_rho must be positive";
    if (!(c.epsilon_angle > 0.0 && c.epsilon_angle < 0.5)) return "angle epsilon must lie in (0, 0.5)";
    if (c.tile_size <= 0) return "tile size must be positive";
    if (!(c.alpha_cutoff > 0.0 && c.alpha_cutoff < c.alpha_clamp && c.alpha_clamp < 1.0))
        return "alpha thresholds must satisfy 0 < cutoff < clamp < 1";
    if (!(c.transmittance_epsilon > 0.0 && c.transmittance_epsilon < 1.0))
        return "transmittance epsilon must lie in (0, 1)";
    if (c.resort_window) return "bounded re-sort windows are not supported; use exact sorting";
    if (c.threads < 0) return "thread count must be non-negative";
    return std::nullopt;
}

void validate(const RenderConfig &config) {
    if (auto err = validation_error(config)) throw ValidationError(*err);
}

Framebuffer::Framebuffer(int w, int h)
    : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0.0f),
      transmittance(static_cast<std::size_t>(w) * h, 1.0f) {}

Vec3 Framebuffer::color(int x, int y) const {
    const std::size_t i = pixel(x, y) * 3;
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

void Framebuffer::set(int x, int y, const Vec3 &c, double t) {
    const std::size_t p = pixel(x, y);
    rgb[p * 3 + 0] = static_cast<float>(c.x);
    rgb[p * 3 + 1] = static_cast<float>(c.y);
    rgb[p * 3 + 2] = static_cast<float>(c.z);
    transmittance[p] = static_cast<float>(t);
}

PixelContext PixelContext::make(const Camera &camera, const RenderConfig &config) {
    return {camera.center(), camera.near, config.tau_rho, config.alpha_cutoff};
}

TileGrid TileGrid::make(const Camera &camera, int tile_size) {
    TileGrid g;
    g.tile_size = tile_size;
    g.width = camera.width;
    g.height = camera.height;
    g.tiles_x = (camera.width + tile_size - 1) / tile_size;
    g.tiles_y = (camera.height + tile_size - 1) / tile_size;
    return g;
}

ScreenRect TileGrid::rect(std::size_t tile) const {
    const int tx = static_cast<int>(tile % static_cast<std::size_t>(tiles_x));
    const int ty = static_cast<int>(tile / static_cast<std::size_t>(tiles_x));
    return {static_cast<double>(tx * tile_size), static_cast<double>(std::min((tx + 1) * tile_size, width)),
            static_cast<double>(ty * tile_size), static_cast<double>(std::min((ty + 1) * tile_size, height))};
}

std::vector<PreparedGaussian> preprocess(std::span<const Gaussian> scene, const Camera &camera,
                                         const RenderConfig &config) {
    std::vector<std::optional<PreparedGaussian>> slots(scene.size());
    parallel_for(scene.size(), config.threads, [&](std::size_t i) {
        const Gaussian &g = scene[i];
        PreparedGaussian pg;
        pg.index = static_cast<std::uint32_t>(i);
        // The filter enlarges the ellipsoid, so it is applied before culling.
        pg.filter = filter_state(g, camera, config.k);
        pg.t_world = gaussian_to_world(g, pg.filter.filtered_std);
        pg.frame = make_frame(camera, pg.t_world);

        if (config.view_frustum_culling &&
            cull_view_frustum(pg.frame, camera, config.tau_rho) == CullDecision::Cull)
            return;

        const AngularBounds bounds = angular_bounds(pg.frame.t_view, config.tau_rho, config.epsilon_angle);
        if (!bounds.valid()) return;
        pg.rect = angles_to_rect(bounds, camera);
        if (pg.rect.empty()) return;

        pg.opacity_eff = std::min(g.opacity * pg.filter.amplitude, config.alpha_clamp);
        if (pg.opacity_eff < config.alpha_cutoff) return;

        pg.mean_view = camera.to_view(g.mean);
        pg.mean_in_front = pg.mean_view.z > 0.0;
        if (pg.mean_in_front) pg.mean_screen = camera.project_view(pg.mean_view);
        pg.color = g.color;
        slots[i] = std::move(pg);
    });

    std::vector<PreparedGaussian> out;
    for (auto &s : slots)
        if (s) out.push_back(std::move(*s));
    return out;
}

TileBins bin_to_tiles(std::span<const PreparedGaussian> prepared, const Camera &camera,
                      const RenderConfig &config) {
    TileBins bins;
    bins.grid = TileGrid::make(camera, config.tile_size);
    bins.lists.resize(bins.grid.count());

    const std::optional<double> near =
        config.near_tile_culling ? std::optional<double>(camera.near) : std::nullopt;
    const int ts = bins.grid.tile_size;

    struct Assignment {
        std::vector<std::uint32_t> tiles;
        std::size_t overlapping = 0;
    };
    std::vector<Assignment> per_gaussian(prepared.size());
    parallel_for(prepared.size(), config.threads, [&](std::size_t i) {
        const PreparedGaussian &pg = prepared[i];
        const ScreenRect &r = pg.rect;
        // Tiles whose closed bounds intersect the rect.
        const int tx0 = std::max(0, static_cast<int>(std::floor(r.x_min / ts)) - 1);
        const int tx1 = std::min(bins.grid.tiles_x - 1, static_cast<int>(std::floor(r.x_max / ts)));
        const int ty0 = std::max(0, static_cast<int>(std::floor(r.y_min / ts)) - 1);
        const int ty1 = std::min(bins.grid.tiles_y - 1, static_cast<int>(std::floor(r.y_max / ts)));
        Assignment &a = per_gaussian[i];
        for (int ty = ty0; ty <= ty1; ++ty)
            for (int tx = tx0; tx <= tx1; ++tx) {
                const std::size_t tile = static_cast<std::size_t>(ty) * bins.grid.tiles_x + tx;
                const ScreenRect tr = bins.grid.rect(tile);
                if (!tr.overlaps(r)) continue;
                ++a.overlapping;
                if (config.tile_culling && tile_cull(pg.frame, pg.mean_screen, pg.mean_in_front, tr,
                                                     config.tau_rho, near) == CullDecision::Cull)
                    continue;
                a.tiles.push_back(static_cast<std::uint32_t>(tile));
            }
    });

    for (std::size_t i = 0; i < per_gaussian.size(); ++i) {
        bins.rect_pairs += per_gaussian[i].overlapping;
        bins.culled_pairs += per_gaussian[i].tiles.size();
        for (std::uint32_t tile : per_gaussian[i].tiles) bins.lists[tile].push_back(static_cast<std::uint32_t>(i));
    }
    return bins;
}

std::optional<Contribution> evaluate_pixel(const PreparedGaussian &pg, int px, int py, const PixelContext &ctx) {
    const double x = px + 0.5;
    const double y = py + 0.5;
    const Mat4 &t = pg.frame.t_prime;
    // T'^T (1, 0, 0, -x) and T'^T (0, 1, 0, -y).
    const Plane plane_x{t.row(0) - Vec4{x * t.m[3][0], x * t.m[3][1], x * t.m[3][2], x * t.m[3][3]}};
    const Plane plane_y{t.row(1) - Vec4{y * t.m[3][0], y * t.m[3][1], y * t.m[3][2], y * t.m[3][3]}};

    const auto closest = closest_point_on_line(plane_x, plane_y);
    if (!closest || closest->rho2 >= ctx.tau_rho) return std::nullopt;

    const double depth = pg.frame.view_depth(closest->point);
    if (depth <= ctx.near) return std::nullopt;

    const double alpha = pg.opacity_eff * std::exp(-0.5 * closest->rho2);
    if (alpha < ctx.alpha_cutoff) return std::nullopt;

    const Vec3 world = pg.t_world.apply(closest->point).xyz();
    Contribution c;
    c.rho2 = closest->rho2;
    c.alpha = alpha;
    c.depth = depth;
    c.color = sh_to_color(pg.color, normalized(world - ctx.camera_center));
    c.source = pg.index;
    return c;
}

BlendResult blend_pixel(std::vector<Contribution> &contributions, const Vec3 &background,
                        double transmittance_epsilon) {
    std::sort(contributions.begin(), contributions.end(), [](const Contribution &a, const Contribution &b) {
        return a.depth < b.depth || (a.depth == b.depth && a.source < b.source);
    });
    Vec3 color;
    double t = 1.0;
    for (const Contribution &c : contributions) {
        color += (c.alpha * t) * c.color;
        t *= 1.0 - c.alpha;
        if (t < transmittance_epsilon) break;
    }
    return {color + t * background, t};
}

Framebuffer render(std::span<const Gaussian> scene, const Camera &camera, const RenderConfig &config,
                   RenderStats *stats) {
    validate(camera);
    validate(config);

    const std::vector<PreparedGaussian> prepared = preprocess(scene, camera, config);
    const TileBins bins = bin_to_tiles(prepared, camera, config);
    const PixelContext ctx = PixelContext::make(camera, config);

    Framebuffer fb(camera.width, camera.height);
    parallel_for(bins.grid.count(), config.threads, [&](std::size_t tile) {
        const ScreenRect tr = bins.grid.rect(tile);
        const auto &list = bins.lists[tile];
        std::vector<Contribution> contributions;
        for (int py = static_cast<int>(tr.y_min); py < static_cast<int>(tr.y_max); ++py)
            for (int px = static_cast<int>(tr.x_min); px < static_cast<int>(tr.x_max); ++px) {
                contributions.clear();
                for (std::uint32_t idx : list)
                    if (auto c = evaluate_pixel(prepared[idx], px, py, ctx)) contributions.push_back(*c);
                const BlendResult b = blend_pixel(contributions, config.background, config.transmittance_epsilon);
                fb.set(px, py, b.color, b.transmittance);
            }
    });

    if (stats) {
        stats->input_gaussians = scene.size();
        stats->prepared_gaussians = prepared.size();
        stats->rect_pairs = bins.rect_pairs;
        stats->tile_pairs = bins.culled_pairs;
    }
    return fb;
}

} // namespace gsr
