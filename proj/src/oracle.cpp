// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0

#include "gsr/oracle.hpp"

#include "gsr/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace gsr::oracle {

namespace {

constexpr double kMinFilteredVariance = 1e-12;

double quad(const Mat3 &m, const Vec3 &a, const Vec3 &b) { return dot(a, m * b); }

} // namespace

std::optional<ReferenceGaussian> prepare_reference(const Gaussian &g, std::uint32_t index,
                                                   const Camera &camera, const RenderConfig &config) {
    const Vec3 origin = camera.center();
    const double depth = camera.to_view(g.mean).z;
    const double v_hat = depth > 0.0 ? camera.focal() / depth : g.v_train;
    const double v_eff = std::min(v_hat, g.v_train);
    const double dilation = config.k / (v_eff * v_eff);

    const Mat3 cov = covariance(g.scale, g.rotation);
    Mat3 cov_hat = cov + Mat3::diagonal({dilation, dilation, dilation});
    for (std::size_t i = 0; i < 3; ++i) cov_hat[i][i] = std::max(cov_hat[i][i], kMinFilteredVariance);

    ReferenceGaussian rg;
    rg.index = index;
    rg.mean = g.mean;
    rg.inv_cov = cov_hat.inverse();
    rg.color = &g.color;

    const Vec3 to_mean = g.mean - origin;
    if (quad(rg.inv_cov, to_mean, to_mean) < config.tau_rho) return std::nullopt;

    // |Sigma| d^T Sigma^-1 d = d^T adj(Sigma) d.
    const Vec3 d = normalized(to_mean);
    const double amplitude = std::sqrt(quad(cov.adjugate(), d, d) / quad(cov_hat.adjugate(), d, d));
    rg.opacity_eff = std::min(g.opacity * amplitude, config.alpha_clamp);
    if (rg.opacity_eff < config.alpha_cutoff) return std::nullopt;
    return rg;
}

std::optional<Contribution> evaluate_reference(const ReferenceGaussian &rg, const Camera &camera,
                                               int px, int py, const RenderConfig &config) {
    const Vec3 origin = camera.center();
    const Vec3 ray_view{(px + 0.5 - camera.cx) / camera.fx, (py + 0.5 - camera.cy) / camera.fy, 1.0};
    const Vec3 ray = camera.world_to_view.linear().transposed() * ray_view;

    // Minimizer of (o + t v - mu)^T A (o + t v - mu) over t.
    const double t = quad(rg.inv_cov, ray, rg.mean - origin) / quad(rg.inv_cov, ray, ray);
    const Vec3 p = origin + t * ray;
    const Vec3 offset = p - rg.mean;
    const double rho2 = quad(rg.inv_cov, offset, offset);
    if (rho2 >= config.tau_rho) return std::nullopt;
    // The ray direction has unit view-space z, so t is the view depth.
    if (t <= camera.near) return std::nullopt;
    const double alpha = rg.opacity_eff * std::exp(-0.5 * rho2);
    if (alpha < config.alpha_cutoff) return std::nullopt;

    Contribution c;
    c.rho2 = rho2;
    c.alpha = alpha;
    c.depth = t;
    c.color = sh_to_color(*rg.color, normalized(p - origin));
    c.source = rg.index;
    return c;
}

Framebuffer render_reference(std::span<const Gaussian> scene, const Camera &camera,
                             const RenderConfig &config) {
    validate(camera);
    validate(config);

    std::vector<ReferenceGaussian> refs;
    for (std::size_t i = 0; i < scene.size(); ++i)
        if (auto rg = prepare_reference(scene[i], static_cast<std::uint32_t>(i), camera, config))
            refs.push_back(*rg);

    Framebuffer fb(camera.width, camera.height);
    parallel_for(static_cast<std::size_t>(camera.height), config.threads, [&](std::size_t row) {
        const int py = static_cast<int>(row);
        std::vector<Contribution> contributions;
        for (int px = 0; px < camera.width; ++px) {
            contributions.clear();
            for (const ReferenceGaussian &rg : refs)
                if (auto c = evaluate_reference(rg, camera, px, py, config)) contributions.push_back(*c);
            const BlendResult b = blend_pixel(contributions, config.background, config.transmittance_epsilon);
            fb.set(px, py, b.color, b.transmittance);
        }
    });
    return fb;
}

} // namespace gsr::oracle
