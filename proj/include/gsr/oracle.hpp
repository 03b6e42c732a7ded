// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference renderer. Every pixel evaluates every Gaussian by
// minimizing the Mahalanobis distance along the pixel ray with the explicit
// inverse of the filtered covariance; no bounding, binning or culling. It
// applies the same thresholds and the same compositing as `render`.

#pragma once

#include "gsr/raster.hpp"

#include <optional>
#include <span>

namespace gsr::oracle {

// Per-frame state of one Gaussian as seen by the reference path.
struct ReferenceGaussian {
    std::uint32_t index = 0;
    Vec3 mean;
    Mat3 inv_cov; // inverse of the filtered covariance
    double opacity_eff = 0.0;
    const ShCoeffs *color = nullptr;
};

// Returns nullopt for Gaussians the camera sits inside of, or whose effective
// opacity falls below the cutoff.
std::optional<ReferenceGaussian> prepare_reference(const Gaussian &g, std::uint32_t index,
                                                   const Camera &camera, const RenderConfig &config);

// Contribution along the ray through the center of pixel (px, py).
std::optional<Contribution> evaluate_reference(const ReferenceGaussian &rg, const Camera &camera,
                                               int px, int py, const RenderConfig &config);

Framebuffer render_reference(std::span<const Gaussian> scene, const Camera &camera,
                             const RenderConfig &config);

} // namespace gsr::oracle
