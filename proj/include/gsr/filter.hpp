// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0
//
// Adaptive 3D anti-aliasing filter. Each Gaussian is dilated by k / v'^2 in
// every direction, where v' = min(v_train, f / depth) is the effective
// sampling frequency, and its amplitude is rescaled by the change of the
// covariance determinant perpendicular to the viewing direction only.

#pragma once

#include "gsr/core.hpp"

#include <optional>
#include <span>

namespace gsr {

inline constexpr double kDefaultKernelSize = 0.3;

struct FilterState {
    double k = kDefaultKernelSize;
    double v_hat = kUnbounded; // render-time sampling frequency
    double v_eff = kUnbounded; // min(v_train, v_hat)
    Vec3 s_hat;                // filtered squared scales s_i^2 + k / v_eff^2
    Vec3 filtered_std;         // sqrt(s_hat), used as the scale override
    double amplitude = 1.0;    // perpendicular amplitude factor in (0, 1]
};

// f / z for a view-space mean in front of the camera, f = max(fx, fy).
// Returns nullopt when the mean is on or behind the camera plane.
std::optional<double> sampling_frequency(const Camera &camera, const Vec3 &mean_view);

// Largest f / z over the training cameras that see the mean (mean inside the
// view frustum); with `require_visible == false` every camera with the mean in
// front counts. kUnbounded when no camera qualifies.
double max_training_frequency(const Gaussian &g, std::span<const Camera> training_cameras,
                              bool require_visible = true);

struct FilteredScales {
    Vec3 squared; // s_i^2 + k / v_eff^2
    Vec3 std;     // square roots of the above
};

FilteredScales filtered_scales(const Vec3 &scale, double k, double v_eff);

// |Sigma| d^T Sigma^-1 d for Sigma = R diag(variance) R^T and unit d: the
// determinant of Sigma projected onto the plane normal to d.
double perpendicular_determinant(const Vec3 &variance, const Quat &rotation, const Vec3 &direction);

// sqrt of the ratio of perpendicular covariance determinants, computed in the
// Gaussian's local frame without any matrix inversion. `direction` is the unit
// vector from the camera center to the mean.
double amplitude_factor(const Vec3 &scale, const Quat &rotation, const Vec3 &direction, double k,
                        double v_eff);

// Full-volume factor sqrt(|Sigma| / |Sigma_hat|) of the plain 3D smoothing filter.
double volume_amplitude_factor(const Vec3 &scale, double k, double v_eff);

// Everything the renderer needs for one Gaussian and one camera. A mean behind
// the camera uses v_train as its sampling frequency.
FilterState filter_state(const Gaussian &g, const Camera &camera, double k);

} // namespace gsr
