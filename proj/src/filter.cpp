// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0

#include "gsr/filter.hpp"

#include "gsr/culling.hpp"

#include <algorithm>
#include <cmath>

namespace gsr {

std::optional<double> sampling_frequency(const Camera &camera, const Vec3 &mean_view) {
    if (!(mean_view.z > 0.0)) return std::nullopt;
    return camera.focal() / mean_view.z;
}

double max_training_frequency(const Gaussian &g, std::span<const Camera> training_cameras,
                              bool require_visible) {
    double best = -1.0;
    for (const Camera &cam : training_cameras) {
        if (require_visible && !point_in_view_frustum(cam, g.mean)) continue;
        const auto v = sampling_frequency(cam, cam.to_view(g.mean));
        if (v && *v > best) best = *v;
    }
    return best > 0.0 ? best : kUnbounded;
}

FilteredScales filtered_scales(const Vec3 &scale, double k, double v_eff) {
    const double dilation = k / (v_eff * v_eff);
    FilteredScales out;
    for (std::size_t i = 0; i < 3; ++i) {
        out.squared[i] = scale[i] * scale[i] + dilation;
        out.std[i] = std::sqrt(out.squared[i]);
    }
    return out;
}

double perpendicular_determinant(const Vec3 &variance, const Quat &rotation, const Vec3 &direction) {
    const Vec3 d = rotation_matrix(rotation).transposed() * direction;
    return d.x * d.x * variance.y * variance.z + d.y * d.y * variance.x * variance.z +
           d.z * d.z * variance.x * variance.y;
}

double amplitude_factor(const Vec3 &scale, const Quat &rotation, const Vec3 &direction, double k,
                        double v_eff) {
    const Vec3 s2{scale.x * scale.x, scale.y * scale.y, scale.z * scale.z};
    const Vec3 sh = filtered_scales(scale, k, v_eff).squared;
    return std::sqrt(perpendicular_determinant(s2, rotation, direction) /
                     perpendicular_determinant(sh, rotation, direction));
}

double volume_amplitude_factor(const Vec3 &scale, double k, double v_eff) {
    const Vec3 sh = filtered_scales(scale, k, v_eff).squared;
    double ratio = 1.0;
    for (std::size_t i = 0; i < 3; ++i) ratio *= scale[i] * scale[i] / sh[i];
    return std::sqrt(ratio);
}

FilterState filter_state(const Gaussian &g, const Camera &camera, double k) {
    FilterState st;
    st.k = k;
    const Vec3 mean_view = camera.to_view(g.mean);
    st.v_hat = sampling_frequency(camera, mean_view).value_or(g.v_train);
    st.v_eff = std::min(g.v_train, st.v_hat);

    const FilteredScales fs = filtered_scales(g.scale, k, st.v_eff);
    st.s_hat = fs.squared;
    st.filtered_std = fs.std;

    Vec3 to_mean = g.mean - camera.center();
    const double len = norm(to_mean);
    // Degenerate only when the camera sits on the mean; such Gaussians are
    // discarded later as camera-inside.
    const Vec3 dir = len > 0.0 ? to_mean / len : camera.world_to_view.linear().row(2);
    st.amplitude = amplitude_factor(g.scale, g.rotation, dir, k, st.v_eff);
    return st;
}

} // namespace gsr
