// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0

#include "gsr/core.hpp"

#include <algorithm>
#include <cmath>

namespace gsr {

namespace {

bool finite(const Vec3 &v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

// Real SH basis constants of the reference 3DGS implementation.
constexpr double kC0 = kShC0;
constexpr double kC1 = 0.4886025119029199;
constexpr double kC2[] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                          -1.0925484305920792, 0.5462742152960396};
constexpr double kC3[] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                          0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                          -0.5900435899266435};

} // namespace

std::optional<std::string> validation_error(const Gaussian &g) {
    if (!finite(g.mean)) return "mean is not finite";
    if (!finite(g.scale)) return "scale is not finite";
    if (!(g.scale.x > 0.0 && g.scale.y > 0.0 && g.scale.z > 0.0)) return "scale must be positive";
    const double qn = g.rotation.norm();
    if (!std::isfinite(qn) || qn == 0.0) return "rotation quaternion has zero or non-finite norm";
    if (std::abs(qn - 1.0) > 1e-9) return "rotation quaternion is not normalized";
    if (!(g.opacity > 0.0 && g.opacity < 1.0)) return "opacity must lie in (0, 1)";
    if (g.color.degree < 0 || g.color.degree > 3) return "SH degree must be in [0, 3]";
    if (g.color.coeffs.size() != static_cast<std::size_t>(sh_coeff_count(g.color.degree)))
        return "SH coefficient count does not match degree";
    for (const auto &c : g.color.coeffs)
        if (!finite(c)) return "SH coefficient is not finite";
    if (!(g.v_train > 0.0)) return "training frequency must be positive or unbounded";
    return std::nullopt;
}

Gaussian make_gaussian(const Vec3 &mean, const Vec3 &scale, const Quat &rotation, double opacity,
                       ShCoeffs color, double v_train) {
    Gaussian g;
    g.mean = mean;
    g.scale = scale;
    const double qn = rotation.norm();
    if (!std::isfinite(qn) || qn == 0.0)
        throw ValidationError("rotation quaternion has zero or non-finite norm");
    g.rotation = rotation.normalized();
    g.opacity = opacity;
    g.color = std::move(color);
    g.v_train = v_train;
    if (auto err = validation_error(g)) throw ValidationError(*err);
    return g;
}

Vec3 Camera::center() const { return rigid_inverse(world_to_view).translation(); }

Vec3 Camera::to_view(const Vec3 &world) const { return world_to_view.apply(world).xyz(); }

Vec2 Camera::project_view(const Vec3 &v) const { return {fx * v.x / v.z + cx, fy * v.y / v.z + cy}; }

std::optional<std::string> validation_error(const Camera &c) {
    if (c.width <= 0 || c.height <= 0) return "image size must be positive";
    if (!(c.fx > 0.0 && c.fy > 0.0)) return "focal lengths must be positive";
    if (!(c.near > 0.0) || !std::isfinite(c.near)) return "near plane must be positive";
    if (!(c.cx > 0.0 && c.cx < c.width && c.cy > 0.0 && c.cy < c.height))
        return "principal point must lie inside the image";
    for (const auto &r : c.world_to_view.m)
        for (double v : r)
            if (!std::isfinite(v)) return "world_to_view is not finite";
    const auto &m = c.world_to_view.m;
    if (m[3][0] != 0.0 || m[3][1] != 0.0 || m[3][2] != 0.0 || m[3][3] != 1.0)
        return "world_to_view bottom row must be (0, 0, 0, 1)";
    const Mat3 r = c.world_to_view.linear();
    const Mat3 rrt = r * r.transposed();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (std::abs(rrt[i][j] - (i == j ? 1.0 : 0.0)) > 1e-6)
                return "world_to_view rotation is not orthonormal";
    if (r.determinant() < 0.0) return "world_to_view rotation has negative determinant";
    return std::nullopt;
}

void validate(const Camera &c) {
    if (auto err = validation_error(c)) throw ValidationError(*err);
}

Mat4 look_at(const Vec3 &eye, const Vec3 &target, const Vec3 &up) {
    const Vec3 z = normalized(target - eye);
    const Vec3 x = normalized(cross(z, up));
    const Vec3 y = cross(z, x);
    Mat3 r;
    r.m[0] = {x.x, x.y, x.z};
    r.m[1] = {y.x, y.y, y.z};
    r.m[2] = {z.x, z.y, z.z};
    return Mat4::affine(r, -(r * eye));
}

Mat3 covariance(const Vec3 &scale, const Quat &rotation) {
    const Mat3 rs = rotation_matrix(rotation) * Mat3::diagonal(scale);
    return rs * rs.transposed();
}

Mat4 gaussian_to_world(const Gaussian &g, const std::optional<Vec3> &scale_override) {
    const Vec3 s = scale_override.value_or(g.scale);
    return Mat4::affine(rotation_matrix(g.rotation) * Mat3::diagonal(s), g.mean);
}

Mat4 projection_matrix(const Camera &c) {
    Mat4 p;
    p.m[0] = {2.0 * c.fx / c.width, 0.0, 2.0 * c.cx / c.width - 1.0, 0.0};
    p.m[1] = {0.0, 2.0 * c.fy / c.height, 2.0 * c.cy / c.height - 1.0, 0.0};
    p.m[2] = {0.0, 0.0, 1.0, -2.0 * c.near};
    p.m[3] = {0.0, 0.0, 1.0, 0.0};
    return p;
}

Mat4 viewport_matrix(const Camera &c) {
    Mat4 v;
    v.m[0] = {0.5 * c.width, 0.0, 0.0, 0.5 * c.width};
    v.m[1] = {0.0, 0.5 * c.height, 0.0, 0.5 * c.height};
    v.m[2] = {0.0, 0.0, 1.0, 0.0};
    v.m[3] = {0.0, 0.0, 0.0, 1.0};
    return v;
}

Mat4 combined_transform(const Camera &c, const Mat4 &t) {
    return viewport_matrix(c) * projection_matrix(c) * c.world_to_view * t;
}

double evaluate_density(const Gaussian &g, const Vec3 &x) {
    const Vec3 d = x - g.mean;
    const Mat3 inv = covariance(g.scale, g.rotation).inverse();
    return std::exp(-0.5 * dot(d, inv * d));
}

Vec3 sh_to_color(const ShCoeffs &sh, const Vec3 &dir) {
    const auto &c = sh.coeffs;
    Vec3 result = kC0 * c[0];
    if (sh.degree > 0) {
        const double x = dir.x, y = dir.y, z = dir.z;
        result = result - kC1 * y * c[1] + kC1 * z * c[2] - kC1 * x * c[3];
        if (sh.degree > 1) {
            const double xx = x * x, yy = y * y, zz = z * z;
            const double xy = x * y, yz = y * z, xz = x * z;
            result = result + kC2[0] * xy * c[4] + kC2[1] * yz * c[5] +
                     kC2[2] * (2.0 * zz - xx - yy) * c[6] + kC2[3] * xz * c[7] +
                     kC2[4] * (xx - yy) * c[8];
            if (sh.degree > 2) {
                result = result + kC3[0] * y * (3.0 * xx - yy) * c[9] + kC3[1] * xy * z * c[10] +
                         kC3[2] * y * (4.0 * zz - xx - yy) * c[11] +
                         kC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * c[12] +
                         kC3[4] * x * (4.0 * zz - xx - yy) * c[13] +
                         kC3[5] * z * (xx - yy) * c[14] + kC3[6] * x * (xx - 3.0 * yy) * c[15];
            }
        }
    }
    for (std::size_t i = 0; i < 3; ++i) result[i] = std::clamp(result[i] + 0.5, 0.0, 1.0);
    return result;
}

} // namespace gsr
