// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0

#include "gsr/bounding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gsr {

namespace {

constexpr double kPi = std::numbers::pi;

// Representative of `root` (mod pi) in (center - pi, center].
double lower_representative(double root, double center) {
    const double k = std::floor((center - root) / kPi);
    return root + k * kPi;
}

// Solves the tangency quadratic of one axis. `ii`, `i3`, `i33` are
// s_ii, s_i3, s_33 and `mean_angle` is atan2(mu_i, mu_z).
AngleInterval solve_axis(double ii, double i3, double i33, double scale33, double mean_angle,
                         double epsilon) {
    const double disc = i3 * i3 - ii * i33;
    if (disc < 0.0) return {AxisKind::FullAxis};
    // The plane z = 0 is (nearly) tangent; the quadratic degenerates.
    if (std::abs(i33) <= 1e-12 * scale33) return {AxisKind::FullAxis};

    const double sq = std::sqrt(disc);
    const double ra = std::atan((i3 + sq) / i33);
    const double rb = std::atan((i3 - sq) / i33);

    // Both roots need one representative below and one above the mean's
    // angle. Of the two assignments only one spans less than pi, and that is
    // the angular extent of the ellipsoid.
    const double a_lo = lower_representative(ra, mean_angle);
    const double b_lo = lower_representative(rb, mean_angle);
    double lo = a_lo, hi = b_lo + kPi;
    if (hi - lo > kPi) {
        lo = b_lo;
        hi = a_lo + kPi;
    }

    // Bring the interval onto the branch that overlaps the forward half space.
    const double half = 0.5 * kPi;
    if (hi <= -half) {
        lo += 2.0 * kPi;
        hi += 2.0 * kPi;
    } else if (lo >= half) {
        lo -= 2.0 * kPi;
        hi -= 2.0 * kPi;
    }

    lo = std::max(-half + epsilon, lo);
    hi = std::min(half - epsilon, hi);
    if (lo > hi) return {AxisKind::Empty};
    return {AxisKind::Finite, lo, hi};
}

} // namespace

double quadric_coeff(const Mat4 &t_view, int i, int j, double tau_rho) {
    const auto &a = t_view.m[static_cast<std::size_t>(i)];
    const auto &b = t_view.m[static_cast<std::size_t>(j)];
    return tau_rho * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) - a[3] * b[3];
}

AngularBounds angular_bounds(const Mat4 &t_view, double tau_rho, double epsilon) {
    AngularBounds out;

    // Camera origin expressed in Gaussian unit space.
    const Mat3 lin = t_view.linear();
    const Vec3 origin_unit = -(lin.inverse() * t_view.translation());
    if (dot(origin_unit, origin_unit) < tau_rho) {
        out.camera_inside = true;
        return out;
    }

    const double s11 = quadric_coeff(t_view, 0, 0, tau_rho);
    const double s22 = quadric_coeff(t_view, 1, 1, tau_rho);
    const double s13 = quadric_coeff(t_view, 0, 2, tau_rho);
    const double s23 = quadric_coeff(t_view, 1, 2, tau_rho);
    const double s33 = quadric_coeff(t_view, 2, 2, tau_rho);

    const auto &z = t_view.m[2];
    const double scale33 = tau_rho * (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) + z[3] * z[3];

    const Vec3 mu = t_view.translation();
    out.theta = solve_axis(s11, s13, s33, scale33, std::atan2(mu.x, mu.z), epsilon);
    out.phi = solve_axis(s22, s23, s33, scale33, std::atan2(mu.y, mu.z), epsilon);
    return out;
}

ScreenRect angles_to_rect(const AngularBounds &bounds, const Camera &camera) {
    ScreenRect r;
    const auto axis = [](const AngleInterval &iv, double f, double c, double extent, double &lo,
                         double &hi) {
        switch (iv.kind) {
        case AxisKind::FullAxis:
            lo = 0.0;
            hi = extent;
            return;
        case AxisKind::Empty:
            lo = 1.0;
            hi = 0.0;
            return;
        case AxisKind::Finite:
            lo = std::max(0.0, f * std::tan(iv.lo) + c);
            hi = std::min(extent, f * std::tan(iv.hi) + c);
            return;
        }
    };
    axis(bounds.theta, camera.fx, camera.cx, camera.width, r.x_min, r.x_max);
    axis(bounds.phi, camera.fy, camera.cy, camera.height, r.y_min, r.y_max);
    return r;
}

} // namespace gsr
