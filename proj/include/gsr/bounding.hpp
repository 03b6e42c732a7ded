// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0
//
// Perspective-correct screen bounds. Planes through the camera's y axis
// (x axis) are fitted tangentially to the cutoff ellipsoid rho^2 = tau in view
// space, which yields angular bounds that stay meaningful when the ellipsoid
// reaches behind the image plane.

#pragma once

#include "gsr/core.hpp"

namespace gsr {

inline constexpr double kDefaultTauRho = 9.0;       // squared cutoff, 3 sigma
inline constexpr double kDefaultAngleEpsilon = 1e-4; // radians kept off +-pi/2

enum class AxisKind {
    Finite,   // [lo, hi] within [-(pi/2 - eps), pi/2 - eps]
    FullAxis, // the ellipsoid is pierced by the pencil axis: no bound
    Empty,    // the ellipsoid lies entirely behind the camera on this axis
};

struct AngleInterval {
    AxisKind kind = AxisKind::FullAxis;
    double lo = 0.0;
    double hi = 0.0;
};

struct AngularBounds {
    bool camera_inside = false; // no tangent plane exists; the Gaussian is discarded
    AngleInterval theta;        // horizontal, angle of x/z
    AngleInterval phi;          // vertical, angle of y/z

    bool valid() const { return !camera_inside; }
};

// Continuous pixel-space rectangle, clipped to the viewport. Empty when
// x_min > x_max or y_min > y_max.
struct ScreenRect {
    double x_min = 0.0, x_max = -1.0;
    double y_min = 0.0, y_max = -1.0;

    bool empty() const { return x_min > x_max || y_min > y_max; }
    bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
    bool overlaps(const ScreenRect &o) const {
        return !empty() && !o.empty() && x_min <= o.x_max && x_max >= o.x_min && y_min <= o.y_max &&
               y_max >= o.y_min;
    }
};

// s_ij = <t, T_i (.) T_j> with t = (tau, tau, tau, -1) and T_i the i-th
// (zero based) row of the Gaussian-to-view transform.
double quadric_coeff(const Mat4 &t_view, int i, int j, double tau_rho);

// Tangent-plane angles of the cutoff ellipsoid. t_view must be built with the
// filtered scales.
AngularBounds angular_bounds(const Mat4 &t_view, double tau_rho, double epsilon = kDefaultAngleEpsilon);

// x = fx tan(theta) + cx, y = fy tan(phi) + cy, clipped to the viewport.
// Precondition: bounds.valid().
ScreenRect angles_to_rect(const AngularBounds &bounds, const Camera &camera);

} // namespace gsr
