// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0
//
// Exact frustum culling. The point of maximum contribution of a Gaussian
// inside a frustum is the point of the frustum closest to the origin of the
// Gaussian's unit space; frustum planes are pulled back into unit space with
// the transpose of the point transform and the minimum is searched over the
// faces and edges of the resulting polyhedral cone.

#pragma once

#include "gsr/bounding.hpp"
#include "gsr/core.hpp"

#include <array>
#include <optional>

namespace gsr {

// Transforms taking Gaussian unit space to homogeneous viewport space
// (t_prime) and to view space (t_view). Both are built from the same scales.
struct GaussianFrame {
    Mat4 t_prime;
    Mat4 t_view;

    double view_depth(const Vec3 &u) const;
};

GaussianFrame make_frame(const Camera &camera, const Mat4 &gaussian_to_world);

// Four side planes x >= x_min, x <= x_max, y >= y_min, y <= y_max in viewport
// space, optionally truncated by the view-space near plane z >= near. Interior
// points have non-negative plane values.
struct Frustum {
    double x_min = 0.0, x_max = 0.0;
    double y_min = 0.0, y_max = 0.0;
    std::optional<double> near;

    static Frustum from_rect(const ScreenRect &rect, std::optional<double> near = std::nullopt);
    static Frustum viewport(const Camera &camera); // whole image plus the camera's near plane

    // Order: x_min, x_max, y_min, y_max.
    std::array<Plane, 4> side_planes() const;
    Plane near_plane() const; // view space; requires `near`
    bool contains_screen(const Vec2 &p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
};

struct MaxContribution {
    double rho2 = kUnbounded; // minimum squared Mahalanobis distance over the frustum
    Vec3 point_unit;          // its location in unit space
    bool valid = false;       // an admissible candidate in front of the camera exists
};

struct ClosestPoint {
    Vec3 point;
    double rho2 = 0.0;
};

// Plane pullback: returns M^T p.
Plane transform_plane(const Mat4 &m, const Plane &p);

// Point of the plane closest to the origin.
ClosestPoint closest_point_on_plane(const Plane &plane);

// Point of the intersection line of two planes closest to the origin, or
// nullopt when the planes are (nearly) parallel.
std::optional<ClosestPoint> closest_point_on_line(const Plane &a, const Plane &b);

// Minimum rho^2 over the four side planes only (near plane ignored). Selects
// the vertical and horizontal plane nearest to the projected mean and checks
// those 2 faces and their 3 edges; falls back to the full search when the mean
// is not in front of the camera.
MaxContribution min_rho2_in_frustum(const GaussianFrame &frame, const Frustum &frustum,
                                    const Vec2 &mean_screen, bool mean_in_front);

// All 4 faces and 4 edges of the side cone plus the interior test.
MaxContribution min_rho2_in_frustum_naive(const GaussianFrame &frame, const Frustum &frustum);

// Exact minimum over the side cone truncated by the near plane: every face,
// every pairwise edge and every vertex is tried. Requires frustum.near.
MaxContribution min_rho2_in_truncated_frustum(const GaussianFrame &frame, const Frustum &frustum);

enum class CullDecision { Keep, Cull };

// Culls when min rho^2 over the tile frustum is >= tau, when no admissible
// point exists, or (if `near` is given) when the cutoff ellipsoid meets the tile
// frustum only closer than the near plane.
CullDecision tile_cull(const GaussianFrame &frame, const Vec2 &mean_screen, bool mean_in_front,
                       const ScreenRect &tile, double tau_rho, std::optional<double> near);

// Whole-view test against the viewport frustum including the near plane.
CullDecision cull_view_frustum(const GaussianFrame &frame, const Camera &camera, double tau_rho);

// True when the world point projects inside the image and lies beyond the near plane.
bool point_in_view_frustum(const Camera &camera, const Vec3 &world);

} // namespace gsr
