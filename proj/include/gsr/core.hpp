// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0
//
// Scene primitives, the pinhole camera and the transforms between Gaussian
// unit space, world space, view space and pixel space.
//
// Conventions used throughout the library:
//   * view space is right handed, the camera looks along +z, x right, y down;
//   * pixel (i, j) covers [i, i+1) x [j, j+1), its center is (i + 0.5, j + 0.5);
//   * the combined transform M = M_vp * P * V maps a world point to
//     homogeneous viewport coordinates whose x/w, y/w are pixel coordinates
//     and whose w equals the view-space depth.

#pragma once

#include "gsr/math.hpp"

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsr {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Rejected input value (bad Gaussian, bad camera, bad configuration).
class ValidationError : public Error {
  public:
    using Error::Error;
};

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// Real spherical-harmonic color coefficients, one RGB triple per basis
// function. coeffs.size() == (degree + 1)^2.
struct ShCoeffs {
    int degree = 0;
    std::vector<Vec3> coeffs{Vec3{}};

    static ShCoeffs from_dc(const Vec3 &dc) { return ShCoeffs{0, {dc}}; }
};

constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

struct Gaussian {
    Vec3 mean;
    Vec3 scale{1.0, 1.0, 1.0}; // standard deviations along the local axes
    Quat rotation;             // unit quaternion (w, x, y, z)
    double opacity = 0.5;
    ShCoeffs color;
    double v_train = kUnbounded; // max training sampling frequency, pixels / world unit
};

// Returns the reason a Gaussian is invalid, or nullopt when it is usable.
std::optional<std::string> validation_error(const Gaussian &g);

// Normalizes the rotation and checks every invariant; throws ValidationError.
Gaussian make_gaussian(const Vec3 &mean, const Vec3 &scale, const Quat &rotation, double opacity,
                       ShCoeffs color = {}, double v_train = kUnbounded);

// Homogeneous plane {x : n.x + d = 0}, stored as (nx, ny, nz, d).
struct Plane {
    Vec4 v;

    Vec3 normal() const { return v.xyz(); }
    double offset() const { return v.w; }
    double eval(const Vec3 &p) const { return v.x * p.x + v.y * p.y + v.z * p.z + v.w; }
};

struct Camera {
    int width = 0;
    int height = 0;
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    Mat4 world_to_view = Mat4::identity();
    double near = 0.01;

    Vec3 center() const;                  // camera origin in world space
    Vec3 to_view(const Vec3 &world) const; // world point -> view space
    // Pixel coordinates of a view-space point with z > 0.
    Vec2 project_view(const Vec3 &view) const;
    double focal() const { return fx > fy ? fx : fy; }
};

std::optional<std::string> validation_error(const Camera &c);
void validate(const Camera &c); // throws ValidationError

// Builds world_to_view for a camera at `eye` looking at `target`; `up` is the
// approximate world direction that should appear upward on screen (-y view).
Mat4 look_at(const Vec3 &eye, const Vec3 &target, const Vec3 &up);

// Sigma = R S S^T R^T.
Mat3 covariance(const Vec3 &scale, const Quat &rotation);

// Maps unit Gaussian space to world space: [R diag(s) | mean].
Mat4 gaussian_to_world(const Gaussian &g, const std::optional<Vec3> &scale_override = std::nullopt);

// Perspective projection into clip space (x, y in [-w, w] across the viewport,
// w = view depth, depth range [near, inf) maps to [-1, 1]).
Mat4 projection_matrix(const Camera &c);
// NDC [-1, 1]^2 -> [0, width] x [0, height], applied to homogeneous coordinates.
Mat4 viewport_matrix(const Camera &c);
// T' = M_vp * P * V * T.
Mat4 combined_transform(const Camera &c, const Mat4 &gaussian_to_world);

// exp(-rho^2 / 2) with rho the Mahalanobis distance. Inverts Sigma, so it is
// only meant for reference computations.
double evaluate_density(const Gaussian &g, const Vec3 &x);

// Degree-0 SH basis constant.
inline constexpr double kShC0 = 0.28209479177387814;

// Reference 3DGS color model: SH evaluated along `direction` (unit), +0.5,
// clamped to [0, 1].
Vec3 sh_to_color(const ShCoeffs &sh, const Vec3 &direction);

} // namespace gsr
