// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0

#include "support/oracles.hpp"

#include "gsr/bounding.hpp"

#include <doctest.h>

#include <numbers>

using namespace gsr;
using doctest::Approx;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

Gaussian view_gaussian(const Vec3 &mean, const Vec3 &std_dev, const Quat &q = Quat{}) {
    Gaussian g;
    g.mean = mean;
    g.scale = std_dev;
    g.rotation = q;
    return g;
}

// Camera at the origin, so T_view is the Gaussian-to-world transform.
Mat4 t_view_of(const Gaussian &g) { return gaussian_to_world(g); }

double tangency_residual(const Mat4 &t_view, double tau, const Vec4 &plane) {
    const Vec4 p = t_view.transposed() * plane;
    const double a = tau * p.x * p.x, b = tau * p.y * p.y, c = tau * p.z * p.z, d = p.w * p.w;
    return std::abs(a + b + c - d) / std::max({a, b, c, d});
}

bool unclamped(double angle, double eps) { return std::abs(angle) < kHalfPi - eps - 1e-12; }

} // namespace

TEST_CASE("quadric_coeff") {
    const Mat4 id = Mat4::identity();
    CHECK(quadric_coeff(id, 0, 0, 1.0) == 1.0);
    CHECK(quadric_coeff(id, 0, 2, 1.0) == 0.0);
    CHECK(quadric_coeff(id, 2, 2, 1.0) == 1.0);
    // The w row carries the -1 weight.
    CHECK(quadric_coeff(id, 3, 3, 1.0) == -1.0);

    Rng rng(31);
    for (int n = 0; n < 100; ++n) {
        Mat4 t;
        for (auto &r : t.m)
            for (auto &v : r) v = rng.uniform(-2, 2);
        const double tau = rng.uniform(0.5, 10);
        Eigen::Matrix4d q = Eigen::Vector4d(tau, tau, tau, -1.0).asDiagonal();
        const Eigen::Matrix4d dense = test::em(t) * q * test::em(t).transpose();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) CHECK(quadric_coeff(t, i, j, tau) == Approx(dense(i, j)).epsilon(1e-12));

        const double c = rng.uniform(0.5, 3);
        Mat4 scaled = t;
        for (auto &v : scaled.m[0]) v *= c;
        CHECK(quadric_coeff(scaled, 0, 0, tau) == Approx(c * c * quadric_coeff(t, 0, 0, tau)));
        CHECK(quadric_coeff(scaled, 0, 2, tau) == Approx(c * quadric_coeff(t, 0, 2, tau)));
        CHECK(quadric_coeff(scaled, 2, 2, tau) == quadric_coeff(t, 2, 2, tau));
    }
}

TEST_CASE("isotropic Gaussian on the optical axis") {
    const AngularBounds b = angular_bounds(t_view_of(view_gaussian({0, 0, 5}, {1, 1, 1})), 1.0);
    REQUIRE(b.valid());
    REQUIRE(b.theta.kind == AxisKind::Finite);
    REQUIRE(b.phi.kind == AxisKind::Finite);
    const double want = std::asin(0.2);
    CHECK(want == Approx(0.2014).epsilon(1e-4));
    CHECK(b.theta.lo == Approx(-want).epsilon(1e-14));
    CHECK(b.theta.hi == Approx(want).epsilon(1e-14));
    CHECK(b.phi.lo == Approx(-want).epsilon(1e-14));
    CHECK(b.phi.hi == Approx(want).epsilon(1e-14));

    // Dense angular sampling: the tangency residual is smallest at the roots.
    double best = 1e9, best_angle = 0;
    for (int i = 0; i <= 200000; ++i) {
        const double th = -0.5 + i * 5e-6;
        const double r = tangency_residual(t_view_of(view_gaussian({0, 0, 5}, {1, 1, 1})), 1.0,
                                           {std::cos(th), 0, -std::sin(th), 0});
        if (th > 0 && r < best) best = r, best_angle = th;
    }
    CHECK(best_angle == Approx(want).epsilon(1e-4));
}

TEST_CASE("camera inside the cutoff ellipsoid") {
    const AngularBounds b = angular_bounds(t_view_of(view_gaussian({0, 0, 0.5}, {1, 1, 1})), 1.0);
    CHECK(b.camera_inside);
    CHECK_FALSE(b.valid());
    CHECK(angular_bounds(t_view_of(view_gaussian({0, 0, 2.0}, {1, 1, 1})), 9.0).camera_inside);
    CHECK_FALSE(angular_bounds(t_view_of(view_gaussian({0, 0, 3.01}, {1, 1, 1})), 9.0).camera_inside);
}

TEST_CASE("an axis pierced by the ellipsoid has no bound") {
    // Elongated along x and straddling the camera plane: the view x axis
    // passes through the ellipsoid, so no plane through it bounds phi.
    const Gaussian g = view_gaussian({5, 0, 0.05}, {3, 0.1, 0.1});
    const Mat4 t = t_view_of(g);
    const double s22 = quadric_coeff(t, 1, 1, 1.0), s23 = quadric_coeff(t, 1, 2, 1.0);
    const double s33 = quadric_coeff(t, 2, 2, 1.0);
    CHECK(s23 * s23 - s22 * s33 < 0.0);
    const AngularBounds b = angular_bounds(t, 1.0);
    REQUIRE(b.valid());
    CHECK(b.phi.kind == AxisKind::FullAxis);
    CHECK(b.theta.kind == AxisKind::Finite);
}

TEST_CASE("a Gaussian entirely behind the camera has an empty rect") {
    const AngularBounds b = angular_bounds(t_view_of(view_gaussian({0.2, -0.1, -4}, {0.3, 0.3, 0.3})), 9.0);
    REQUIRE(b.valid());
    CHECK(b.theta.kind == AxisKind::Empty);
    CHECK(b.phi.kind == AxisKind::Empty);
    CHECK(angles_to_rect(b, test::test_camera()).empty());
}

TEST_CASE("angles_to_rect") {
    Camera c = test::test_camera(100, 100.0);
    AngularBounds b;
    b.theta = {AxisKind::Finite, 0.0, 0.0};
    b.phi = {AxisKind::Finite, 0.0, 0.0};
    ScreenRect r = angles_to_rect(b, c);
    CHECK(r.x_min == c.cx);
    CHECK(r.x_max == c.cx);
    CHECK(r.y_min == c.cy);
    CHECK_FALSE(r.empty());

    b.theta = {AxisKind::FullAxis};
    b.phi = {AxisKind::FullAxis};
    r = angles_to_rect(b, c);
    CHECK(r.x_min == 0.0);
    CHECK(r.x_max == 100.0);
    CHECK(r.y_min == 0.0);
    CHECK(r.y_max == 100.0);

    c.cx = 50.0;
    b.theta = {AxisKind::Finite, -std::numbers::pi / 4, std::numbers::pi / 4};
    b.phi = {AxisKind::Finite, 0.0, 0.1};
    r = angles_to_rect(b, c);
    CHECK(r.x_min == 0.0);   // -50 clipped
    CHECK(r.x_max == 100.0); // 150 clipped
    CHECK(r.y_max == Approx(100.0 * std::tan(0.1) + c.cy));
}

TEST_CASE("finite roots touch the cutoff ellipsoid") {
    Rng rng(32);
    int checked = 0;
    for (int n = 0; n < 3000; ++n) {
        const Gaussian g = test::random_view_gaussian(rng);
        const double tau = rng.uniform(1.0, 12.0);
        const Mat4 t = t_view_of(g);
        const AngularBounds b = angular_bounds(t, tau);
        if (!b.valid()) continue;
        for (double a : {b.theta.lo, b.theta.hi})
            if (b.theta.kind == AxisKind::Finite && unclamped(a, kDefaultAngleEpsilon)) {
                CHECK(tangency_residual(t, tau, {std::cos(a), 0, -std::sin(a), 0}) <= 1e-7);
                ++checked;
            }
        for (double a : {b.phi.lo, b.phi.hi})
            if (b.phi.kind == AxisKind::Finite && unclamped(a, kDefaultAngleEpsilon)) {
                CHECK(tangency_residual(t, tau, {0, std::cos(a), -std::sin(a), 0}) <= 1e-7);
                ++checked;
            }
        if (b.theta.kind == AxisKind::Finite) {
            CHECK(b.theta.lo >= -kHalfPi + kDefaultAngleEpsilon);
            CHECK(b.theta.lo <= b.theta.hi);
            CHECK(b.theta.hi <= kHalfPi - kDefaultAngleEpsilon);
        }
    }
    CHECK(checked > 4000);
}

TEST_CASE("bounds contain every covered pixel") {
    Rng rng(33);
    const Camera c = test::test_camera(32, 24.0);
    const double tau = kDefaultTauRho;
    int cases = 0, covered = 0;
    while (cases < 200) {
        Gaussian g = test::random_view_gaussian(rng, -1.5, 5.0);
        const AngularBounds b = angular_bounds(t_view_of(g), tau);
        if (!b.valid()) continue;
        ++cases;
        const ScreenRect r = angles_to_rect(b, c);
        const test::RhoOracle oracle(g.mean, g.scale, g.rotation);
        for (int iy = 0; iy <= 4 * c.height; ++iy)
            for (int ix = 0; ix <= 4 * c.width; ++ix) {
                const double x = 0.25 * ix, y = 0.25 * iy;
                const test::RayMin m = oracle.along(test::pixel_ray(c, x, y));
                if (!(m.rho2 < tau && m.depth > 0.0)) continue;
                ++covered;
                const bool inside = !r.empty() && x >= r.x_min - 1e-6 && x <= r.x_max + 1e-6 &&
                                    y >= r.y_min - 1e-6 && y <= r.y_max + 1e-6;
                CHECK(inside);
            }
    }
    CHECK(covered > 10000);
}

TEST_CASE("bounds are tight for Gaussians in front of the camera") {
    Rng rng(34);
    const Camera c = test::test_camera(64, 48.0);
    const double tau = kDefaultTauRho;
    int tested = 0;
    for (int n = 0; n < 4000 && tested < 100; ++n) {
        Gaussian g = test::random_view_gaussian(rng, 1.0, 6.0);
        g.scale = g.scale * 0.3;
        const Eigen::Matrix3d cov = test::eigen_covariance(g.scale, g.rotation);
        if (g.mean.z - std::sqrt(tau * cov(2, 2)) <= 0.05) continue;
        const AngularBounds b = angular_bounds(t_view_of(g), tau);
        REQUIRE(b.valid());
        REQUIRE(b.theta.kind == AxisKind::Finite);
        REQUIRE(b.phi.kind == AxisKind::Finite);
        const ScreenRect r = angles_to_rect(b, c);
        // Fully on screen, no clipping.
        if (!(r.x_min > 1 && r.x_max < c.width - 1 && r.y_min > 1 && r.y_max < c.height - 1)) continue;
        ++tested;
        const test::RhoOracle oracle(g.mean, g.scale, g.rotation);
        const auto band_min = [&](double x0, double x1, double y0, double y1) {
            double best = 1e300;
            for (double y = y0; y <= y1 + 1e-12; y += 0.05)
                for (double x = x0; x <= x1 + 1e-12; x += 0.05)
                    best = std::min(best, oracle.along(test::pixel_ray(c, x, y)).rho2);
            return best;
        };
        CHECK(band_min(r.x_min, r.x_min + 1, r.y_min, r.y_max) <= tau);
        CHECK(band_min(r.x_max - 1, r.x_max, r.y_min, r.y_max) <= tau);
        CHECK(band_min(r.x_min, r.x_max, r.y_min, r.y_min + 1) <= tau);
        CHECK(band_min(r.x_min, r.x_max, r.y_max - 1, r.y_max) <= tau);
    }
    CHECK(tested == 100);
}
