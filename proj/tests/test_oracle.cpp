// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0

#include "support/oracles.hpp"

#include "gsr/oracle.hpp"

#include <doctest.h>

using namespace gsr;
using doctest::Approx;

TEST_CASE("empty scene renders the background") {
    const Camera c = test::test_camera(16, 20.0);
    RenderConfig config;
    config.background = {0.5, 0.0, 1.0};
    const Framebuffer fb = oracle::render_reference({}, c, config);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            CHECK(fb.color(x, y).x == 0.5);
            CHECK(fb.color(x, y).z == 1.0);
            CHECK(fb.transmittance[fb.pixel(x, y)] == 1.0f);
        }
}

TEST_CASE("peak alpha of a single Gaussian") {
    Rng rng(61);
    const Camera c = test::test_camera(63, 50.0); // pixel 31 is centered on the axis
    for (int n = 0; n < 50; ++n) {
        Gaussian g;
        const double z = rng.uniform(1.0, 8.0);
        g.mean = {0, 0, z};
        g.scale = {rng.log_uniform(0.01, 0.5), rng.log_uniform(0.01, 0.5), rng.log_uniform(0.01, 0.5)};
        g.rotation = rng.rotation();
        g.opacity = rng.uniform(0.2, 0.95);
        RenderConfig config;
        config.k = rng.uniform() < 0.5 ? 0.0 : 0.3;

        const auto rg = oracle::prepare_reference(g, 0, c, config);
        REQUIRE(rg);
        const auto peak = oracle::evaluate_reference(*rg, c, 31, 31, config);
        REQUIRE(peak);
        // The axis ray passes through the mean.
        const double v = c.focal() / z;
        const double amp = test::matrix_amplitude(g.scale, g.rotation, {0, 0, 1}, config.k, v);
        const double want = std::min(g.opacity * amp, config.alpha_clamp);
        CHECK(peak->rho2 <= 1e-20);
        CHECK(peak->alpha == Approx(want).epsilon(1e-9));
        CHECK(peak->depth == Approx(z).epsilon(1e-12));
        CHECK(rg->opacity_eff == Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("reference drops what the pipeline drops") {
    const Camera c = test::test_camera(32, 30.0);
    const RenderConfig config;
    Gaussian g;
    g.mean = {0, 0, 0.3};
    g.scale = {0.5, 0.5, 0.5};
    CHECK_FALSE(oracle::prepare_reference(g, 0, c, config));
    g.mean = {0, 0, 3};
    g.opacity = 1e-3;
    CHECK_FALSE(oracle::prepare_reference(g, 0, c, config));
    g.opacity = 0.5;
    CHECK(oracle::prepare_reference(g, 0, c, config));
}

TEST_CASE("reference agrees with the tiled renderer") {
    Rng rng(62);
    for (int n = 0; n < 3; ++n) {
        const Camera c = test::test_camera(64, rng.uniform(40, 70));
        std::vector<Gaussian> scene;
        for (int i = 0; i < 100; ++i) {
            Gaussian g = test::random_view_gaussian(rng, -1.0, 6.0);
            g.scale = g.scale * 0.3;
            scene.push_back(g);
        }
        const RenderConfig config;
        const Framebuffer a = oracle::render_reference(scene, c, config);
        const Framebuffer b = render(scene, c, config);
        double d = 0.0;
        for (std::size_t i = 0; i < a.rgb.size(); ++i) d = std::max(d, double(std::abs(a.rgb[i] - b.rgb[i])));
        CHECK(d <= 1e-6);
        double t = 0.0;
        for (std::size_t i = 0; i < a.transmittance.size(); ++i)
            t = std::max(t, double(std::abs(a.transmittance[i] - b.transmittance[i])));
        CHECK(t <= 1e-6);
    }
}
