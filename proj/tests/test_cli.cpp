// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0

#include "support/oracles.hpp"
#include "support/scratch.hpp"

#include "gsr/cli.hpp"

#include <doctest.h>

#include <numbers>
#include <sstream>

using namespace gsr;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string> &args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

bool contains(const std::string &s, const std::string &needle) { return s.find(needle) != std::string::npos; }

std::vector<std::string> lines(const std::string &s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

// Scene and a one-camera set with the camera at the origin looking down +z.
fs::path write_fixture(const std::string &name, const std::vector<Gaussian> &scene, int size = 32) {
    const fs::path dir = test::scratch_dir(name);
    write_ply(scene, dir / "scene.ply");
    CameraSet set;
    CameraEntry e;
    e.id = "front";
    e.camera = test::test_camera(size, 30.0);
    set.entries.push_back(e);
    write_cameras(set, dir / "cameras.json");
    return dir;
}

std::vector<std::string> scene_args(const fs::path &dir) {
    return {"--scene", (dir / "scene.ply").string(), "--cameras", (dir / "cameras.json").string()};
}

std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string> &b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace

TEST_CASE("synth") {
    const fs::path dir = test::scratch_dir("cli_synth");
    Run r = run({"synth", "--seed", "3", "--n", "0", "--out", (dir / "empty").string()});
    CHECK(r.code == 0);
    CHECK(load_ply(dir / "empty" / "scene.ply").size() == 0);
    CHECK(load_cameras(dir / "empty" / "cameras.json").size() == 3);

    r = run({"synth", "--seed", "11", "--n", "100", "--out", (dir / "a").string()});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "100 gaussians"));
    r = run({"synth", "--seed", "11", "--n", "100", "--out", (dir / "b").string()});
    CHECK(r.code == 0);
    CHECK(test::read_bytes(dir / "a" / "scene.ply") == test::read_bytes(dir / "b" / "scene.ply"));
    CHECK(test::read_bytes(dir / "a" / "cameras.json") == test::read_bytes(dir / "b" / "cameras.json"));
    run({"synth", "--seed", "12", "--n", "100", "--out", (dir / "c").string()});
    CHECK(test::read_bytes(dir / "a" / "scene.ply") != test::read_bytes(dir / "c" / "scene.ply"));

    const SceneFile s = load_ply(dir / "a" / "scene.ply");
    REQUIRE(s.size() == 100);
    for (const Gaussian &g : s.gaussians) {
        CHECK_FALSE(validation_error(g));
        CHECK(std::abs(g.mean.x) <= 0.5 + 1e-6);
        CHECK(g.scale.y >= 1e-3 * (1 - 1e-6));
        CHECK(g.scale.y <= 0.3 * (1 + 1e-6));
        CHECK(g.opacity >= 0.2 - 1e-6);
        CHECK(g.opacity <= 0.95 + 1e-6);
    }
    const CameraSet cams = load_cameras(dir / "a" / "cameras.json");
    for (const auto &e : cams.entries) {
        CHECK(e.camera.width == 64);
        // Every ring camera looks at the origin from distance ~2.04.
        CHECK(e.camera.to_view({0, 0, 0}).z == doctest::Approx(std::sqrt(4.0 + 0.16)));
    }

    CHECK(run({"synth", "--n", "5"}).code == kExitUsage);
}

TEST_CASE("render and oracle-render") {
    const fs::path empty = write_fixture("cli_empty", {});
    for (const std::string cmd : {"render", "oracle-render"}) {
        const fs::path out = empty / (cmd + "_out");
        const Run r = run(std::vector<std::string>{cmd} + scene_args(empty) +
                          std::vector<std::string>{"--out", out.string(), "--background", "0.25,0.5,1"});
        CHECK(r.code == 0);
        CHECK(contains(r.out, "front: 32x32"));
        const Image img = load_float_image(out / "front.aaaf");
        CHECK(img.width == 32);
        for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
            CHECK(img.rgb[i] == 0.25f);
            CHECK(img.rgb[i + 2] == 1.0f);
        }
        const Image png = load_png(out / "front.png");
        CHECK(png.rgb[1] == doctest::Approx(128.0 / 255.0));

        const std::string missing = (empty / "nope.ply").string();
        const Run m = run({cmd, "--scene", missing, "--cameras", (empty / "cameras.json").string(), "--out",
                           out.string()});
        CHECK(m.code == kExitIo);
        CHECK(contains(m.err, missing));
    }

    Rng rng(81);
    std::vector<Gaussian> scene;
    for (int i = 0; i < 60; ++i) {
        Gaussian g = test::random_view_gaussian(rng, -1.0, 6.0);
        g.scale = g.scale * 0.3;
        scene.push_back(g);
    }
    const fs::path dir = write_fixture("cli_scene", scene);
    const Run a = run(std::vector<std::string>{"render"} + scene_args(dir) + std::vector<std::string>{"--out", (dir / "a").string()});
    CHECK(a.code == 0);
    CHECK(contains(a.out, "tile pairs"));
    const Run b = run(std::vector<std::string>{"oracle"} + scene_args(dir) + std::vector<std::string>{"--out", (dir / "b").string()});
    CHECK(b.code == 0);
    const Run c = run({"compare", (dir / "a").string(), (dir / "b").string(), "--tolerance", "1e-6"});
    CHECK(c.code == 0);
    CHECK(contains(c.out, "front.aaaf: max abs diff"));

    // Thread count never changes the output.
    const Run t = run(std::vector<std::string>{"render"} + scene_args(dir) +
                      std::vector<std::string>{"--out", (dir / "t").string(), "--threads", "3"});
    CHECK(t.code == 0);
    CHECK(test::read_bytes(dir / "a" / "front.aaaf") == test::read_bytes(dir / "t" / "front.aaaf"));
}

TEST_CASE("camera selection and scaling") {
    const fs::path dir = test::scratch_dir("cli_select");
    REQUIRE(run({"synth", "--seed", "5", "--n", "20", "--ring", "3", "--width", "16", "--height", "12", "--out",
                 dir.string()})
                .code == 0);
    const std::vector<std::string> args = {"--scene", (dir / "scene.ply").string(), "--cameras",
                                           (dir / "cameras.json").string()};
    Run r = run(std::vector<std::string>{"render"} + args +
                std::vector<std::string>{"--out", (dir / "one").string(), "--camera", "cam_1"});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "one" / "cam_1.aaaf"));
    CHECK_FALSE(fs::exists(dir / "one" / "cam_0.aaaf"));

    r = run(std::vector<std::string>{"render"} + args +
            std::vector<std::string>{"--out", (dir / "x").string(), "--camera", "cam_9"});
    CHECK(r.code == kExitUsage);
    CHECK(contains(r.err, "cam_9"));

    r = run(std::vector<std::string>{"render"} + args +
            std::vector<std::string>{"--out", (dir / "s").string(), "--fov-scale", "3", "--res-scale", "3"});
    CHECK(r.code == 0);
    CHECK(load_float_image(dir / "s" / "cam_0.aaaf").width == 48);
    CHECK(load_float_image(dir / "s" / "cam_0.aaaf").height == 36);

    r = run(std::vector<std::string>{"render"} + args +
            std::vector<std::string>{"--out", (dir / "s").string(), "--res-scale", "1.1"});
    CHECK(r.code == kExitUsage);

    Camera c = test::test_camera(20, 50.0);
    c.cx = 9.5;
    const Camera wide = adjust_camera(c, 3.0, 3.0);
    CHECK(wide.width == 60);
    CHECK(wide.fx == doctest::Approx(50.0));
    CHECK(wide.cx == doctest::Approx(3 * 9.5));
    // With a centered principal point this is the camera whose central
    // crop is the original image.
    const Camera centered = adjust_camera(test::test_camera(20, 50.0), 3.0, 3.0);
    CHECK(centered.cx == 10.0 + 20);
    CHECK(centered.cy == 10.0 + 20);
    const Camera half = adjust_camera(c, 1.0, 0.5);
    CHECK(half.width == 10);
    CHECK(half.fx == 25.0);
}

TEST_CASE("compare") {
    const fs::path dir = test::scratch_dir("cli_compare");
    Image img(4, 3);
    for (std::size_t i = 0; i < img.rgb.size(); ++i) img.rgb[i] = 0.1f * float(i % 7);
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");
    fs::create_directories(dir / "c");
    fs::create_directories(dir / "empty1");
    fs::create_directories(dir / "empty2");
    write_float_image(img, dir / "a" / "x.aaaf");
    write_float_image(img, dir / "b" / "x.aaaf");
    Image off = img;
    off.rgb[5] += 0.5f;
    write_float_image(off, dir / "c" / "x.aaaf");

    Run r = run({"compare", (dir / "a").string(), (dir / "b").string()});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "psnr inf dB ok"));

    r = run({"compare", (dir / "a").string(), (dir / "c").string(), "--tolerance", "1e-6"});
    CHECK(r.code == kExitCompareFailed);
    CHECK(contains(r.out, "FAIL"));
    CHECK(run({"compare", (dir / "a").string(), (dir / "c").string(), "--tolerance", "0.6"}).code == 0);

    write_float_image(img, dir / "b" / "y.aaaf");
    r = run({"compare", (dir / "a").string(), (dir / "b").string()});
    CHECK(r.code == kExitCompareFailed);
    CHECK(contains(r.err, "y.aaaf"));

    CHECK(run({"compare", (dir / "empty1").string(), (dir / "empty2").string()}).code == kExitCompareFailed);
    CHECK(run({"compare", (dir / "a").string(), (dir / "missing").string()}).code == kExitIo);
    CHECK(run({"compare", (dir / "a").string()}).code == kExitUsage);
}

TEST_CASE("stats") {
    const fs::path empty = write_fixture("cli_stats_empty", {});
    Run r = run(std::vector<std::string>{"stats"} + scene_args(empty));
    CHECK(r.code == 0);
    auto ls = lines(r.out);
    REQUIRE(ls.size() == 2);
    CHECK(ls[0] == "camera gaussians visible rect_pairs tile_pairs reduction");
    CHECK(ls[1] == "front 0 0 0 0 0.0000");

    // Small Gaussian at the center of tile (0, 0).
    Gaussian g;
    g.mean = {(8 - 16) / 30.0 * 5, (8 - 16) / 30.0 * 5, 5};
    g.scale = {0.02, 0.02, 0.02};
    g.opacity = 0.9;
    const fs::path one = write_fixture("cli_stats_one", {g});
    r = run(std::vector<std::string>{"stats"} + scene_args(one) + std::vector<std::string>{"--out", (one / "o").string()});
    CHECK(r.code == 0);
    CHECK(lines(r.out).at(1) == "front 1 1 1 1 0.0000");

    Gaussian d;
    d.mean = {0, 0, 5};
    d.scale = {3.0, 0.02, 0.02};
    d.rotation = axis_angle({0, 0, 1}, std::numbers::pi / 4);
    d.opacity = 0.9;
    const fs::path diag = write_fixture("cli_stats_diag", {d}, 64);
    r = run(std::vector<std::string>{"stats"} + scene_args(diag) + std::vector<std::string>{"--out", (diag / "o").string()});
    CHECK(r.code == 0);
    std::istringstream row(lines(r.out).at(1));
    std::string id;
    std::size_t n = 0, visible = 0, rect = 0, tile = 0;
    double reduction = 0;
    row >> id >> n >> visible >> rect >> tile >> reduction;
    CHECK(rect == 16);
    CHECK(tile < rect);
    CHECK(reduction == doctest::Approx(1.0 - double(tile) / rect).epsilon(1e-3));
}

TEST_CASE("config file and precedence") {
    Gaussian d;
    d.mean = {0, 0, 5};
    d.scale = {3.0, 0.02, 0.02};
    d.rotation = axis_angle({0, 0, 1}, std::numbers::pi / 4);
    const fs::path dir = write_fixture("cli_config", {d}, 64);
    const auto stats_row = [&](const std::vector<std::string> &extra) {
        const Run r = run(std::vector<std::string>{"stats"} + scene_args(dir) +
                          std::vector<std::string>{"--out", (dir / "o").string()} + extra);
        REQUIRE(r.code == 0);
        return lines(r.out).at(1);
    };
    test::write_text(dir / "gsr.toml", "# render settings\ntile-size = 8\nk = 0.3\n");
    const std::string by_flag = stats_row({"--tile-size", "8"});
    CHECK(by_flag != stats_row({}));
    CHECK(stats_row({"--config", (dir / "gsr.toml").string()}) == by_flag);
    CHECK(stats_row({"--config", (dir / "gsr.toml").string(), "--tile-size", "32"}) == stats_row({"--tile-size", "32"}));

    CHECK(run({"stats", "--config", (dir / "missing.toml").string()}).code == kExitUsage);
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"bogus"}).code == kExitUsage);
    CHECK(run({"render", "--no-such-flag"}).code == kExitUsage);
    CHECK(run({"render", "--k", "abc"}).code == kExitUsage);
    const Run r = run({"render"});
    CHECK(r.code == kExitUsage);
    CHECK(contains(r.err, "--scene"));
    const fs::path dir = write_fixture("cli_usage", {});
    CHECK(run(std::vector<std::string>{"render"} + scene_args(dir)).code == kExitUsage);
    CHECK(run(std::vector<std::string>{"render"} + scene_args(dir) +
              std::vector<std::string>{"--out", (dir / "o").string(), "--tile-size", "0"})
              .code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("failed renders leave no partial outputs") {
    const fs::path dir = test::scratch_dir("cli_partial");
    REQUIRE(run({"synth", "--seed", "2", "--n", "10", "--ring", "2", "--width", "8", "--height", "8", "--out",
                 dir.string()})
                .code == 0);
    // A directory where the second PNG should go makes the second write fail.
    fs::create_directories(dir / "out" / "cam_1.png");
    const Run r = run({"render", "--scene", (dir / "scene.ply").string(), "--cameras", (dir / "cameras.json").string(),
                       "--out", (dir / "out").string()});
    CHECK(r.code == kExitIo);
    CHECK(contains(r.err, "cam_1.png"));
    CHECK_FALSE(fs::exists(dir / "out" / "cam_0.png"));
    CHECK_FALSE(fs::exists(dir / "out" / "cam_0.aaaf"));
    CHECK(fs::is_directory(dir / "out" / "cam_1.png"));

    // A corrupt camera file is an IO/parse failure naming the entry.
    test::write_text(dir / "bad.json", "[{\"id\": 1}]");
    const Run p = run({"render", "--scene", (dir / "scene.ply").string(), "--cameras", (dir / "bad.json").string(),
                       "--out", (dir / "out2").string()});
    CHECK(p.code == kExitIo);
    CHECK(contains(p.err, "camera entry 0"));
}
