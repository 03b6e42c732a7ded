// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0

#include "gsr/cli.hpp"

#include "gsr/oracle.hpp"
#include "gsr/random.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace gsr {

namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
  public:
    using Error::Error;
};

int scaled_extent(int extent, double factor, const char *what) {
    const double scaled = extent * factor;
    const double rounded = std::round(scaled);
    if (!(factor > 0.0) || std::abs(scaled - rounded) > 1e-9 * std::max(1.0, scaled) || rounded < 1.0)
        throw ValidationError(std::string("--res-scale does not give an integral ") + what);
    return static_cast<int>(rounded);
}

void require_file(const fs::path &path, const char *flag) {
    if (path.empty()) throw UsageError(std::string(flag) + " is required");
    if (!fs::is_regular_file(path)) throw IoError("cannot open '" + path.string() + "': no such file");
}

struct Inputs {
    std::vector<Gaussian> scene;
    std::vector<CameraEntry> cameras; // selected and adjusted
};

Inputs load_inputs(const CliConfig &config, bool needs_out = true) {
    require_file(config.scene, "--scene");
    require_file(config.cameras, "--cameras");
    if (!config.train_cameras.empty()) require_file(config.train_cameras, "--train-cameras");
    if (needs_out && config.out.empty()) throw UsageError("--out is required");
    if (auto err = validation_error(config.render)) throw UsageError(*err);
    if (!(config.fov_scale > 0.0) || !std::isfinite(config.fov_scale)) throw UsageError("--fov-scale must be positive");
    if (!(config.res_scale > 0.0) || !std::isfinite(config.res_scale)) throw UsageError("--res-scale must be positive");

    Inputs in;
    in.scene = load_ply(config.scene).gaussians;
    const CameraSet all = load_cameras(config.cameras);

    std::set<std::string> wanted(config.camera_ids.begin(), config.camera_ids.end());
    for (const auto &id : wanted) {
        const bool found = std::any_of(all.entries.begin(), all.entries.end(),
                                       [&](const CameraEntry &e) { return e.id == id; });
        if (!found) throw UsageError("unknown camera id '" + id + "'");
    }
    for (const auto &e : all.entries) {
        if (!wanted.empty() && !wanted.count(e.id)) continue;
        CameraEntry adjusted = e;
        try {
            adjusted.camera = adjust_camera(e.camera, config.fov_scale, config.res_scale);
        } catch (const ValidationError &ex) {
            throw UsageError(ex.what());
        }
        in.cameras.push_back(std::move(adjusted));
    }

    if (!config.train_cameras.empty()) {
        const std::vector<Camera> train = load_cameras(config.train_cameras).cameras();
        for (auto &g : in.scene) g.v_train = max_training_frequency(g, train, !config.train_any_camera);
    }
    return in;
}

std::string fixed(double v, int precision = 3) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << v;
    return s.str();
}

std::string format_psnr(double p) { return std::isinf(p) ? std::string("inf") : fixed(p, 2); }

template <typename Body> int guarded(std::ostream &err, Body &&body) {
    try {
        return body();
    } catch (const UsageError &ex) {
        err << "error: " << ex.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &ex) {
        err << "error: " << ex.what() << "\n";
        return kExitIo;
    }
}

using Renderer = Framebuffer (*)(std::span<const Gaussian>, const Camera &, const RenderConfig &, RenderStats *);

Framebuffer oracle_renderer(std::span<const Gaussian> scene, const Camera &camera, const RenderConfig &config,
                            RenderStats *) {
    return oracle::render_reference(scene, camera, config);
}

int render_all(const CliConfig &config, Renderer renderer, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        const Inputs in = load_inputs(config);
        fs::create_directories(config.out);
        std::vector<fs::path> written;
        try {
            for (const auto &e : in.cameras) {
                const auto start = std::chrono::steady_clock::now();
                RenderStats stats;
                const Framebuffer fb = renderer(in.scene, e.camera, config.render, &stats);
                const double ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
                const Image img = to_image(fb);
                const fs::path png = config.out / (e.id + ".png");
                const fs::path raw = config.out / (e.id + ".aaaf");
                written.push_back(png);
                write_png(img, png);
                written.push_back(raw);
                write_float_image(img, raw);
                out << e.id << ": " << e.camera.width << "x" << e.camera.height << " " << fixed(ms, 1) << " ms";
                if (renderer != oracle_renderer)
                    out << ", gaussians " << stats.prepared_gaussians << "/" << stats.input_gaussians
                        << ", tile pairs " << stats.tile_pairs << " (rect " << stats.rect_pairs << ")";
                out << "\n";
            }
        } catch (...) {
            std::error_code ec;
            for (const auto &p : written)
                if (fs::is_regular_file(p, ec)) fs::remove(p, ec);
            throw;
        }
        return static_cast<int>(kExitOk);
    });
}

std::vector<std::string> float_images(const fs::path &dir) {
    if (!fs::is_directory(dir)) throw IoError("cannot open directory '" + dir.string() + "'");
    std::vector<std::string> names;
    for (const auto &entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".aaaf")
            names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

} // namespace

Camera adjust_camera(const Camera &camera, double fov_scale, double res_scale) {
    Camera c = camera;
    c.fx = camera.fx / fov_scale * res_scale;
    c.fy = camera.fy / fov_scale * res_scale;
    c.cx = camera.cx * res_scale;
    c.cy = camera.cy * res_scale;
    c.width = scaled_extent(camera.width, res_scale, "width");
    c.height = scaled_extent(camera.height, res_scale, "height");
    return c;
}

double FrameStats::reduction() const {
    if (rect_pairs == 0) return 0.0;
    return 1.0 - static_cast<double>(tile_pairs) / static_cast<double>(rect_pairs);
}

FrameStats frame_stats(std::span<const Gaussian> scene, const Camera &camera, const RenderConfig &config) {
    validate(camera);
    validate(config);
    FrameStats s;
    s.input_gaussians = scene.size();
    const std::vector<PreparedGaussian> prepared = preprocess(scene, camera, config);
    s.visible_gaussians = prepared.size();
    const TileBins bins = bin_to_tiles(prepared, camera, config);
    s.rect_pairs = bins.rect_pairs;
    s.tile_pairs = bins.culled_pairs;
    return s;
}

std::vector<Gaussian> synth_scene(std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    std::vector<Gaussian> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Gaussian g;
        g.mean = rng.uniform_vec(-0.5, 0.5);
        g.scale = {rng.log_uniform(1e-3, 0.3), rng.log_uniform(1e-3, 0.3), rng.log_uniform(1e-3, 0.3)};
        g.rotation = rng.rotation();
        g.opacity = rng.uniform(0.2, 0.95);
        const Vec3 rgb = rng.uniform_vec(0.0, 1.0);
        g.color = ShCoeffs::from_dc((rgb - Vec3{0.5, 0.5, 0.5}) / kShC0);
        out.push_back(std::move(g));
    }
    return out;
}

CameraSet synth_cameras(int count, int width, int height) {
    CameraSet set;
    const double fov = std::numbers::pi / 3.0;
    for (int i = 0; i < count; ++i) {
        const double a = 2.0 * std::numbers::pi * i / count;
        CameraEntry e;
        e.id = "cam_" + std::to_string(i);
        e.role = CameraRole::Test;
        Camera &c = e.camera;
        c.width = width;
        c.height = height;
        c.fx = c.fy = 0.5 * std::max(width, height) / std::tan(0.5 * fov);
        c.cx = 0.5 * width;
        c.cy = 0.5 * height;
        c.near = 0.01;
        c.world_to_view = look_at({2.0 * std::cos(a), 0.4, 2.0 * std::sin(a)}, {0.0, 0.0, 0.0}, {0.0, 1.0, 0.0});
        set.entries.push_back(std::move(e));
    }
    return set;
}

int cmd_render(const CliConfig &config, std::ostream &out, std::ostream &err) {
    return render_all(config, &render, out, err);
}

int cmd_oracle(const CliConfig &config, std::ostream &out, std::ostream &err) {
    return render_all(config, &oracle_renderer, out, err);
}

int cmd_compare(const fs::path &dir_a, const fs::path &dir_b, double tolerance, std::ostream &out,
                std::ostream &err) {
    return guarded(err, [&] {
        if (!(tolerance >= 0.0)) throw UsageError("--tolerance must be non-negative");
        const auto a = float_images(dir_a);
        const auto b = float_images(dir_b);
        if (a.empty() && b.empty()) {
            err << "error: no float images in '" << dir_a.string() << "' or '" << dir_b.string() << "'\n";
            return static_cast<int>(kExitCompareFailed);
        }
        if (a != b) {
            std::vector<std::string> only_a, only_b;
            std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_a));
            std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_b));
            for (const auto &n : only_a) err << "error: " << n << " only in '" << dir_a.string() << "'\n";
            for (const auto &n : only_b) err << "error: " << n << " only in '" << dir_b.string() << "'\n";
            return static_cast<int>(kExitCompareFailed);
        }
        bool ok = true;
        for (const auto &name : a) {
            const Image ia = load_float_image(dir_a / name);
            const Image ib = load_float_image(dir_b / name);
            if (ia.width != ib.width || ia.height != ib.height) {
                out << name << ": size mismatch " << ia.width << "x" << ia.height << " vs " << ib.width << "x"
                    << ib.height << " FAIL\n";
                ok = false;
                continue;
            }
            const double diff = max_abs_difference(ia, ib);
            const bool pass = diff <= tolerance;
            ok = ok && pass;
            out << name << ": max abs diff " << std::scientific << std::setprecision(3) << diff
                << std::defaultfloat << ", psnr " << format_psnr(psnr(ia, ib)) << " dB " << (pass ? "ok" : "FAIL")
                << "\n";
        }
        return static_cast<int>(ok ? kExitOk : kExitCompareFailed);
    });
}

int cmd_stats(const CliConfig &config, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        const Inputs in = load_inputs(config, false);
        out << "camera gaussians visible rect_pairs tile_pairs reduction\n";
        for (const auto &e : in.cameras) {
            const FrameStats s = frame_stats(in.scene, e.camera, config.render);
            out << e.id << " " << s.input_gaussians << " " << s.visible_gaussians << " " << s.rect_pairs << " "
                << s.tile_pairs << " " << fixed(s.reduction(), 4) << "\n";
        }
        return static_cast<int>(kExitOk);
    });
}

int cmd_synth(const CliConfig &config, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        if (config.out.empty()) throw UsageError("--out is required");
        if (config.ring < 1) throw UsageError("--ring must be at least 1");
        if (config.width < 1 || config.height < 1) throw UsageError("--width and --height must be positive");
        const auto scene = synth_scene(config.seed, config.count);
        const auto cameras = synth_cameras(config.ring, config.width, config.height);
        fs::create_directories(config.out);
        write_ply(scene, config.out / "scene.ply");
        write_cameras(cameras, config.out / "cameras.json");
        out << "wrote " << scene.size() << " gaussians and " << cameras.size() << " cameras to "
            << config.out.string() << "\n";
        return static_cast<int>(kExitOk);
    });
}

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CliConfig config;
    std::vector<double> background{0.0, 0.0, 0.0};

    CLI::App app{"CPU tile-based 3D Gaussian rasterizer", "gsr"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key = value file; command-line flags take precedence");

    app.add_option("--scene", config.scene, "PLY scene");
    app.add_option("--cameras", config.cameras, "camera JSON");
    app.add_option("--train-cameras", config.train_cameras, "training cameras bounding the sampling frequency");
    app.add_flag("--train-any-camera", config.train_any_camera,
                 "count every training camera with the mean in front, not only those that see it");
    app.add_option("--out", config.out, "output directory");
    app.add_option("--camera", config.camera_ids, "render only this camera id (repeatable)");
    app.add_option("--k", config.render.k, "filter kernel size")->capture_default_str();
    app.add_option("--tau-rho", config.render.tau_rho, "squared Mahalanobis cutoff")->capture_default_str();
    app.add_option("--tile-size", config.render.tile_size, "tile edge in pixels")->capture_default_str();
    app.add_option("--fov-scale", config.fov_scale, "divide focal lengths")->capture_default_str();
    app.add_option("--res-scale", config.res_scale, "scale resolution, focal lengths and principal point")
        ->capture_default_str();
    app.add_option("--threads", config.render.threads, "worker threads, 0 = all cores")->capture_default_str();
    app.add_option("--background", background, "background color r,g,b")->expected(3)->delimiter(',');
    app.add_option("--seed", config.seed, "synth seed")->capture_default_str();
    app.add_option("--n", config.count, "synth Gaussian count")->capture_default_str();
    app.add_option("--ring", config.ring, "synth camera count")->capture_default_str();
    app.add_option("--width", config.width, "synth image width")->capture_default_str();
    app.add_option("--height", config.height, "synth image height")->capture_default_str();
    app.add_option("--tolerance", config.tolerance, "compare tolerance")->capture_default_str();

    auto *render_cmd = app.add_subcommand("render", "render every selected camera");
    auto *oracle_cmd = app.add_subcommand("oracle-render", "brute-force reference render");
    oracle_cmd->alias("oracle");
    auto *compare_cmd = app.add_subcommand("compare", "compare two directories of float images");
    compare_cmd->add_option("dir_a", config.compare_a)->required();
    compare_cmd->add_option("dir_b", config.compare_b)->required();
    auto *stats_cmd = app.add_subcommand("stats", "culling statistics per camera");
    auto *synth_cmd = app.add_subcommand("synth", "write a random scene and a camera ring");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    config.render.background = {background[0], background[1], background[2]};

    if (render_cmd->parsed()) return cmd_render(config, out, err);
    if (oracle_cmd->parsed()) return cmd_oracle(config, out, err);
    if (compare_cmd->parsed()) return cmd_compare(config.compare_a, config.compare_b, config.tolerance, out, err);
    if (stats_cmd->parsed()) return cmd_stats(config, out, err);
    if (synth_cmd->parsed()) return cmd_synth(config, out, err);
    return kExitUsage;
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    std::vector<const char *> argv;
    argv.push_back("gsr");
    for (const auto &a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace gsr
