// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: render, oracle-render, compare, stats and synth.
// Every command returns a process exit status (see ExitCode).

#pragma once

#include "gsr/io.hpp"
#include "gsr/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gsr {

enum ExitCode : int { kExitOk = 0, kExitCompareFailed = 1, kExitUsage = 2, kExitIo = 3 };

struct CliConfig {
    RenderConfig render;
    std::filesystem::path scene;
    std::filesystem::path cameras;
    std::filesystem::path train_cameras; // empty: v_train unbounded
    bool train_any_camera = false;       // count training cameras that do not see the mean
    std::filesystem::path out;
    std::vector<std::string> camera_ids; // empty: every camera
    double fov_scale = 1.0;              // focal lengths are divided by this
    double res_scale = 1.0;              // resolution, focal lengths and principal point are multiplied by this

    // synth
    std::uint64_t seed = 0;
    std::size_t count = 100;
    int ring = 3;
    int width = 64;
    int height = 64;

    // compare
    std::filesystem::path compare_a;
    std::filesystem::path compare_b;
    double tolerance = 1e-6;
};

// Applies --fov-scale and --res-scale. Throws ValidationError when the scaled
// resolution is not integral.
Camera adjust_camera(const Camera &camera, double fov_scale, double res_scale);

struct FrameStats {
    std::size_t input_gaussians = 0;
    std::size_t visible_gaussians = 0; // survived view-frustum culling
    std::size_t rect_pairs = 0;
    std::size_t tile_pairs = 0;

    // 1 - tile_pairs / rect_pairs, 0 when there are no pairs.
    double reduction() const;
};

FrameStats frame_stats(std::span<const Gaussian> scene, const Camera &camera, const RenderConfig &config);

// Deterministic random scene in [-0.5, 0.5]^3 and a ring of cameras around it.
std::vector<Gaussian> synth_scene(std::uint64_t seed, std::size_t n);
CameraSet synth_cameras(int count, int width, int height);

int cmd_render(const CliConfig &config, std::ostream &out, std::ostream &err);
int cmd_oracle(const CliConfig &config, std::ostream &out, std::ostream &err);
int cmd_compare(const std::filesystem::path &dir_a, const std::filesystem::path &dir_b, double tolerance,
                std::ostream &out, std::ostream &err);
int cmd_stats(const CliConfig &config, std::ostream &out, std::ostream &err);
int cmd_synth(const CliConfig &config, std::ostream &out, std::ostream &err);

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace gsr
