// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0
//
// Seeded random numbers with a platform-independent sequence. The standard
// distributions are implementation defined, so doubles are built from raw
// mt19937_64 output instead.

#pragma once

#include "gsr/math.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace gsr {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

    // Box-Muller.
    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    Vec3 uniform_vec(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }

    Vec3 unit_vector() {
        while (true) {
            const Vec3 v{normal(), normal(), normal()};
            const double n = norm(v);
            if (n > 1e-12) return v / n;
        }
    }

    // Uniformly distributed unit quaternion (Shoemake).
    Quat rotation() {
        const double u1 = uniform(), u2 = uniform(), u3 = uniform();
        const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
        const double t2 = 2.0 * std::numbers::pi * u2, t3 = 2.0 * std::numbers::pi * u3;
        return Quat{b * std::cos(t3), a * std::sin(t2), a * std::cos(t2), b * std::sin(t3)};
    }

    std::uint64_t bits() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

} // namespace gsr
