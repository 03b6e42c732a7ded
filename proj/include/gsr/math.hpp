// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0
//
// Small fixed-size linear algebra used by the geometry path. Everything is
// double precision and row-major.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace gsr {

struct Vec2 {
    double x = 0.0, y = 0.0;
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr double &operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

    friend constexpr Vec3 operator+(const Vec3 &a, const Vec3 &b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(const Vec3 &a, const Vec3 &b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator-(const Vec3 &a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(double s, const Vec3 &a) { return {s * a.x, s * a.y, s * a.z}; }
    friend constexpr Vec3 operator*(const Vec3 &a, double s) { return s * a; }
    friend constexpr Vec3 operator/(const Vec3 &a, double s) { return {a.x / s, a.y / s, a.z / s}; }
    Vec3 &operator+=(const Vec3 &b) {
        x += b.x;
        y += b.y;
        z += b.z;
        return *this;
    }
};

constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3 &a, const Vec3 &b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3 &a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3 &a) { return a / norm(a); }

struct Vec4 {
    double x = 0.0, y = 0.0, z = 0.0, w = 0.0;

    constexpr double &operator[](std::size_t i) {
        return i == 0 ? x : (i == 1 ? y : (i == 2 ? z : w));
    }
    constexpr double operator[](std::size_t i) const {
        return i == 0 ? x : (i == 1 ? y : (i == 2 ? z : w));
    }
    constexpr Vec3 xyz() const { return {x, y, z}; }

    friend constexpr Vec4 operator+(const Vec4 &a, const Vec4 &b) {
        return {a.x + b.x, a.y + b.y, a.z + b.z, a.w + b.w};
    }
    friend constexpr Vec4 operator-(const Vec4 &a, const Vec4 &b) {
        return {a.x - b.x, a.y - b.y, a.z - b.z, a.w - b.w};
    }
    friend constexpr Vec4 operator*(double s, const Vec4 &a) { return {s * a.x, s * a.y, s * a.z, s * a.w}; }
};

constexpr double dot(const Vec4 &a, const Vec4 &b) { return a.x * b.x + a.y * b.y + a.z * b.z + a.w * b.w; }

struct Mat3 {
    std::array<std::array<double, 3>, 3> m{};

    static constexpr Mat3 identity() {
        Mat3 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
        return r;
    }
    static constexpr Mat3 diagonal(const Vec3 &d) {
        Mat3 r;
        r.m[0][0] = d.x;
        r.m[1][1] = d.y;
        r.m[2][2] = d.z;
        return r;
    }

    constexpr std::array<double, 3> &operator[](std::size_t i) { return m[i]; }
    constexpr const std::array<double, 3> &operator[](std::size_t i) const { return m[i]; }

    constexpr Vec3 row(std::size_t i) const { return {m[i][0], m[i][1], m[i][2]}; }
    constexpr Vec3 col(std::size_t j) const { return {m[0][j], m[1][j], m[2][j]}; }

    constexpr Mat3 transposed() const {
        Mat3 r;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
        return r;
    }

    constexpr double determinant() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }

    // Transpose of the cofactor matrix; A * adj(A) = det(A) I.
    constexpr Mat3 adjugate() const {
        Mat3 r;
        r.m[0][0] = m[1][1] * m[2][2] - m[1][2] * m[2][1];
        r.m[0][1] = m[0][2] * m[2][1] - m[0][1] * m[2][2];
        r.m[0][2] = m[0][1] * m[1][2] - m[0][2] * m[1][1];
        r.m[1][0] = m[1][2] * m[2][0] - m[1][0] * m[2][2];
        r.m[1][1] = m[0][0] * m[2][2] - m[0][2] * m[2][0];
        r.m[1][2] = m[0][2] * m[1][0] - m[0][0] * m[1][2];
        r.m[2][0] = m[1][0] * m[2][1] - m[1][1] * m[2][0];
        r.m[2][1] = m[0][1] * m[2][0] - m[0][0] * m[2][1];
        r.m[2][2] = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        return r;
    }

    Mat3 inverse() const {
        Mat3 a = adjugate();
        const double inv = 1.0 / determinant();
        for (auto &r : a.m)
            for (auto &v : r) v *= inv;
        return a;
    }

    friend constexpr Mat3 operator*(const Mat3 &a, const Mat3 &b) {
        Mat3 r;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < 3; ++k) s += a.m[i][k] * b.m[k][j];
                r.m[i][j] = s;
            }
        return r;
    }
    friend constexpr Vec3 operator*(const Mat3 &a, const Vec3 &v) {
        return {dot(a.row(0), v), dot(a.row(1), v), dot(a.row(2), v)};
    }
    friend constexpr Mat3 operator+(const Mat3 &a, const Mat3 &b) {
        Mat3 r;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) r.m[i][j] = a.m[i][j] + b.m[i][j];
        return r;
    }
};

struct Mat4 {
    std::array<std::array<double, 4>, 4> m{};

    static constexpr Mat4 identity() {
        Mat4 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = r.m[3][3] = 1.0;
        return r;
    }

    // Affine transform x -> linear * x + translation.
    static constexpr Mat4 affine(const Mat3 &linear, const Vec3 &translation) {
        Mat4 r;
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) r.m[i][j] = linear.m[i][j];
            r.m[i][3] = translation[i];
        }
        r.m[3][3] = 1.0;
        return r;
    }

    constexpr std::array<double, 4> &operator[](std::size_t i) { return m[i]; }
    constexpr const std::array<double, 4> &operator[](std::size_t i) const { return m[i]; }

    constexpr Vec4 row(std::size_t i) const { return {m[i][0], m[i][1], m[i][2], m[i][3]}; }
    constexpr Vec4 col(std::size_t j) const { return {m[0][j], m[1][j], m[2][j], m[3][j]}; }
    constexpr Mat3 linear() const {
        Mat3 r;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) r.m[i][j] = m[i][j];
        return r;
    }
    constexpr Vec3 translation() const { return {m[0][3], m[1][3], m[2][3]}; }

    constexpr Mat4 transposed() const {
        Mat4 r;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) r.m[i][j] = m[j][i];
        return r;
    }

    friend constexpr Mat4 operator*(const Mat4 &a, const Mat4 &b) {
        Mat4 r;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < 4; ++k) s += a.m[i][k] * b.m[k][j];
                r.m[i][j] = s;
            }
        return r;
    }
    friend constexpr Vec4 operator*(const Mat4 &a, const Vec4 &v) {
        return {dot(a.row(0), v), dot(a.row(1), v), dot(a.row(2), v), dot(a.row(3), v)};
    }

    // Applies the transform to a point (w = 1) and returns the homogeneous result.
    constexpr Vec4 apply(const Vec3 &p) const { return (*this) * Vec4{p.x, p.y, p.z, 1.0}; }
};

// General 4x4 inverse by cofactor expansion. Callers guarantee invertibility.
Mat4 inverse(const Mat4 &a);

// Rigid inverse of [R | t]: [R^T | -R^T t].
Mat4 rigid_inverse(const Mat4 &a);

// Unit quaternion, Hamilton convention, stored (w, x, y, z).
struct Quat {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
    Quat normalized() const {
        const double n = norm();
        return {w / n, x / n, y / n, z / n};
    }
    friend constexpr Quat operator*(const Quat &a, const Quat &b) {
        return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
                a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
                a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
                a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
    }
};

Mat3 rotation_matrix(const Quat &q);
Quat axis_angle(const Vec3 &axis, double angle);

} // namespace gsr
