// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0

#include "gsr/culling.hpp"

#include <cmath>
#include <vector>

namespace gsr {

namespace {

// Half-space slack, in unit-space distance, for candidates on shared edges.
constexpr double kAdmissibleSlack = 1e-9;

// Frustum planes pulled back into unit space and normalized so that plane
// values are signed unit-space distances.
struct UnitFrustum {
    std::vector<Plane> planes;
    const GaussianFrame *frame = nullptr;

    bool admissible(const Vec3 &u) const {
        for (const Plane &p : planes)
            if (p.eval(u) < -kAdmissibleSlack) return false;
        return frame->view_depth(u) > 0.0;
    }
};

Plane normalize_plane(const Plane &p) {
    const double n = norm(p.normal());
    return n > 0.0 ? Plane{(1.0 / n) * p.v} : p;
}

UnitFrustum pull_back(const GaussianFrame &frame, const Frustum &frustum, bool with_near) {
    UnitFrustum uf;
    uf.frame = &frame;
    for (const Plane &p : frustum.side_planes()) uf.planes.push_back(normalize_plane(transform_plane(frame.t_prime, p)));
    if (with_near && frustum.near)
        uf.planes.push_back(normalize_plane(transform_plane(frame.t_view, frustum.near_plane())));
    return uf;
}

struct Search {
    const UnitFrustum &uf;
    MaxContribution best;

    void offer(const Vec3 &u, double rho2) {
        if (rho2 < best.rho2 && uf.admissible(u)) {
            best.rho2 = rho2;
            best.point_unit = u;
            best.valid = true;
        }
    }
    void face(std::size_t a) {
        const ClosestPoint c = closest_point_on_plane(uf.planes[a]);
        offer(c.point, c.rho2);
    }
    void edge(std::size_t a, std::size_t b) {
        if (auto c = closest_point_on_line(uf.planes[a], uf.planes[b])) offer(c->point, c->rho2);
    }
    void vertex(std::size_t a, std::size_t b, std::size_t c) {
        Mat3 n;
        const Plane *ps[3] = {&uf.planes[a], &uf.planes[b], &uf.planes[c]};
        Vec3 rhs;
        for (std::size_t i = 0; i < 3; ++i) {
            const Vec3 ni = ps[i]->normal();
            n.m[i] = {ni.x, ni.y, ni.z};
            rhs[i] = -ps[i]->offset();
        }
        const double det = n.determinant();
        if (std::abs(det) <= 1e-12) return;
        const Vec3 u = n.inverse() * rhs;
        offer(u, dot(u, u));
    }
    void interior() { offer(Vec3{}, 0.0); }
};

enum Side : std::size_t { kXMin = 0, kXMax = 1, kYMin = 2, kYMax = 3 };

} // namespace

double GaussianFrame::view_depth(const Vec3 &u) const {
    const auto &r = t_view.m[2];
    return r[0] * u.x + r[1] * u.y + r[2] * u.z + r[3];
}

GaussianFrame make_frame(const Camera &camera, const Mat4 &gaussian_to_world) {
    return {combined_transform(camera, gaussian_to_world), camera.world_to_view * gaussian_to_world};
}

Frustum Frustum::from_rect(const ScreenRect &rect, std::optional<double> near) {
    return {rect.x_min, rect.x_max, rect.y_min, rect.y_max, near};
}

Frustum Frustum::viewport(const Camera &camera) {
    return {0.0, static_cast<double>(camera.width), 0.0, static_cast<double>(camera.height), camera.near};
}

std::array<Plane, 4> Frustum::side_planes() const {
    return {Plane{{1.0, 0.0, 0.0, -x_min}}, Plane{{-1.0, 0.0, 0.0, x_max}},
            Plane{{0.0, 1.0, 0.0, -y_min}}, Plane{{0.0, -1.0, 0.0, y_max}}};
}

Plane Frustum::near_plane() const { return Plane{{0.0, 0.0, 1.0, -near.value()}}; }

Plane transform_plane(const Mat4 &m, const Plane &p) { return Plane{m.transposed() * p.v}; }

ClosestPoint closest_point_on_plane(const Plane &plane) {
    const Vec3 n = plane.normal();
    const double nn = dot(n, n);
    const double d = plane.offset();
    return {(-d / nn) * n, d * d / nn};
}

std::optional<ClosestPoint> closest_point_on_line(const Plane &a, const Plane &b) {
    const Vec3 na = a.normal();
    const Vec3 nb = b.normal();
    const Vec3 c = cross(na, nb);
    const double cc = dot(c, c);
    if (!(std::sqrt(cc) > 1e-12 * norm(na) * norm(nb))) return std::nullopt;
    // Least-norm solution of na.u = -da, nb.u = -db; both terms are orthogonal
    // to the line direction c.
    const Vec3 u = ((-a.offset()) * cross(nb, c) + (-b.offset()) * cross(c, na)) / cc;
    return ClosestPoint{u, dot(u, u)};
}

MaxContribution min_rho2_in_frustum(const GaussianFrame &frame, const Frustum &frustum,
                                    const Vec2 &mean_screen, bool mean_in_front) {
    if (!mean_in_front) return min_rho2_in_frustum_naive(frame, frustum);
    if (frustum.contains_screen(mean_screen)) return {0.0, Vec3{}, true};

    const UnitFrustum uf = pull_back(frame, frustum, false);
    Search s{uf, {}};

    const auto nearer = [](double v, double lo, double hi, std::size_t lo_side, std::size_t hi_side) {
        if (v < lo) return lo_side;
        if (v > hi) return hi_side;
        return v - lo <= hi - v ? lo_side : hi_side;
    };
    const std::size_t v = nearer(mean_screen.x, frustum.x_min, frustum.x_max, kXMin, kXMax);
    const std::size_t h = nearer(mean_screen.y, frustum.y_min, frustum.y_max, kYMin, kYMax);
    const std::size_t v_other = v == kXMin ? kXMax : kXMin;
    const std::size_t h_other = h == kYMin ? kYMax : kYMin;

    s.face(v);
    s.face(h);
    s.edge(v, h);
    s.edge(v, h_other);
    s.edge(v_other, h);
    return s.best;
}

MaxContribution min_rho2_in_frustum_naive(const GaussianFrame &frame, const Frustum &frustum) {
    const UnitFrustum uf = pull_back(frame, frustum, false);
    Search s{uf, {}};
    s.interior();
    if (s.best.valid) return s.best;
    for (std::size_t i = 0; i < 4; ++i) s.face(i);
    for (std::size_t x : {kXMin, kXMax})
        for (std::size_t y : {kYMin, kYMax}) s.edge(x, y);
    return s.best;
}

MaxContribution min_rho2_in_truncated_frustum(const GaussianFrame &frame, const Frustum &frustum) {
    const UnitFrustum uf = pull_back(frame, frustum, true);
    Search s{uf, {}};
    s.interior();
    if (s.best.valid) return s.best;
    const std::size_t n = uf.planes.size();
    for (std::size_t a = 0; a < n; ++a) {
        s.face(a);
        for (std::size_t b = a + 1; b < n; ++b) {
            s.edge(a, b);
            for (std::size_t c = b + 1; c < n; ++c) s.vertex(a, b, c);
        }
    }
    return s.best;
}

CullDecision tile_cull(const GaussianFrame &frame, const Vec2 &mean_screen, bool mean_in_front,
                       const ScreenRect &tile, double tau_rho, std::optional<double> near) {
    const Frustum frustum = Frustum::from_rect(tile, near);
    const MaxContribution side = min_rho2_in_frustum(frame, frustum, mean_screen, mean_in_front);
    if (side.valid && side.rho2 < tau_rho) {
        if (!near || frame.view_depth(side.point_unit) >= *near) return CullDecision::Keep;
    } else {
        // Nothing below tau in front of the camera except, possibly, next to
        // the apex; that only matters when the camera is inside the ellipsoid.
        if (!near) return CullDecision::Cull;
        const Vec3 apex = -(frame.t_view.linear().inverse() * frame.t_view.translation());
        if (!(dot(apex, apex) < tau_rho)) return CullDecision::Cull;
    }

    // The closest point lies in front of the near plane; whether anything of
    // the cutoff ellipsoid reaches beyond it is decided on the truncated frustum.
    const MaxContribution truncated = min_rho2_in_truncated_frustum(frame, frustum);
    return truncated.valid && truncated.rho2 < tau_rho ? CullDecision::Keep : CullDecision::Cull;
}

CullDecision cull_view_frustum(const GaussianFrame &frame, const Camera &camera, double tau_rho) {
    const Vec3 mean_view = frame.t_view.translation();
    const bool in_front = mean_view.z > 0.0;
    const Vec2 mean_screen = in_front ? camera.project_view(mean_view) : Vec2{};
    const ScreenRect all{0.0, static_cast<double>(camera.width), 0.0, static_cast<double>(camera.height)};
    return tile_cull(frame, mean_screen, in_front, all, tau_rho, camera.near);
}

bool point_in_view_frustum(const Camera &camera, const Vec3 &world) {
    const Vec3 v = camera.to_view(world);
    if (!(v.z >= camera.near)) return false;
    const Vec2 p = camera.project_view(v);
    return p.x >= 0.0 && p.x <= camera.width && p.y >= 0.0 && p.y <= camera.height;
}

} // namespace gsr
