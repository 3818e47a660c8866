#pragma once

// Geometric oracle for inclusion probabilities: circular closing paths
// through the endpoints of an open stroke, region membership against the
// extended stroke and arc, and probability by sweeping the starting angle.
//
// All arc geometry lives in the chord frame: stroke endpoints at (-x0, 0)
// and (+x0, 0), the "plus" half-space being y > 0.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "raster.hpp"

namespace strokefield {

/// Circular closing path through (+-x0, 0) with starting angle beta at the
/// endpoints, measured from the chord on the plus side.
struct CircleArc {
    double half_chord = 0.0;   // x0
    double start_angle = 0.0;  // beta in (0, 2*pi)
    double center_y = 0.0;     // circle center is (0, center_y) = (0, x0*cot(beta))
    double radius = 0.0;       // x0*csc(beta); negative for beta > pi (arc below the chord)
    double y_max = 0.0;        // x0*cot(beta/2), signed height of the arc apex
    double arc_length = 0.0;   // 2*x0*(pi - beta)/sin(beta)
    double area = 0.0;         // x0^2*((pi - beta)/sin^2(beta) + cot(beta)), signed
    bool degenerate_chord = false;  // beta == pi: the arc collapses onto the chord

    bool bulges_up() const { return start_angle < std::numbers::pi; }
};

inline CircleArc circle_from_angle(double x0, double beta) {
    if (!(x0 > 0.0)) throw std::invalid_argument("circle_from_angle: x0 must be > 0");
    if (!(beta > 0.0 && beta < kTwoPi)) throw std::invalid_argument("circle_from_angle: beta outside (0, 2*pi)");
    CircleArc arc;
    arc.half_chord = x0;
    arc.start_angle = beta;
    const double pi = std::numbers::pi;
    if (std::abs(beta - pi) < 1e-12) {
        arc.degenerate_chord = true;
        arc.center_y = -std::numeric_limits<double>::infinity();
        arc.radius = std::numeric_limits<double>::infinity();
        arc.y_max = 0.0;
        arc.arc_length = 2.0 * x0;  // limit of 2*x0*(pi-beta)/sin(beta) at beta -> pi
        arc.area = 0.0;
        return arc;
    }
    const double s = std::sin(beta);
    const double c = std::cos(beta);
    arc.center_y = x0 * c / s;
    arc.radius = x0 / s;
    arc.y_max = x0 / std::tan(beta / 2.0);
    arc.arc_length = 2.0 * x0 * (pi - beta) / s;
    arc.area = x0 * x0 * ((pi - beta) / (s * s) + c / s);
    return arc;
}

/// Open polyline stroke. Eq-of-motion style extension: beyond its endpoints
/// the stroke continues along the infinite chord line.
struct PolyStroke {
    std::vector<Vec2> points;

    const Vec2& front() const { return points.front(); }
    const Vec2& back() const { return points.back(); }
    bool closed(double eps = 1e-9) const {
        return points.size() > 2 && (points.front() - points.back()).norm() < eps;
    }
};

namespace detail {

inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    auto cross = [](Vec2 u, Vec2 v) { return u.x * v.y - u.y * v.x; };
    const double d1 = cross(b - a, c - a);
    const double d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c);
    const double d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace detail

/// Maps stroke and query point into the chord frame: endpoints at (+-x0, 0).
struct ChordFrame {
    Vec2 origin;     // midpoint of the endpoints
    double cos_a = 1.0, sin_a = 0.0;
    double x0 = 0.0;

    Vec2 to_frame(Vec2 p) const {
        const Vec2 d = p - origin;
        return {cos_a * d.x + sin_a * d.y, -sin_a * d.x + cos_a * d.y};
    }
};

inline ChordFrame chord_frame(const PolyStroke& stroke) {
    if (stroke.points.size() < 2) throw std::invalid_argument("chord_frame: stroke needs >= 2 points");
    const Vec2 gi = stroke.front();
    const Vec2 gf = stroke.back();
    ChordFrame f;
    f.origin = (gi + gf) * 0.5;
    const Vec2 d = gf - gi;
    const double len = d.norm();
    if (len < 1e-12) throw std::invalid_argument("chord_frame: coincident endpoints");
    f.cos_a = d.x / len;
    f.sin_a = d.y / len;
    f.x0 = 0.5 * len;
    return f;
}

/// Rejects strokes whose chord-line extension self-intersects; the region
/// construction assumes the extended curve splits the plane in two.
inline void validate_extended_stroke(const std::vector<Vec2>& pts, double x0) {
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 2; j + 1 < n; ++j)
            if (detail::segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1]))
                throw std::invalid_argument("stroke extension is self-intersecting");
    // extension rays: the chord line outside [-x0, x0]; a polyline segment
    // crossing y = 0 at |x| > x0 crosses one of them
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Vec2 a = pts[i], b = pts[i + 1];
        if ((a.y > 0) == (b.y > 0)) continue;
        const double t = a.y / (a.y - b.y);
        const double xc = a.x + t * (b.x - a.x);
        if (std::abs(xc) > x0 + 1e-9)
            throw std::invalid_argument("stroke extension is self-intersecting");
    }
}

/// True when the point lies in the half-space of the extended stroke that
/// contains y -> +infinity (chord-frame coordinates).
inline bool in_stroke_plus_halfspace(const std::vector<Vec2>& pts, Vec2 p) {
    if (std::abs(p.y) < 1e-12) p.y = 1e-9;  // keep off the extension line
    // crossings of the +x ray with the polyline (half-open rule on y)
    int crossings = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 a = pts[i], b = pts[i + 1];
        if ((a.y > p.y) == (b.y > p.y)) continue;
        const double t = (p.y - a.y) / (b.y - a.y);
        const double xc = a.x + t * (b.x - a.x);
        if (xc > p.x) ++crossings;
    }
    const bool far_side_plus = p.y > 0.0;  // at x -> +inf only the chord line remains
    return (crossings % 2 == 0) ? far_side_plus : !far_side_plus;
}

/// Same side test against the extended circular arc.
inline bool in_arc_plus_halfspace(const CircleArc& arc, Vec2 p) {
    if (std::abs(p.y) < 1e-12) p.y = 1e-9;
    if (arc.degenerate_chord) return p.y > 0.0;
    int crossings = 0;
    // the arc is the part of the circle on its bulge side; the extension is
    // the chord line, never crossed by a horizontal ray off y = 0
    if ((arc.bulges_up() && p.y > 0.0) || (!arc.bulges_up() && p.y < 0.0)) {
        const double r = std::abs(arc.radius);
        const double dy = p.y - arc.center_y;
        const double disc = r * r - dy * dy;
        if (disc > 0.0) {
            const double root = std::sqrt(disc);
            if (root > p.x) ++crossings;
            if (-root > p.x) ++crossings;
        }
    }
    const bool far_side_plus = p.y > 0.0;
    return (crossings % 2 == 0) ? far_side_plus : !far_side_plus;
}

/// Region membership per the half-space rule: the enclosed region is where
/// the stroke side and the arc side disagree.
inline bool region_membership(const PolyStroke& stroke, const CircleArc& arc, Vec2 point) {
    const ChordFrame f = chord_frame(stroke);
    std::vector<Vec2> pts(stroke.points.size());
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = f.to_frame(stroke.points[i]);
    validate_extended_stroke(pts, f.x0);
    const Vec2 p = f.to_frame(point);
    return in_stroke_plus_halfspace(pts, p) != in_arc_plus_halfspace(arc, p);
}

struct OracleResult {
    double probability = 0.0;
    int nesting_violations = 0;  // membership transitions beyond the single expected one
};

/// Inclusion probability by sweeping the starting angle over a uniform grid.
/// Membership is nested, so the boundary angle is read off the sweep; extra
/// transitions are reported, not hidden.
inline OracleResult oracle_probability_detailed(const PolyStroke& stroke, Vec2 point, int samples) {
    if (samples < 64) throw std::invalid_argument("oracle_probability: samples must be >= 64");
    if (stroke.closed()) {
        // all closing circles have null radius: inclusion is plain parity
        // against the polygon itself
        Vec2 p = point;
        if (std::abs(p.y - stroke.points.front().y) < 1e-12) p.y += 1e-9;
        int crossings = 0;
        const auto& pts = stroke.points;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const Vec2 a = pts[i], b = pts[i + 1];
            if ((a.y > p.y) == (b.y > p.y)) continue;
            const double t = (p.y - a.y) / (b.y - a.y);
            if (a.x + t * (b.x - a.x) > p.x) ++crossings;
        }
        return {crossings % 2 == 1 ? 1.0 : 0.0, 0};
    }
    const ChordFrame f = chord_frame(stroke);
    std::vector<Vec2> pts(stroke.points.size());
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = f.to_frame(stroke.points[i]);
    validate_extended_stroke(pts, f.x0);
    const Vec2 p = f.to_frame(point);
    const bool plus_side = in_stroke_plus_halfspace(pts, p);

    std::vector<char> member(samples, 0);
    for (int k = 1; k < samples; ++k) {
        const double beta = kTwoPi * k / samples;
        const CircleArc arc = circle_from_angle(f.x0, beta);
        member[k] = plus_side != in_arc_plus_halfspace(arc, p) ? 1 : 0;
    }
    int transitions = 0;
    for (int k = 2; k < samples; ++k)
        if (member[k] != member[k - 1]) ++transitions;

    OracleResult res;
    res.nesting_violations = std::max(0, transitions - 1);
    if (plus_side) {
        int last = 0;
        for (int k = 1; k < samples; ++k)
            if (member[k]) last = k;
        res.probability = (kTwoPi * last / samples) / kTwoPi;
    } else {
        int first = 0;
        for (int k = samples - 1; k >= 1; --k)
            if (member[k]) first = k;
        res.probability = first == 0 ? 0.0 : (kTwoPi - kTwoPi * first / samples) / kTwoPi;
    }
    return res;
}

inline double oracle_probability(const PolyStroke& stroke, Vec2 point, int samples) {
    return oracle_probability_detailed(stroke, point, samples).probability;
}

/// Finite-family probability: the fraction of candidate regions containing
/// the point, all regions equiprobable.
inline double finite_probability(int n_gamma, int n_regions) {
    if (n_regions < 1) throw std::invalid_argument("finite_probability: n_regions must be >= 1");
    if (n_gamma < 0 || n_gamma > n_regions)
        throw std::invalid_argument("finite_probability: n_gamma outside [0, n_regions]");
    return static_cast<double>(n_gamma) / static_cast<double>(n_regions);
}

}  // namespace strokefield
