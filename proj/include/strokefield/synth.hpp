#pragma once

// Synthetic scene construction: thin rasterized outlines (circle, rectangle,
// blob, open curves), perimeter ablation, and filled ground-truth masks.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "raster.hpp"
#include "stroke_model.hpp"

namespace strokefield::synth {

/// Traces a parametric curve into an ordered, 8-connected, minimal pixel
/// chain (no pixel is redundant for connectivity).
inline std::vector<Pixel> trace_curve(const std::function<Vec2(double)>& fn, double t0, double t1, int steps) {
    std::vector<Pixel> chain;
    for (int i = 0; i <= steps; ++i) {
        const double t = t0 + (t1 - t0) * i / steps;
        const Vec2 v = fn(t);
        const Pixel p{static_cast<int>(std::lround(v.x)), static_cast<int>(std::lround(v.y))};
        if (chain.empty() || !(p == chain.back())) chain.push_back(p);
    }
    if (chain.size() > 1 && chain.front() == chain.back()) chain.pop_back();
    const bool closed = chain.size() > 2 && detail::adjacent8(chain.front(), chain.back());
    // drop corner pixels whose neighbors are already 8-adjacent; closed
    // traces wrap the rule across the seam
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < chain.size() && chain.size() > 2;) {
            if (!closed && (i == 0 || i + 1 == chain.size())) {
                ++i;
                continue;
            }
            const std::size_t n = chain.size();
            const Pixel& prev = chain[(i + n - 1) % n];
            const Pixel& next = chain[(i + 1) % n];
            if (detail::adjacent8(prev, next)) {
                chain.erase(chain.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
            } else {
                ++i;
            }
        }
    }
    return chain;
}

inline std::vector<Pixel> circle_chain(double cx, double cy, double r) {
    const int steps = std::max(64, static_cast<int>(r * 16.0));
    return trace_curve([&](double t) { return Vec2{cx + r * std::cos(t), cy + r * std::sin(t)}; },
                       0.0, 2.0 * std::numbers::pi, steps);
}

inline std::vector<Pixel> arc_chain(double cx, double cy, double r, double phi0, double phi1) {
    const int steps = std::max(64, static_cast<int>(r * std::abs(phi1 - phi0) * 4.0));
    return trace_curve([&](double t) { return Vec2{cx + r * std::cos(t), cy + r * std::sin(t)}; },
                       phi0, phi1, steps);
}

inline std::vector<Pixel> polyline_chain(const std::vector<Vec2>& pts) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) len += (pts[i + 1] - pts[i]).norm();
    const int steps = std::max(32, static_cast<int>(len * 4.0));
    std::vector<double> cum{0.0};
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) cum.push_back(cum.back() + (pts[i + 1] - pts[i]).norm());
    auto at = [&](double s) {
        for (std::size_t i = 0; i + 1 < cum.size(); ++i) {
            if (s <= cum[i + 1] || i + 2 == cum.size()) {
                const double seg = cum[i + 1] - cum[i];
                const double u = seg > 0.0 ? (s - cum[i]) / seg : 0.0;
                return pts[i] + (pts[i + 1] - pts[i]) * u;
            }
        }
        return pts.back();
    };
    return trace_curve([&](double t) { return at(t); }, 0.0, len, steps);
}

inline std::vector<Pixel> segment_chain(Vec2 a, Vec2 b) { return polyline_chain({a, b}); }

inline std::vector<Pixel> rect_chain(double x0, double y0, double x1, double y1) {
    return polyline_chain({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}});
}

/// Smooth random closed curve: a circle with low-order radial harmonics.
struct BlobShape {
    double cx = 0.0, cy = 0.0, r = 1.0;
    std::array<double, 3> amp{};    // harmonics 2..4
    std::array<double, 3> phase{};

    static BlobShape make(double cx, double cy, double r, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        auto u01 = [&] { return (rng() >> 11) * 0x1.0p-53; };
        BlobShape b;
        b.cx = cx;
        b.cy = cy;
        b.r = r;
        for (int k = 0; k < 3; ++k) {
            b.amp[static_cast<std::size_t>(k)] = 0.04 + 0.08 * u01();
            b.phase[static_cast<std::size_t>(k)] = 2.0 * std::numbers::pi * u01();
        }
        return b;
    }

    double radius_at(double phi) const {
        double f = 1.0;
        for (int k = 0; k < 3; ++k)
            f += amp[static_cast<std::size_t>(k)] * std::cos((k + 2) * phi + phase[static_cast<std::size_t>(k)]);
        return r * f;
    }

    bool contains(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        return std::hypot(dx, dy) <= radius_at(std::atan2(dy, dx));
    }
};

inline std::vector<Pixel> blob_chain(const BlobShape& b) {
    const int steps = std::max(128, static_cast<int>(b.r * 16.0));
    return trace_curve(
        [&](double t) {
            const double rr = b.radius_at(t);
            return Vec2{b.cx + rr * std::cos(t), b.cy + rr * std::sin(t)};
        },
        0.0, 2.0 * std::numbers::pi, steps);
}

/// Removes exactly round(fraction * n) pixels from the chain in a few
/// randomized contiguous gaps (wrapping around for closed chains).
inline std::vector<Pixel> ablate_chain(const std::vector<Pixel>& chain, double fraction, std::mt19937_64& rng,
                                       bool closed) {
    if (!(fraction >= 0.0 && fraction <= 0.9)) throw std::invalid_argument("ablate_chain: fraction outside [0, 0.9]");
    const int n = static_cast<int>(chain.size());
    const int target = static_cast<int>(std::lround(fraction * n));
    if (target == 0) return chain;
    std::vector<char> removed(chain.size(), 0);
    const int gaps = std::max(1, static_cast<int>(std::lround(target / 12.0)));
    int done = 0;
    auto take = [&](int idx) {
        if (!removed[static_cast<std::size_t>(idx)]) {
            removed[static_cast<std::size_t>(idx)] = 1;
            ++done;
        }
    };
    for (int g = 0; g < gaps && done < target; ++g) {
        const int want = std::min(target - done, target / gaps + (g < target % gaps ? 1 : 0));
        const int start = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        for (int k = 0; k < want; ++k) {
            int idx = start + k;
            if (closed)
                idx %= n;
            else if (idx >= n)
                break;
            take(idx);
        }
    }
    for (int idx = 0; done < target && idx < n; ++idx) take(idx);
    std::vector<Pixel> out;
    out.reserve(chain.size() - static_cast<std::size_t>(target));
    for (std::size_t i = 0; i < chain.size(); ++i)
        if (!removed[i]) out.push_back(chain[i]);
    return out;
}

inline void stamp(Raster<double>& raster, const std::vector<Pixel>& pixels, double value = 1.0) {
    for (Pixel p : pixels)
        if (raster.in_bounds(p.x, p.y)) raster.at(p.x, p.y) = value;
}

/// Builds a StrokeScene directly from chains with analytically known
/// normals; bypasses extraction and estimation for controlled tests.
struct AnalyticStroke {
    std::vector<Pixel> pixels;
    std::vector<double> normals;  // one per pixel
    double intensity = 1.0;
};

inline StrokeScene scene_from_analytic(int width, int height, const std::vector<AnalyticStroke>& strokes) {
    StrokeScene scene;
    scene.width = width;
    scene.height = height;
    scene.intensity = Raster<double>(width, height, 0.0);
    scene.normal_angle = Raster<double>(width, height, 0.0);
    scene.density = Raster<double>(width, height, 0.0);
    scene.substroke_id = Raster<int>(width, height, 0);
    for (std::size_t i = 0; i < strokes.size(); ++i) {
        const auto& st = strokes[i];
        SubStroke sub;
        sub.id = static_cast<int>(i) + 1;
        sub.pixels = st.pixels;
        sub.weight = st.intensity;
        sub.head = st.pixels.front();
        sub.tail = st.pixels.back();
        for (std::size_t k = 0; k < st.pixels.size(); ++k) {
            const Pixel p = st.pixels[k];
            scene.intensity.at(p.x, p.y) = st.intensity;
            scene.normal_angle.at(p.x, p.y) = st.normals[k];
            scene.density.at(p.x, p.y) = density_factor(st.normals[k]);
            scene.substroke_id.at(p.x, p.y) = sub.id;
        }
        scene.substrokes.push_back(std::move(sub));
    }
    return scene;
}

/// Circle chain with exact outward radial normals attached.
inline AnalyticStroke analytic_circle(double cx, double cy, double r, double intensity = 1.0) {
    AnalyticStroke st;
    st.pixels = circle_chain(cx, cy, r);
    st.intensity = intensity;
    st.normals.reserve(st.pixels.size());
    for (Pixel p : st.pixels) st.normals.push_back(std::atan2(p.y - cy, p.x - cx));
    return st;
}

}  // namespace strokefield::synth
