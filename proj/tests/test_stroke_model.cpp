#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>

#include "strokefield/stroke_model.hpp"
#include "strokefield/synth.hpp"

using namespace strokefield;
using std::numbers::pi;

namespace {

Raster<double> raster_with(int w, int h, const std::vector<Pixel>& pixels, double v = 1.0) {
    Raster<double> r(w, h, 0.0);
    synth::stamp(r, pixels, v);
    return r;
}

double mod_pi(double a) {
    a = std::fmod(a, pi);
    return a < 0.0 ? a + pi : a;
}

double mod_pi_dist(double a, double b) {
    const double d = std::abs(mod_pi(a) - mod_pi(b));
    return std::min(d, pi - d);
}

}  // namespace

TEST_CASE("single horizontal segment is one open chain") {
    std::vector<Pixel> seg;
    for (int x = 5; x < 45; ++x) seg.push_back({x, 10});
    const auto subs = extract_substrokes(raster_with(64, 32, seg), 0.5);
    REQUIRE(subs.size() == 1);
    CHECK(subs[0].pixels.size() == 40);
    CHECK_FALSE(subs[0].closed);
    const std::set<std::pair<int, int>> ends{{subs[0].head.x, subs[0].head.y}, {subs[0].tail.x, subs[0].tail.y}};
    CHECK(ends == std::set<std::pair<int, int>>{{5, 10}, {44, 10}});
}

TEST_CASE("two disjoint arcs give two sub-strokes") {
    auto a = synth::arc_chain(20.0, 32.0, 12.0, 0.3, 2.8);
    auto b = synth::arc_chain(60.0, 32.0, 12.0, 3.4, 5.9);
    Raster<double> edge(96, 64, 0.0);
    synth::stamp(edge, a);
    synth::stamp(edge, b);
    const auto subs = extract_substrokes(edge, 0.5);
    CHECK(subs.size() == 2);
}

TEST_CASE("crossing segments split into four arms at the junction") {
    std::vector<Pixel> cross;
    for (int x = 4; x <= 28; ++x) cross.push_back({x, 16});
    for (int y = 4; y <= 28; ++y) cross.push_back({16, y});
    Raster<double> edge(33, 33, 0.0);
    synth::stamp(edge, cross);
    const auto subs = extract_substrokes(edge, 0.5);
    REQUIRE(subs.size() == 4);
    std::size_t total = 0;
    for (const auto& s : subs) total += s.pixels.size();
    CHECK(total == cross.size() - 1);  // the crossing pixel was stamped twice
}

TEST_CASE("label partition covers every above-threshold pixel") {
    Raster<double> edge(96, 96, 0.0);
    synth::stamp(edge, synth::circle_chain(30, 30, 14));
    synth::stamp(edge, synth::segment_chain({50, 60}, {88, 70}));
    synth::stamp(edge, synth::rect_chain(55, 10, 85, 35));
    int above = 0;
    for (double v : edge.data())
        if (v >= 0.5) ++above;
    const auto subs = extract_substrokes(edge, 0.5);
    std::size_t total = 0;
    std::set<std::pair<int, int>> seen;
    for (const auto& s : subs) {
        total += s.pixels.size();
        for (Pixel p : s.pixels) seen.insert({p.x, p.y});
    }
    CHECK(total == static_cast<std::size_t>(above));
    CHECK(seen.size() == total);
}

TEST_CASE("closed circle chain is detected as closed") {
    Raster<double> edge(80, 80, 0.0);
    synth::stamp(edge, synth::circle_chain(40, 40, 22));
    const auto subs = extract_substrokes(edge, 0.5);
    REQUIRE(subs.size() == 1);
    CHECK(subs[0].closed);
    CHECK(subs[0].head == subs[0].tail);
}

TEST_CASE("empty raster yields no sub-strokes") {
    CHECK(extract_substrokes(Raster<double>(16, 16, 0.0), 0.5).empty());
}

TEST_CASE("blobs of stroke pixels are rejected as unthinned") {
    Raster<double> edge(16, 16, 0.0);
    for (int y = 4; y < 8; ++y)
        for (int x = 4; x < 8; ++x) edge.at(x, y) = 1.0;
    CHECK_THROWS_AS(extract_substrokes(edge, 0.5), InputError);
}

TEST_CASE("threshold domain") {
    CHECK_THROWS_AS(extract_substrokes(Raster<double>(4, 4, 0.0), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(extract_substrokes(Raster<double>(4, 4, 0.0), 1.5), std::invalid_argument);
}

TEST_CASE("density factor closed form") {
    CHECK(density_factor(0.0) == Catch::Approx(1.0));
    CHECK(density_factor(pi / 4.0) == Catch::Approx(std::sqrt(2.0)));
    CHECK(density_factor(pi / 3.0) == Catch::Approx(1.1547005383792515));
    for (double t = -7.0; t < 7.0; t += 0.037) {
        const double f = density_factor(t);
        REQUIRE(f >= 1.0 - 1e-12);
        REQUIRE(f <= std::sqrt(2.0) + 1e-12);
        REQUIRE(density_factor(t + pi / 2.0) == Catch::Approx(f));
    }
    CHECK_THROWS_AS(density_factor(std::nan("")), std::invalid_argument);
}

TEST_CASE("orientation of axis-aligned segments") {
    SECTION("horizontal -> normal pi/2") {
        std::vector<Pixel> seg;
        for (int x = 4; x < 36; ++x) seg.push_back({x, 12});
        auto scene = build_scene(raster_with(48, 24, seg), 0.5);
        for (int x = 8; x < 32; ++x)
            REQUIRE(mod_pi_dist(scene.normal_angle.at(x, 12), pi / 2.0) < 1e-9);
    }
    SECTION("vertical -> normal 0") {
        std::vector<Pixel> seg;
        for (int y = 4; y < 36; ++y) seg.push_back({12, y});
        auto scene = build_scene(raster_with(24, 48, seg), 0.5);
        for (int y = 8; y < 32; ++y)
            REQUIRE(mod_pi_dist(scene.normal_angle.at(12, y), 0.0) < 1e-9);
    }
}

TEST_CASE("oblique segments have normals at alpha + pi/2") {
    for (double alpha : {0.2, 0.6, 1.1, -0.4, 2.3}) {
        const Vec2 c{40.0, 40.0};
        const Vec2 d{std::cos(alpha), std::sin(alpha)};
        auto chain = synth::segment_chain(c - d * 25.0, c + d * 25.0);
        auto scene = build_scene(raster_with(80, 80, chain), 0.5);
        REQUIRE(scene.substrokes.size() == 1);
        const auto& pix = scene.substrokes[0].pixels;
        for (std::size_t k = 5; k + 5 < pix.size(); ++k) {
            const double got = scene.normal_angle.at(pix[k].x, pix[k].y);
            REQUIRE(mod_pi_dist(got, alpha + pi / 2.0) < 0.05);
        }
    }
}

TEST_CASE("circle normals are radial and chain-consistent") {
    Raster<double> edge(96, 96, 0.0);
    synth::stamp(edge, synth::circle_chain(48, 48, 30));
    auto scene = build_scene(edge, 0.5);
    REQUIRE(scene.substrokes.size() == 1);

    // pixel nearest (+30, 0) from the center: normal is radial (angle 0 mod pi)
    Pixel best{0, 0};
    double bd = 1e9;
    for (Pixel p : scene.substrokes[0].pixels) {
        const double d = std::hypot(p.x - 78.0, p.y - 48.0);
        if (d < bd) {
            bd = d;
            best = p;
        }
    }
    CHECK(mod_pi_dist(scene.normal_angle.at(best.x, best.y), 0.0) < 0.1);

    // chain consistency: every normal agrees with the radial direction
    // chosen at the first pixel (no antipodal flips along the chain)
    const auto& pix = scene.substrokes[0].pixels;
    const Pixel p0 = pix.front();
    const double ref = std::remainder(scene.normal_angle.at(p0.x, p0.y) - std::atan2(p0.y - 48.0, p0.x - 48.0),
                                      2.0 * pi);
    const double expected_offset = std::abs(ref) > pi / 2.0 ? pi : 0.0;
    for (Pixel p : pix) {
        const double radial = std::atan2(p.y - 48.0, p.x - 48.0);
        const double got = scene.normal_angle.at(p.x, p.y);
        const double err = std::abs(std::remainder(got - radial - expected_offset, 2.0 * pi));
        REQUIRE(err < 0.35);
    }
}

TEST_CASE("isolated pixel gets angle 0 and is flagged") {
    auto scene = build_scene(raster_with(16, 16, {{8, 8}}), 0.5);
    REQUIRE(scene.substrokes.size() == 1);
    CHECK(scene.normal_angle.at(8, 8) == 0.0);
    REQUIRE(scene.undefined_orientation.size() == 1);
    CHECK(scene.undefined_orientation[0] == Pixel{8, 8});
    CHECK(scene.density.at(8, 8) == Catch::Approx(1.0));
}

TEST_CASE("double boundary doubles the density of flagged chains only") {
    std::vector<Pixel> a, b;
    for (int x = 2; x < 22; ++x) a.push_back({x, 4});
    for (int x = 2; x < 22; ++x) b.push_back({x, 12});
    Raster<double> edge(24, 16, 0.0);
    synth::stamp(edge, a);
    synth::stamp(edge, b);
    auto scene = build_scene(edge, 0.5);
    REQUIRE(scene.substrokes.size() == 2);
    const double before = scene.density.at(10, 4);
    CHECK(before == Catch::Approx(1.0));
    apply_double_boundary(scene, {1});
    CHECK(scene.density.at(10, 4) == Catch::Approx(2.0));
    CHECK(scene.density.at(10, 12) == Catch::Approx(1.0));
    CHECK(scene.substrokes[0].double_boundary);
    CHECK_FALSE(scene.substrokes[1].double_boundary);
    CHECK_THROWS_AS(apply_double_boundary(scene, {7}), std::invalid_argument);
}

TEST_CASE("double boundary at 45 degrees reaches 2*sqrt(2)") {
    auto chain = synth::segment_chain({4, 4}, {28, 28});
    auto scene = build_scene(raster_with(33, 33, chain), 0.5);
    REQUIRE(scene.substrokes.size() == 1);
    apply_double_boundary(scene, {1});
    const Pixel mid = scene.substrokes[0].pixels[scene.substrokes[0].pixels.size() / 2];
    CHECK(scene.density.at(mid.x, mid.y) == Catch::Approx(2.0 * std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("ablation removes the requested pixel count exactly") {
    const auto chain = synth::circle_chain(64, 64, 40);
    std::mt19937_64 rng(77);
    const auto kept = synth::ablate_chain(chain, 0.25, rng, true);
    CHECK(kept.size() == chain.size() - static_cast<std::size_t>(std::lround(0.25 * chain.size())));
    std::mt19937_64 rng2(77);
    CHECK_THROWS_AS(synth::ablate_chain(chain, 0.95, rng2, true), std::invalid_argument);
}
