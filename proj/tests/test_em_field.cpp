#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "strokefield/circle_oracle.hpp"
#include "strokefield/em_field.hpp"
#include "strokefield/synth.hpp"
#include "support/field_probes.hpp"

using namespace strokefield;
using std::numbers::pi;

namespace {

StrokeScene segment_scene(int size, int half, int* row_out = nullptr) {
    const int c = size / 2;
    std::vector<Pixel> seg;
    for (int x = c - half; x <= c + half; ++x) seg.push_back({x, c});
    Raster<double> edge(size, size, 0.0);
    synth::stamp(edge, seg);
    if (row_out) *row_out = c;
    return build_scene(edge, 0.5);
}

}  // namespace

TEST_CASE("dipole kernel samples the analytic derivatives") {
    const DipoleKernel k = dipole_kernel(4);
    CHECK(k.at_offset(1, 0) == std::complex<double>(1.0, 0.0));
    CHECK(k.at_offset(0, 2) == std::complex<double>(0.0, 0.5));
    CHECK(k.at_offset(0, 0) == std::complex<double>(0.0, 0.0));
    CHECK(k.at_offset(3, -2).real() == Catch::Approx(3.0 / 13.0));
    CHECK(k.at_offset(3, -2).imag() == Catch::Approx(-2.0 / 13.0));
    for (int dy = -4; dy <= 4; ++dy)
        for (int dx = -4; dx <= 4; ++dx) {
            REQUIRE(k.at_offset(dx, dy).real() == -k.at_offset(-dx, dy).real());
            REQUIRE(k.at_offset(dx, dy).real() == k.at_offset(dx, -dy).real());
            REQUIRE(k.at_offset(dx, dy).imag() == k.at_offset(-dx, dy).imag());
            REQUIRE(k.at_offset(dx, dy).imag() == -k.at_offset(dx, -dy).imag());
        }
    CHECK(k.covers(5, 3));
    CHECK_FALSE(k.covers(8, 3));
    CHECK_THROWS_AS(dipole_kernel(0), std::invalid_argument);
}

TEST_CASE("phase convention self-test holds") {
    CHECK_NOTHROW(verify_phase_convention());
}

TEST_CASE("empty scene convolves to zero") {
    StrokeScene scene = build_scene(Raster<double>(32, 32, 0.0), 0.5);
    const auto field = convolve_magnetic(scene, {}, dipole_kernel(31));
    for (double v : field.values.data()) REQUIRE(v == 0.0);
}

TEST_CASE("segment potential matches the analytic line field") {
    const int N = 256;
    int row = 0;
    StrokeScene scene = segment_scene(N, 20, &row);
    const auto field = convolve_magnetic(scene, {1}, dipole_kernel(N - 1), ConvolutionPath::Frequency);
    const double x0 = 20.5;
    double worst = 0.0;
    for (int y = 0; y < N; ++y) {
        if (std::abs(y - row) < 3) continue;
        for (int x = 0; x < N; ++x)
            worst = std::max(worst, std::abs(field.values.at(x, y) -
                                             analytic_line_potential(x - N / 2.0, y - row, x0)));
    }
    CHECK(worst < 0.1);
    // positive on the side the normals point to
    CHECK(field.values.at(N / 2, row + 6) > 0.0);
    CHECK(field.values.at(N / 2, row - 6) < 0.0);
}

TEST_CASE("closed circle produces the certainty plateau") {
    const int N = 192;
    const double cx = 96.0, cy = 96.0, r = 60.0;
    const auto st = synth::analytic_circle(cx, cy, r);
    auto scene = synth::scene_from_analytic(N, N, {st});
    const auto field = convolve_magnetic(scene, {1}, dipole_kernel(N - 1), ConvolutionPath::Frequency);
    const auto dist = probes::chebyshev_distance(N, N, st.pixels);
    for (int y = 0; y < N; ++y)
        for (int x = 0; x < N; ++x) {
            if (dist.at(x, y) < 3) continue;
            const double av = std::abs(field.values.at(x, y));
            if (std::hypot(x - cx, y - cy) < r)
                REQUIRE(av >= 0.95 * kTwoPi);
            else
                REQUIRE(av <= 0.05 * kTwoPi);
            REQUIRE(av <= kTwoPi + kPotentialOvershootTolerance);
        }
}

TEST_CASE("uncertain contour scales the plateau by its intensity") {
    const int N = 128;
    auto st = synth::analytic_circle(64, 64, 40, 0.7);
    auto scene = synth::scene_from_analytic(N, N, {st});
    const auto field = convolve_magnetic(scene, {1}, dipole_kernel(N - 1), ConvolutionPath::Frequency);
    CHECK(std::abs(field.values.at(64, 64)) == Catch::Approx(0.7 * kTwoPi).epsilon(0.03));
    CHECK(std::abs(field.values.at(4, 4)) < 0.05 * kTwoPi);
}

TEST_CASE("linearity over disjoint strokes is bit exact") {
    const int N = 96;
    std::vector<Pixel> a, b;
    for (int x = 10; x <= 40; ++x) a.push_back({x, 25});
    for (int y = 50; y <= 80; ++y) b.push_back({60, y});
    Raster<double> ea(N, N, 0.0), eb(N, N, 0.0), eab(N, N, 0.0);
    synth::stamp(ea, a);
    synth::stamp(eb, b);
    synth::stamp(eab, a);
    synth::stamp(eab, b);
    const auto kernel = dipole_kernel(N - 1);
    for (ConvolutionPath path : {ConvolutionPath::Spatial, ConvolutionPath::Frequency}) {
        const auto fa = convolve_magnetic(build_scene(ea, 0.5), {1}, kernel, path);
        const auto fb = convolve_magnetic(build_scene(eb, 0.5), {1}, kernel, path);
        const auto fab = convolve_magnetic(build_scene(eab, 0.5), {1, 1}, kernel, path);
        for (std::size_t i = 0; i < fab.values.size(); ++i)
            REQUIRE(fab.values.data()[i] == fa.values.data()[i] + fb.values.data()[i]);
    }
}

TEST_CASE("negating every sign negates the field exactly") {
    const int N = 96;
    Raster<double> edge(N, N, 0.0);
    synth::stamp(edge, synth::arc_chain(30, 40, 18, 0.4, 2.9));
    synth::stamp(edge, synth::segment_chain({55, 20}, {80, 70}));
    auto scene = build_scene(edge, 0.5);
    REQUIRE(scene.substrokes.size() == 2);
    const auto kernel = dipole_kernel(N - 1);
    const auto plus = convolve_magnetic(scene, {1, 1}, kernel);
    const auto minus = convolve_magnetic(scene, {-1, -1}, kernel);
    for (std::size_t i = 0; i < plus.values.size(); ++i)
        REQUIRE(plus.values.data()[i] == -minus.values.data()[i]);
}

TEST_CASE("frequency and spatial paths agree") {
    const int N = 96;
    Raster<double> edge(N, N, 0.0);
    synth::stamp(edge, synth::circle_chain(35, 35, 20));
    synth::stamp(edge, synth::segment_chain({55, 60}, {85, 75}));
    auto scene = build_scene(edge, 0.5);
    const std::vector<int> signs(scene.substrokes.size(), 1);
    const auto fs = convolve_magnetic(scene, signs, dipole_kernel(N - 1), ConvolutionPath::Spatial);
    const auto ff = convolve_magnetic(scene, signs, dipole_kernel(N - 1), ConvolutionPath::Frequency);
    double worst = 0.0;
    for (std::size_t i = 0; i < fs.values.size(); ++i)
        worst = std::max(worst, std::abs(fs.values.data()[i] - ff.values.data()[i]));
    CHECK(worst < 1e-6);
}

TEST_CASE("analytic line potential values and conventions") {
    const double x0 = 5.0;
    CHECK(analytic_line_potential(0.0, x0, x0) == Catch::Approx(pi / 2.0));
    CHECK(analytic_line_potential(0.0, 1e9, x0) == Catch::Approx(0.0).margin(1e-8));
    CHECK(analytic_line_potential(0.0, 1e-9, x0) == Catch::Approx(pi).margin(1e-6));
    CHECK(analytic_line_potential(0.0, 0.0, x0) == pi);
    CHECK(analytic_line_potential(7.0, 0.0, x0) == 0.0);
    CHECK(analytic_line_potential(-5.0, 0.0, x0) == pi / 2.0);
    CHECK(analytic_line_potential(0.0, -2.0, x0) == -analytic_line_potential(0.0, 2.0, x0));
    CHECK_THROWS_AS(analytic_line_potential(0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("sign fix cases") {
    SECTION("literal transform as published") {
        CHECK(sign_fix_line(0.3, false) == 0.3);
        CHECK(sign_fix_line(-0.5, true) == Catch::Approx(-0.5 - kTwoPi));
        CHECK(sign_fix_line(0.5, true) == Catch::Approx(kTwoPi - 0.5));
        CHECK(sign_fix_line(0.0, true) == 0.0);
    }
    SECTION("corrected fold keeps the plus side positive") {
        CHECK(sign_fix_line(-0.5, true, SignFixMode::Corrected) == Catch::Approx(kTwoPi - 0.5));
        CHECK(sign_fix_line(0.5, false, SignFixMode::Corrected) == Catch::Approx(0.5 - kTwoPi));
        CHECK(sign_fix_line(0.5, true, SignFixMode::Corrected) == 0.5);
        CHECK(sign_fix_line(-0.5, false, SignFixMode::Corrected) == -0.5);
    }
}

TEST_CASE("corrected fold matches the convolution on a curved stroke; literal does not") {
    // C-shaped stroke: half circle of radius 40 bulging toward +y
    const int N = 128;
    const double cx = 64.0, cyr = 50.0, r = 40.0;
    const auto chain = synth::arc_chain(cx, cyr, r, 0.0, pi);
    Raster<double> edge(N, N, 0.0);
    synth::stamp(edge, chain);
    auto scene = build_scene(edge, 0.5);
    REQUIRE(scene.substrokes.size() == 1);
    const auto field = convolve_magnetic(scene, {1}, dipole_kernel(N - 1), ConvolutionPath::Frequency);

    PolyStroke stroke;
    for (Pixel p : chain) stroke.points.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
    const ChordFrame frame = chord_frame(stroke);
    std::vector<Vec2> framed(stroke.points.size());
    for (std::size_t i = 0; i < framed.size(); ++i) framed[i] = frame.to_frame(stroke.points[i]);

    double orient = 0.0;  // conv sign vs fold sign, fixed by the first probe
    for (Pixel probe : {Pixel{64, 60}, Pixel{64, 75}, Pixel{50, 65}, Pixel{64, 40}, Pixel{30, 30}}) {
        const Vec2 pf = frame.to_frame({static_cast<double>(probe.x), static_cast<double>(probe.y)});
        const bool in_plus = in_stroke_plus_halfspace(framed, pf);
        const double raw = analytic_line_potential(pf.x, pf.y, frame.x0);
        const double corrected = sign_fix_line(raw, in_plus, SignFixMode::Corrected);
        const double conv = field.values.at(probe.x, probe.y);
        if (orient == 0.0) orient = (corrected > 0) == (conv > 0) ? 1.0 : -1.0;
        REQUIRE(orient * conv == Catch::Approx(corrected).margin(0.3));
    }
    // deep cavity probe: literal keeps the raw chord value and misses by ~2pi - 2|raw|
    const Vec2 pf = frame.to_frame({64.0, 60.0});
    const bool in_plus = in_stroke_plus_halfspace(framed, pf);
    const double raw = analytic_line_potential(pf.x, pf.y, frame.x0);
    const double literal = sign_fix_line(raw, in_plus, SignFixMode::Literal);
    CHECK(std::abs(std::abs(literal) - std::abs(field.values.at(64, 60))) > 0.5);
}

TEST_CASE("electric field differentiation") {
    SECTION("constant potential has zero gradient") {
        PotentialField f{Raster<double>(8, 8, 3.25), ""};
        const auto e = electric_field(f);
        for (std::size_t i = 0; i < e.ex.size(); ++i) {
            REQUIRE(e.ex.data()[i] == 0.0);
            REQUIRE(e.ey.data()[i] == 0.0);
        }
    }
    SECTION("linear ramp is exact, borders included") {
        PotentialField f{Raster<double>(9, 7), ""};
        for (int y = 0; y < 7; ++y)
            for (int x = 0; x < 9; ++x) f.values.at(x, y) = static_cast<double>(x);
        const auto e = electric_field(f);
        for (std::size_t i = 0; i < e.ex.size(); ++i) {
            REQUIRE(e.ex.data()[i] == 1.0);
            REQUIRE(e.ey.data()[i] == 0.0);
        }
    }
    SECTION("too small fields are rejected") {
        PotentialField f{Raster<double>(2, 5, 0.0), ""};
        CHECK_THROWS_AS(electric_field(f), std::invalid_argument);
    }
}

TEST_CASE("aligned circle field is quiet away from the boundary") {
    const int N = 192;
    const auto st = synth::analytic_circle(96, 96, 60);
    auto scene = synth::scene_from_analytic(N, N, {st});
    const auto field = convolve_magnetic(scene, {1}, dipole_kernel(N - 1), ConvolutionPath::Frequency);
    const auto e = electric_field(field);
    const auto m2 = magnitude_squared(e);
    const auto dist = probes::chebyshev_distance(N, N, st.pixels);
    std::vector<double> off;
    double peak = 0.0;
    for (int y = 0; y < N; ++y)
        for (int x = 0; x < N; ++x) {
            peak = std::max(peak, std::sqrt(m2.at(x, y)));
            if (dist.at(x, y) >= 3) off.push_back(std::sqrt(m2.at(x, y)));
        }
    std::nth_element(off.begin(), off.begin() + static_cast<std::ptrdiff_t>(off.size() / 2), off.end());
    CHECK(off[off.size() / 2] < 0.05 * peak);
}

TEST_CASE("equipotential level sets are circular with the level as starting angle") {
    const int N = 256;
    int row = 0;
    StrokeScene scene = segment_scene(N, 20, &row);
    const auto field = convolve_magnetic(scene, {1}, dipole_kernel(N - 1), ConvolutionPath::Frequency);
    const auto dist = probes::chebyshev_distance(N, N, probes::stroke_pixels(scene.intensity));
    const double x0 = 20.5;
    const double side = field.values.at(N / 2, row + 6) > 0.0 ? 1.0 : -1.0;
    for (double level : {pi / 4.0, pi / 2.0, 3.0 * pi / 4.0}) {
        auto pts = probes::level_crossings(field.values, side * level);
        std::vector<Vec2> keep;
        for (const Vec2& p : pts) {
            const int xi = std::clamp(static_cast<int>(std::lround(p.x)), 0, N - 1);
            const int yi = std::clamp(static_cast<int>(std::lround(p.y)), 0, N - 1);
            if (dist.at(xi, yi) >= 2) keep.push_back(p);
        }
        REQUIRE(keep.size() > 20);
        const auto fit = probes::kasa_fit(keep);
        REQUIRE(fit.rms_radial < 0.02 * fit.r);
        REQUIRE(fit.r == Catch::Approx(x0 / std::sin(level)).epsilon(0.03));
        const double cy_rel = side * (fit.cy - row);
        const double x0_eff = std::sqrt(std::max(0.0, fit.r * fit.r - cy_rel * cy_rel));
        const double beta_fit = std::atan2(x0_eff, cy_rel);
        REQUIRE(std::abs(beta_fit - level) < 0.1);
    }
    // at the level pi the circle degenerates onto the chord: no off-stroke
    // crossings exist at all
    auto deg = probes::level_crossings(field.values, side * (pi - 0.05));
    int off_stroke = 0;
    for (const Vec2& p : deg) {
        const int xi = std::clamp(static_cast<int>(std::lround(p.x)), 0, N - 1);
        const int yi = std::clamp(static_cast<int>(std::lround(p.y)), 0, N - 1);
        if (dist.at(xi, yi) >= 2) ++off_stroke;
    }
    CHECK(off_stroke == 0);
}

TEST_CASE("potential decays at the border of a padded scene") {
    const int N = 1024;
    int row = 0;
    StrokeScene scene = segment_scene(N, 20, &row);
    double worst = 0.0;
    for (int t = 0; t < N; t += 8) {
        for (Pixel p : {Pixel{t, 0}, Pixel{t, N - 1}, Pixel{0, t}, Pixel{N - 1, t}})
            worst = std::max(worst, std::abs(potential_at(scene, {1}, p)));
    }
    CHECK(worst < 0.1);
}

TEST_CASE("contract violations are rejected") {
    const int N = 32;
    int row = 0;
    StrokeScene scene = segment_scene(N, 8, &row);
    CHECK_THROWS_AS(convolve_magnetic(scene, {1}, dipole_kernel(8)), std::invalid_argument);
    CHECK_THROWS_AS(convolve_magnetic(scene, {1, 1}, dipole_kernel(N - 1)), std::invalid_argument);
    CHECK_THROWS_AS(convolve_magnetic(scene, {2}, dipole_kernel(N - 1)), std::invalid_argument);
    scene.intensity.at(2, 2) = 1.0;  // stroke pixel without a chain or angle
    CHECK_THROWS_AS(convolve_magnetic(scene, {1}, dipole_kernel(N - 1)), std::invalid_argument);
}
