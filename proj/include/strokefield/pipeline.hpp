#pragma once

// End-to-end driver: edge raster in, probability fields and reconstruction
// out. Also hosts the synthetic scene generator behind the `gen` CLI verb.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "circle_oracle.hpp"
#include "em_field.hpp"
#include "errors.hpp"
#include "pgm.hpp"
#include "probability.hpp"
#include "repulsion.hpp"
#include "splitter.hpp"
#include "stroke_model.hpp"
#include "synth.hpp"

namespace strokefield {

struct PipelineConfig {
    std::string input_path;
    std::string out_dir;
    double threshold = 0.5;
    int window = kDefaultOrientationWindow;
    std::string double_boundaries_path;   // optional: one sub-stroke id per line
    std::string orientation_path;         // optional: 16-bit graymap, radians x 1000
    ConvolutionPath kernel_path = ConvolutionPath::Frequency;
    int restarts = 4;                     // 0 disables the optimization stage
    double vth1 = std::numbers::pi / 2.0;
    double vth2 = std::numbers::pi;
    bool split = false;
    int smooth_k = 2;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("threshold outside (0, 1]");
        if (window < 1) throw ConfigError("window must be >= 1");
        if (restarts < 0) throw ConfigError("restarts must be >= 0");
        if (!(vth1 > 0.0) || !(vth2 > 0.0)) throw ConfigError("interaction thresholds must be > 0");
        if (smooth_k < 0) throw ConfigError("smooth-k must be >= 0");
        if (out_dir.empty()) throw ConfigError("output directory required");
    }
};

struct PipelineResult {
    int substroke_count = 0;
    std::vector<int> signs;
    double omega_initial = 0.0;
    double omega = 0.0;
    std::vector<std::vector<int>> subimages;
    SanitizeStats sanitize_stats;
    std::filesystem::path sidecar_path;
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline Raster<double> preview_from_potential(const Raster<double>& vm) {
    Raster<double> out(vm.width(), vm.height());
    for (std::size_t i = 0; i < vm.size(); ++i)
        out.data()[i] = (vm.data()[i] + kTwoPi) / (2.0 * kTwoPi);  // [-2pi, 2pi] -> [0, 1]
    return out;
}

inline std::vector<int> read_id_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open: " + path);
    std::vector<int> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        try {
            ids.push_back(std::stoi(line));
        } catch (const std::exception&) {
            throw InputError("bad sub-stroke id '" + line + "' in " + path);
        }
    }
    return ids;
}

}  // namespace detail

inline PipelineResult run_pipeline(const PipelineConfig& config) {
    config.validate();
    verify_phase_convention();
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const fs::path out(config.out_dir);

    Raster<double> edge = read_pgm(config.input_path);
    StrokeScene scene = build_scene(edge, config.threshold, config.window);

    if (!config.orientation_path.empty()) {
        const Raster<double> ori = read_pgm(config.orientation_path);
        if (!ori.same_shape(scene.intensity)) throw InputError("orientation override has wrong dimensions");
        for (const auto& sub : scene.substrokes)
            for (Pixel p : sub.pixels) scene.normal_angle.at(p.x, p.y) = ori.at(p.x, p.y) * 65535.0 / 1000.0;
        fill_density(scene);
    }

    std::vector<int> double_ids;
    if (!config.double_boundaries_path.empty()) {
        double_ids = detail::read_id_list(config.double_boundaries_path);
        try {
            apply_double_boundary(scene, double_ids);
        } catch (const std::invalid_argument& e) {
            throw InputError(e.what());
        }
    }

    const int n = static_cast<int>(scene.substrokes.size());
    const SubstrokeFieldCache cache = [&] {
        if (config.kernel_path == ConvolutionPath::Spatial) {
            const DipoleKernel kernel = dipole_kernel(std::max(1, std::max(scene.width, scene.height) - 1));
            return SubstrokeFieldCache::build(scene, kernel, ConvolutionPath::Spatial);
        }
        return SubstrokeFieldCache::build(scene, DipoleKernel{}, ConvolutionPath::Frequency);
    }();

    PipelineResult result;
    result.substroke_count = n;
    std::vector<int> signs(static_cast<std::size_t>(n), 1);
    std::vector<FlipReportRow> report;
    if (n > 0) {
        const auto e0 = electric_field(PotentialField{cache.combine(signs), {}});
        result.omega_initial = variance_objective(e0);
        if (config.restarts > 0) {
            const FlipGroupList groups = build_groups(scene, cache, config.vth1, config.vth2);
            const SignConfiguration best = optimize_flips(scene, cache, groups, {signs, result.omega_initial},
                                                          config.restarts, config.seed, &report);
            signs = best.signs;
            result.omega = best.objective;
        } else {
            result.omega = result.omega_initial;
        }
        for (int i = 0; i < n; ++i) scene.substrokes[static_cast<std::size_t>(i)].sign = signs[static_cast<std::size_t>(i)];
    }
    result.signs = signs;

    SubImageSet subimages;
    if (config.split) {
        subimages = split_by_attraction(scene, cache, signs);
    } else {
        std::vector<int> all;
        for (const auto& s : scene.substrokes) all.push_back(s.id);
        subimages = split_by_attraction(scene, cache, signs, 1e300, &all);  // no pair is attractive
    }
    for (const auto& sub : subimages.members) result.subimages.push_back(sub.ids);

    // whole-scene potential and probability
    PotentialField vm;
    vm.values = cache.combine(signs);
    vm.provenance = "whole scene";
    const ProbabilityField ps = sanitize(potential_to_probability(vm), &result.sanitize_stats);

    // per sub-image weights, combined by pointwise maximum
    std::vector<ProbabilityField> weights;
    for (const auto& sub : subimages.members)
        weights.push_back(smoothstep_weight(sanitize(potential_to_probability(sub.field)), config.smooth_k));
    const ProbabilityField ws = combine_subimages(weights);

    write_float_raster((out / "vm.f32").string(), vm.values);
    write_pgm((out / "vm_preview.pgm").string(), detail::preview_from_potential(vm.values), 255);
    write_float_raster((out / "ps.f32").string(), ps.values);
    write_pgm((out / "ps.pgm").string(), ps.values, 65535);
    write_float_raster((out / "ws.f32").string(), ws.values);
    write_pgm((out / "ws.pgm").string(), ws.values, 65535);
    if (subimages.members.size() > 1) {
        for (std::size_t k = 0; k < subimages.members.size(); ++k) {
            write_float_raster((out / ("vm_sub" + std::to_string(k) + ".f32")).string(),
                               subimages.members[k].field.values);
            write_float_raster((out / ("ws_sub" + std::to_string(k) + ".f32")).string(), weights[k].values);
        }
    }

    Raster<double> recon = ws.values;
    for (const auto& sub : scene.substrokes)
        for (Pixel p : sub.pixels) recon.at(p.x, p.y) = 1.0;
    write_pgm((out / "reconstruction.pgm").string(), recon, 255);

    {
        std::ofstream rep(out / "optimizer_report.txt");
        rep << "restart sweep group omega_before omega_after accepted\n";
        for (const auto& row : report)
            rep << row.restart << " " << row.sweep << " " << row.group << " " << detail::fmt_double(row.before)
                << " " << detail::fmt_double(row.after) << " " << (row.accepted ? 1 : 0) << "\n";
    }

    result.sidecar_path = out / "sidecar.txt";
    {
        std::ofstream side(result.sidecar_path);
        side << "input: " << config.input_path << "\n";
        side << "threshold: " << detail::fmt_double(config.threshold) << "\n";
        side << "window: " << config.window << "\n";
        side << "kernel: " << (config.kernel_path == ConvolutionPath::Spatial ? "spatial" : "frequency") << "\n";
        side << "restarts: " << config.restarts << "\n";
        side << "vth1: " << detail::fmt_double(config.vth1) << "\n";
        side << "vth2: " << detail::fmt_double(config.vth2) << "\n";
        side << "split: " << (config.split ? 1 : 0) << "\n";
        side << "smooth_k: " << config.smooth_k << "\n";
        side << "seed: " << config.seed << "\n";
        side << "substrokes: " << n << "\n";
        side << "signs:";
        for (int s : signs) side << " " << (s > 0 ? "+1" : "-1");
        side << "\n";
        side << "omega_initial: " << detail::fmt_double(result.omega_initial) << "\n";
        side << "omega: " << detail::fmt_double(result.omega) << "\n";
        for (std::size_t k = 0; k < result.subimages.size(); ++k) {
            side << "subimage " << k << ":";
            for (int id : result.subimages[k]) side << " " << id;
            side << "\n";
        }
        side << "double_boundaries:";
        for (int id : double_ids) side << " " << id;
        side << "\n";
        side << "undefined_orientation_pixels: " << scene.undefined_orientation.size() << "\n";
        side << "sanitize_over_one: " << result.sanitize_stats.over_one << "\n";
        side << "sanitize_over_ceiling: " << result.sanitize_stats.over_ceiling << "\n";
        side << "sanitize_median_repaired: " << result.sanitize_stats.median_repaired << "\n";
        side << "sanitize_clamped: " << result.sanitize_stats.clamped << "\n";
    }
    return result;
}

// --- synthetic scene generation -------------------------------------------

struct ShapeSpec {
    enum class Kind { Circle, Rect, Blob };
    Kind kind = Kind::Circle;
    double a = 0, b = 0, c = 0, d = 0;  // circle/blob: cx, cy, r; rect: x0, y0, x1, y1
    std::uint64_t blob_seed = 1;
};

struct GeneratedScene {
    Raster<double> edges;
    Raster<double> truth;
    std::vector<int> double_boundary_ids;  // under extract_substrokes(edges, 0.5)
    std::size_t total_perimeter = 0;       // chain pixels before ablation (with sharing counted once)
};

/// Rasterizes shape outlines with randomized perimeter gaps and the filled
/// ground-truth mask. Pixels drawn by two shapes are shared boundaries; the
/// sub-strokes they form are reported for density doubling.
inline GeneratedScene generate_scene(const std::vector<ShapeSpec>& shapes, int width, int height, double ablation,
                                     std::uint64_t seed) {
    if (!(ablation >= 0.0 && ablation <= 0.9)) throw ConfigError("ablation outside [0, 0.9]");
    GeneratedScene gen;
    gen.edges = Raster<double>(width, height, 0.0);
    gen.truth = Raster<double>(width, height, 0.0);
    Raster<int> drawn_by(width, height, 0);

    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
    std::vector<std::vector<Pixel>> chains;
    for (const ShapeSpec& s : shapes) {
        std::vector<Pixel> chain;
        switch (s.kind) {
            case ShapeSpec::Kind::Circle:
                chain = synth::circle_chain(s.a, s.b, s.c);
                for (int y = 0; y < height; ++y)
                    for (int x = 0; x < width; ++x)
                        if (std::hypot(x - s.a, y - s.b) <= s.c) gen.truth.at(x, y) = 1.0;
                break;
            case ShapeSpec::Kind::Rect:
                chain = synth::rect_chain(s.a, s.b, s.c, s.d);
                for (int y = 0; y < height; ++y)
                    for (int x = 0; x < width; ++x)
                        if (x >= s.a && x <= s.c && y >= s.b && y <= s.d) gen.truth.at(x, y) = 1.0;
                break;
            case ShapeSpec::Kind::Blob: {
                const auto blob = synth::BlobShape::make(s.a, s.b, s.c, s.blob_seed);
                chain = synth::blob_chain(blob);
                for (int y = 0; y < height; ++y)
                    for (int x = 0; x < width; ++x)
                        if (blob.contains(x, y)) gen.truth.at(x, y) = 1.0;
                break;
            }
        }
        for (Pixel p : chain)
            if (drawn_by.in_bounds(p.x, p.y)) ++drawn_by.at(p.x, p.y);
        chains.push_back(std::move(chain));
    }
    for (const auto& chain : chains) {
        const auto kept = synth::ablate_chain(chain, ablation, rng, true);
        synth::stamp(gen.edges, kept);
    }
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (drawn_by.at(x, y) >= 1) ++gen.total_perimeter;

    if (gen.edges.data() != Raster<double>(width, height, 0.0).data()) {
        const auto subs = extract_substrokes(gen.edges, 0.5);
        for (const auto& sub : subs) {
            std::size_t shared = 0;
            for (Pixel p : sub.pixels)
                if (drawn_by.at(p.x, p.y) >= 2) ++shared;
            if (shared * 2 > sub.pixels.size()) gen.double_boundary_ids.push_back(sub.id);
        }
    }
    return gen;
}

/// Uniform grid of oracle probabilities for a polyline stroke. Uses a
/// coarse sweep plus bisection, which matches the plain sweep wherever the
/// membership is nested.
inline Raster<double> oracle_probability_map(const PolyStroke& stroke, int width, int height, int samples) {
    if (samples < 64) throw ConfigError("oracle samples must be >= 64");
    Raster<double> out(width, height, 0.0);
    const bool closed = stroke.closed();
    ChordFrame frame;
    std::vector<Vec2> framed;
    if (!closed) {
        frame = chord_frame(stroke);
        framed.resize(stroke.points.size());
        for (std::size_t i = 0; i < framed.size(); ++i) framed[i] = frame.to_frame(stroke.points[i]);
        validate_extended_stroke(framed, frame.x0);
    }
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const Vec2 world{static_cast<double>(x), static_cast<double>(y)};
            if (closed) {
                out.at(x, y) = oracle_probability(stroke, world, samples);
                continue;
            }
            const Vec2 p = frame.to_frame(world);
            const bool plus = in_stroke_plus_halfspace(framed, p);
            auto member = [&](double beta) {
                return plus != in_arc_plus_halfspace(circle_from_angle(frame.x0, beta), p);
            };
            // bisect the membership boundary on the point's own side
            const double step = kTwoPi / samples;
            double lo, hi;
            if (plus) {
                if (!member(step)) {
                    out.at(x, y) = 0.0;
                    continue;
                }
                lo = step;
                hi = kTwoPi - step;
                if (member(hi)) {
                    out.at(x, y) = hi / kTwoPi;
                    continue;
                }
                while (hi - lo > step) {
                    const double mid = 0.5 * (lo + hi);
                    (member(mid) ? lo : hi) = mid;
                }
                out.at(x, y) = lo / kTwoPi;
            } else {
                if (!member(kTwoPi - step)) {
                    out.at(x, y) = 0.0;
                    continue;
                }
                lo = step;
                hi = kTwoPi - step;
                if (member(lo)) {
                    out.at(x, y) = 1.0 - lo / kTwoPi;
                    continue;
                }
                while (hi - lo > step) {
                    const double mid = 0.5 * (lo + hi);
                    (member(mid) ? hi : lo) = mid;
                }
                out.at(x, y) = 1.0 - hi / kTwoPi;
            }
        }
    return out;
}

}  // namespace strokefield
