// strokefield: inclusion-probability fields from partial contours.
//
//   strokefield run    --input edges.pgm --out dir [options]
//   strokefield gen    --shape circle:128,128,60 --out dir [options]
//   strokefield oracle --stroke halfcircle:40 --out dir [options]
//
// Exit codes: 0 ok, 2 unusable input, 3 bad configuration, 4 internal
// invariant breach.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "strokefield/pipeline.hpp"

namespace {

using namespace strokefield;

ShapeSpec parse_shape(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("shape needs kind:params, got '" + text + "'");
    const std::string kind = text.substr(0, colon);
    std::vector<double> nums;
    std::string rest = text.substr(colon + 1);
    for (auto& c : rest)
        if (c == ',') c = ' ';
    std::istringstream in(rest);
    double v;
    while (in >> v) nums.push_back(v);
    ShapeSpec spec;
    if (kind == "circle" && nums.size() == 3) {
        spec.kind = ShapeSpec::Kind::Circle;
        spec.a = nums[0];
        spec.b = nums[1];
        spec.c = nums[2];
    } else if (kind == "rect" && nums.size() == 4) {
        spec.kind = ShapeSpec::Kind::Rect;
        spec.a = nums[0];
        spec.b = nums[1];
        spec.c = nums[2];
        spec.d = nums[3];
    } else if (kind == "blob" && (nums.size() == 3 || nums.size() == 4)) {
        spec.kind = ShapeSpec::Kind::Blob;
        spec.a = nums[0];
        spec.b = nums[1];
        spec.c = nums[2];
        spec.blob_seed = nums.size() == 4 ? static_cast<std::uint64_t>(nums[3]) : 1;
    } else {
        throw ConfigError("unrecognized shape '" + text + "'");
    }
    return spec;
}

PolyStroke parse_stroke(const std::string& text, int size) {
    const double c = size / 2.0;
    PolyStroke stroke;
    const auto colon = text.find(':');
    const std::string kind = colon == std::string::npos ? text : text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (kind == "line") {
        const double x0 = arg.empty() ? size / 4.0 : std::stod(arg);
        stroke.points = {{c - x0, c}, {c + x0, c}};
    } else if (kind == "halfcircle") {
        const double r = arg.empty() ? size / 3.0 : std::stod(arg);
        for (int i = 0; i <= 256; ++i) {
            const double phi = std::numbers::pi * i / 256.0;
            stroke.points.push_back({c + r * std::cos(phi), c + r * std::sin(phi)});
        }
    } else if (kind == "file") {
        std::ifstream in(arg);
        if (!in) throw InputError("cannot open stroke file: " + arg);
        double x, y;
        while (in >> x >> y) stroke.points.push_back({x, y});
        if (stroke.points.size() < 2) throw InputError("stroke file needs at least two points: " + arg);
    } else {
        throw ConfigError("unrecognized stroke '" + text + "'");
    }
    return stroke;
}

int run_command(const PipelineConfig& config) {
    const PipelineResult res = run_pipeline(config);
    std::printf("substrokes: %d\n", res.substroke_count);
    std::printf("omega: %g (initial %g)\n", res.omega, res.omega_initial);
    std::printf("subimages: %zu\n", res.subimages.size());
    std::printf("outputs: %s\n", config.out_dir.c_str());
    return 0;
}

int gen_command(const std::vector<std::string>& shape_texts, int size, double ablation, std::uint64_t seed,
                const std::string& out_dir) {
    std::vector<ShapeSpec> shapes;
    for (const auto& t : shape_texts) shapes.push_back(parse_shape(t));
    const GeneratedScene gen = generate_scene(shapes, size, size, ablation, seed);
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    write_pgm((fs::path(out_dir) / "edges.pgm").string(), gen.edges, 255);
    write_pgm((fs::path(out_dir) / "truth.pgm").string(), gen.truth, 255);
    {
        std::ofstream flags(fs::path(out_dir) / "flags.txt");
        for (int id : gen.double_boundary_ids) flags << id << "\n";
    }
    {
        std::ofstream meta(fs::path(out_dir) / "gen_meta.txt");
        meta << "shapes: " << shapes.size() << "\n";
        meta << "size: " << size << "\n";
        meta << "ablation: " << ablation << "\n";
        meta << "seed: " << seed << "\n";
        meta << "perimeter_pixels: " << gen.total_perimeter << "\n";
        meta << "double_boundaries:";
        for (int id : gen.double_boundary_ids) meta << " " << id;
        meta << "\n";
    }
    std::printf("outputs: %s\n", out_dir.c_str());
    return 0;
}

int oracle_command(const std::string& stroke_text, int size, int samples, const std::string& out_dir) {
    const PolyStroke stroke = parse_stroke(stroke_text, size);
    const Raster<double> map = oracle_probability_map(stroke, size, size, samples);
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    write_float_raster((fs::path(out_dir) / "oracle.f32").string(), map);
    write_pgm((fs::path(out_dir) / "oracle.pgm").string(), map, 65535);
    std::printf("outputs: %s\n", out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inclusion-probability fields from partial contours"};
    app.require_subcommand(1);

    PipelineConfig config;
    std::string kernel_mode = "frequency";
    auto* run = app.add_subcommand("run", "run the full pipeline on an edge raster");
    run->add_option("--input", config.input_path, "thin edge raster (P2/P5 graymap)")->required();
    run->add_option("--out", config.out_dir, "output directory")->required();
    run->add_option("--threshold", config.threshold, "stroke intensity threshold in (0, 1]");
    run->add_option("--window", config.window, "orientation window (chain half-extent)");
    run->add_option("--double-boundaries", config.double_boundaries_path, "file with one sub-stroke id per line");
    run->add_option("--orientation", config.orientation_path, "16-bit graymap override, radians x 1000");
    run->add_option("--kernel", kernel_mode, "spatial | frequency")
        ->check(CLI::IsMember({"spatial", "frequency"}));
    run->add_option("--restarts", config.restarts, "optimizer restarts (0 disables optimization)");
    run->add_option("--vth1", config.vth1, "first interaction grouping threshold");
    run->add_option("--vth2", config.vth2, "second interaction grouping threshold");
    run->add_flag("--split", config.split, "split mutually attractive sub-strokes into sub-images");
    run->add_option("--smooth-k", config.smooth_k, "smoothstep order K");
    run->add_option("--seed", config.seed, "seed for randomized restarts");

    std::vector<std::string> shapes;
    int gen_size = 256;
    double ablation = 0.0;
    std::uint64_t gen_seed = 1;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "generate a synthetic partial-contour scene");
    gen->add_option("--shape", shapes, "circle:cx,cy,r | rect:x0,y0,x1,y1 | blob:cx,cy,r[,seed]")->required();
    gen->add_option("--size", gen_size, "canvas size (square)");
    gen->add_option("--ablation", ablation, "fraction of each perimeter removed, [0, 0.9]");
    gen->add_option("--seed", gen_seed, "gap placement seed");
    gen->add_option("--out", gen_out, "output directory")->required();

    std::string stroke_text = "line";
    int oracle_size = 256, oracle_samples = 1024;
    std::string oracle_out;
    auto* oracle = app.add_subcommand("oracle", "rasterize circle-oracle probabilities for one stroke");
    oracle->add_option("--stroke", stroke_text, "line[:x0] | halfcircle[:r] | file:points.txt");
    oracle->add_option("--size", oracle_size, "canvas size (square)");
    oracle->add_option("--samples", oracle_samples, "angle sweep resolution");
    oracle->add_option("--out", oracle_out, "output directory")->required();

    try {
        app.parse(argc, argv);
        if (run->parsed()) {
            config.kernel_path = kernel_mode == "spatial" ? strokefield::ConvolutionPath::Spatial
                                                          : strokefield::ConvolutionPath::Frequency;
            return run_command(config);
        }
        if (gen->parsed()) return gen_command(shapes, gen_size, ablation, gen_seed, gen_out);
        if (oracle->parsed()) return oracle_command(stroke_text, oracle_size, oracle_samples, oracle_out);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 3;
    } catch (const strokefield::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 3;
    } catch (const strokefield::IoError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const strokefield::InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const strokefield::InternalError& e) {
        std::fprintf(stderr, "internal invariant breach: %s\n", e.what());
        return 4;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
    return 0;
}
