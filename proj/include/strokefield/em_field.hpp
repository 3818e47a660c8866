#pragma once

// Dipole potential fields on stroke scenes.
//
// Every stroke pixel acts as a unit dipole aligned with the local normal;
// the scalar potential it radiates is the directional derivative of ln|r|
// along that normal. Summed over a scene this yields the magnetic
// potential V_m whose level sets are circles through the stroke endpoints,
// the bridge between potentials and inclusion probability.
//
// Phase convention (fixed by the horizontal-segment calibration in
// verify_phase_convention): the complex source is I*F*sign*e^{-i*theta}
// against the kernel dx/r^2 + i*dy/r^2, keeping the real part. Equivalent
// real form: each pixel contributes I*F*sign*(cos(theta)*Kx + sin(theta)*Ky),
// the derivative along the stored normal, so V_m is positive on the side
// the normal points to.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fft.hpp"
#include "raster.hpp"
#include "stroke_model.hpp"

namespace strokefield {

inline constexpr double kDipolePhaseSign = -1.0;  // sign of theta in the source exponential

/// Tolerated overshoot of |V_m| beyond 2*pi near saturated regions.
inline constexpr double kPotentialOvershootTolerance = 0.15 * kTwoPi;

/// Complex dipole kernel sampled at integer offsets:
/// K(dx, dy) = dx/(dx^2+dy^2) + i*dy/(dx^2+dy^2), center 0 by antisymmetry.
struct DipoleKernel {
    int half_extent = 0;
    Raster<std::complex<double>> values;  // (2*half_extent+1)^2, center at (half_extent, half_extent)

    const std::complex<double>& at_offset(int dx, int dy) const {
        return values.at(dx + half_extent, dy + half_extent);
    }
    bool covers(int width, int height) const { return half_extent >= std::max(width, height) - 1; }
};

inline DipoleKernel dipole_kernel(int half_extent) {
    if (half_extent < 1) throw std::invalid_argument("dipole_kernel: half_extent must be >= 1");
    DipoleKernel k;
    k.half_extent = half_extent;
    const int n = 2 * half_extent + 1;
    k.values = Raster<std::complex<double>>(n, n);
    for (int dy = -half_extent; dy <= half_extent; ++dy)
        for (int dx = -half_extent; dx <= half_extent; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const double r2 = static_cast<double>(dx) * dx + static_cast<double>(dy) * dy;
            k.values.at(dx + half_extent, dy + half_extent) = {dx / r2, dy / r2};
        }
    return k;
}

struct PotentialField {
    Raster<double> values;  // radians
    std::string provenance;
};

struct ElectricField {
    Raster<double> ex, ey;
};

enum class ConvolutionPath { Spatial, Frequency };

namespace detail {

inline void check_scene_orientations(const StrokeScene& scene) {
    for (int y = 0; y < scene.height; ++y)
        for (int x = 0; x < scene.width; ++x) {
            if (scene.intensity.at(x, y) <= 0.0) continue;
            if (scene.substroke_id.at(x, y) == 0 || !std::isfinite(scene.normal_angle.at(x, y)))
                throw std::invalid_argument("convolve_magnetic: stroke pixel without orientation");
        }
}

inline Raster<double> spatial_substroke_potential(const StrokeScene& scene, const SubStroke& sub,
                                                  const DipoleKernel& kernel) {
    Raster<double> out(scene.width, scene.height, 0.0);
    for (Pixel q : sub.pixels) {
        const double theta = scene.normal_angle.at(q.x, q.y);
        const double amp = scene.intensity.at(q.x, q.y) * scene.density.at(q.x, q.y);
        const double cx = amp * std::cos(theta);
        const double cy = amp * std::sin(theta);
        for (int y = 0; y < scene.height; ++y) {
            double* row = out.data().data() + static_cast<std::size_t>(y) * scene.width;
            const int dy = y - q.y;
            for (int x = 0; x < scene.width; ++x) {
                const std::complex<double>& k = kernel.at_offset(x - q.x, dy);
                row[x] += cx * k.real() + cy * k.imag();
            }
        }
    }
    return out;
}

/// Cyclic-convolution workspace; the padded sizes leave every in-window
/// offset alias-free, and the kernel spectrum is shared across sub-strokes.
/// Spectra live in column-major (transposed) layout so every 1D pass runs
/// contiguously; zero source rows and unused result rows are skipped.
struct FrequencyConvolver {
    int width = 0, height = 0, px = 0, py = 0;
    std::vector<fft::cdouble> kernel_spectrum_t;  // transposed layout

    FrequencyConvolver(int w, int h) : width(w), height(h) {
        px = fft::next_pow2(2 * w - 1);
        py = fft::next_pow2(2 * h - 1);
        std::vector<fft::cdouble> kernel(static_cast<std::size_t>(px) * py, {0.0, 0.0});
        for (int iy = 0; iy < py; ++iy) {
            const int dy = iy <= py / 2 ? iy : iy - py;
            for (int ix = 0; ix < px; ++ix) {
                const int dx = ix <= px / 2 ? ix : ix - px;
                if (dx == 0 && dy == 0) continue;
                const double r2 = static_cast<double>(dx) * dx + static_cast<double>(dy) * dy;
                kernel[static_cast<std::size_t>(iy) * px + ix] = {dx / r2, dy / r2};
            }
        }
        for (int y = 0; y < py; ++y) fft::transform(kernel.data() + static_cast<std::size_t>(y) * px, px, false);
        fft::detail::transpose(kernel, kernel_spectrum_t, px, py);
        for (int x = 0; x < px; ++x)
            fft::transform(kernel_spectrum_t.data() + static_cast<std::size_t>(x) * py, py, false);
    }

    Raster<double> convolve(const StrokeScene& scene, const SubStroke& sub) const {
        std::vector<fft::cdouble> src(static_cast<std::size_t>(px) * py, {0.0, 0.0});
        int ymin = py, ymax = -1;
        for (Pixel q : sub.pixels) {
            const double theta = scene.normal_angle.at(q.x, q.y);
            const double amp = scene.intensity.at(q.x, q.y) * scene.density.at(q.x, q.y);
            src[static_cast<std::size_t>(q.y) * px + q.x] = std::polar(amp, kDipolePhaseSign * theta);
            ymin = std::min(ymin, q.y);
            ymax = std::max(ymax, q.y);
        }
        for (int y = ymin; y <= ymax; ++y)  // all other rows are zero
            fft::transform(src.data() + static_cast<std::size_t>(y) * px, px, false);
        std::vector<fft::cdouble> spec_t;
        fft::detail::transpose(src, spec_t, px, py);
        for (int x = 0; x < px; ++x) {
            fft::cdouble* col = spec_t.data() + static_cast<std::size_t>(x) * py;
            fft::transform(col, py, false);
            const fft::cdouble* k = kernel_spectrum_t.data() + static_cast<std::size_t>(x) * py;
            for (int y = 0; y < py; ++y) col[y] *= k[y];
            fft::transform(col, py, true);
        }
        fft::detail::transpose(spec_t, src, py, px);
        Raster<double> out(width, height);
        for (int y = 0; y < height; ++y) {  // rows beyond the field of view are never read
            fft::transform(src.data() + static_cast<std::size_t>(y) * px, px, true);
            for (int x = 0; x < width; ++x) out.at(x, y) = src[static_cast<std::size_t>(y) * px + x].real();
        }
        return out;
    }
};

}  // namespace detail

/// Potential radiated by one sub-stroke at unit sign.
inline Raster<double> substroke_potential(const StrokeScene& scene, const SubStroke& sub,
                                          const DipoleKernel& kernel, ConvolutionPath path) {
    if (path == ConvolutionPath::Spatial) {
        if (!kernel.covers(scene.width, scene.height))
            throw std::invalid_argument("substroke_potential: kernel does not cover the field of view");
        return detail::spatial_substroke_potential(scene, sub, kernel);
    }
    detail::FrequencyConvolver conv(scene.width, scene.height);
    return conv.convolve(scene, sub);
}

/// Magnetic potential of the whole scene under the given per-sub-stroke
/// signs. Computed as the signed sum of per-sub-stroke fields in id order,
/// which makes linearity over disjoint strokes hold bit for bit.
inline PotentialField convolve_magnetic(const StrokeScene& scene, const std::vector<int>& signs,
                                        const DipoleKernel& kernel,
                                        ConvolutionPath path = ConvolutionPath::Spatial) {
    if (signs.size() != scene.substrokes.size())
        throw std::invalid_argument("convolve_magnetic: one sign per sub-stroke required");
    detail::check_scene_orientations(scene);
    if (path == ConvolutionPath::Spatial && !kernel.covers(scene.width, scene.height))
        throw std::invalid_argument("convolve_magnetic: kernel does not cover the field of view");

    PotentialField field;
    field.values = Raster<double>(scene.width, scene.height, 0.0);
    std::optional<detail::FrequencyConvolver> freq;
    if (path == ConvolutionPath::Frequency) freq.emplace(scene.width, scene.height);
    for (std::size_t i = 0; i < scene.substrokes.size(); ++i) {
        if (signs[i] != 1 && signs[i] != -1) throw std::invalid_argument("convolve_magnetic: signs must be +-1");
        const Raster<double> part = path == ConvolutionPath::Spatial
                                        ? detail::spatial_substroke_potential(scene, scene.substrokes[i], kernel)
                                        : freq->convolve(scene, scene.substrokes[i]);
        const double s = static_cast<double>(signs[i]);
        for (std::size_t k = 0; k < part.size(); ++k) field.values.data()[k] += s * part.data()[k];
    }
    field.provenance = "signs=";
    for (int s : signs) field.provenance += s > 0 ? '+' : '-';
    field.provenance += path == ConvolutionPath::Spatial ? "; path=spatial" : "; path=frequency";
    return field;
}

/// Direct evaluation of the scene potential at a real-valued point; exact
/// spatial sum without materializing the field. The dipole kernel is
/// analytic, so off-grid probes are well defined.
inline double potential_at(const StrokeScene& scene, const std::vector<int>& signs, Vec2 p) {
    if (signs.size() != scene.substrokes.size())
        throw std::invalid_argument("potential_at: one sign per sub-stroke required");
    double total = 0.0;
    for (std::size_t i = 0; i < scene.substrokes.size(); ++i) {
        double part = 0.0;
        for (Pixel q : scene.substrokes[i].pixels) {
            const double dx = p.x - q.x, dy = p.y - q.y;
            const double r2 = dx * dx + dy * dy;
            if (r2 < 1e-12) continue;
            const double theta = scene.normal_angle.at(q.x, q.y);
            const double amp = scene.intensity.at(q.x, q.y) * scene.density.at(q.x, q.y);
            part += amp * (std::cos(theta) * dx + std::sin(theta) * dy) / r2;
        }
        total += signs[i] * part;
    }
    return total;
}

inline double potential_at(const StrokeScene& scene, const std::vector<int>& signs, Pixel p) {
    return potential_at(scene, signs, Vec2{static_cast<double>(p.x), static_cast<double>(p.y)});
}

/// Closed-form potential of a straight dipole line of half-length x0 on the
/// x axis, normals along +y. On-axis values take the +y limit.
inline double analytic_line_potential(double x, double y, double x0) {
    if (!(x0 > 0.0)) throw std::invalid_argument("analytic_line_potential: x0 must be > 0");
    if (y == 0.0) {
        const double ax = std::abs(x);
        if (ax < x0) return std::numbers::pi;
        if (ax == x0) return std::numbers::pi / 2.0;
        return 0.0;
    }
    return std::atan((x + x0) / y) - std::atan((x - x0) / y);
}

/// Half-space folding of the chord potential. Literal applies the published
/// three-case transform as written; Corrected folds by +-2*pi so the result
/// is positive exactly on the plus side and |V| equals the starting angle of
/// the circle through the query point (the literal first case pushes values
/// below -2*pi and fails the convolution cross-check, see tests).
enum class SignFixMode { Literal, Corrected };

inline double sign_fix_line(double vm, bool in_positive_halfspace, SignFixMode mode = SignFixMode::Literal) {
    if (mode == SignFixMode::Literal) {
        if (in_positive_halfspace && vm < 0.0) return vm - kTwoPi;
        if (in_positive_halfspace && vm > 0.0) return kTwoPi - vm;
        return vm;
    }
    if (in_positive_halfspace && vm < 0.0) return vm + kTwoPi;
    if (!in_positive_halfspace && vm > 0.0) return vm - kTwoPi;
    return vm;
}

/// Gradient of the potential: central differences inside, one-sided at the
/// borders.
inline ElectricField electric_field(const PotentialField& field) {
    const auto& v = field.values;
    const int w = v.width(), h = v.height();
    if (w < 3 || h < 3) throw std::invalid_argument("electric_field: field must be at least 3x3");
    ElectricField e{Raster<double>(w, h), Raster<double>(w, h)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (x == 0)
                e.ex.at(x, y) = v.at(1, y) - v.at(0, y);
            else if (x == w - 1)
                e.ex.at(x, y) = v.at(w - 1, y) - v.at(w - 2, y);
            else
                e.ex.at(x, y) = 0.5 * (v.at(x + 1, y) - v.at(x - 1, y));
            if (y == 0)
                e.ey.at(x, y) = v.at(x, 1) - v.at(x, 0);
            else if (y == h - 1)
                e.ey.at(x, y) = v.at(x, h - 1) - v.at(x, h - 2);
            else
                e.ey.at(x, y) = 0.5 * (v.at(x, y + 1) - v.at(x, y - 1));
        }
    return e;
}

inline Raster<double> magnitude_squared(const ElectricField& e) {
    Raster<double> m(e.ex.width(), e.ex.height());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double x = e.ex.data()[i], y = e.ey.data()[i];
        m.data()[i] = x * x + y * y;
    }
    return m;
}

/// Startup self-test pinning the phase convention: a horizontal segment
/// must reproduce the analytic line potential with positive values on the
/// normal side. Throws InternalError on mismatch.
inline void verify_phase_convention() {
    const int size = 41, row = 20, half = 10;
    std::vector<Pixel> seg;
    std::vector<double> normals;
    for (int x = 20 - half; x <= 20 + half; ++x) {
        seg.push_back({x, row});
        normals.push_back(std::numbers::pi / 2.0);
    }
    StrokeScene scene;
    scene.width = scene.height = size;
    scene.intensity = Raster<double>(size, size, 0.0);
    scene.normal_angle = Raster<double>(size, size, 0.0);
    scene.density = Raster<double>(size, size, 0.0);
    scene.substroke_id = Raster<int>(size, size, 0);
    SubStroke sub;
    sub.id = 1;
    sub.pixels = seg;
    sub.head = seg.front();
    sub.tail = seg.back();
    for (std::size_t i = 0; i < seg.size(); ++i) {
        scene.intensity.at(seg[i].x, seg[i].y) = 1.0;
        scene.normal_angle.at(seg[i].x, seg[i].y) = normals[i];
        scene.density.at(seg[i].x, seg[i].y) = 1.0;
        scene.substroke_id.at(seg[i].x, seg[i].y) = 1;
    }
    scene.substrokes.push_back(sub);
    const double x0 = half + 0.5;  // unit dipole density over each pixel cell
    for (Pixel probe : {Pixel{20, 26}, Pixel{20, 14}, Pixel{26, 24}, Pixel{12, 15}}) {
        const double got = potential_at(scene, {1}, probe);
        const double want = analytic_line_potential(probe.x - 20.0, probe.y - row, x0);
        if (std::abs(got - want) > 0.08)
            throw InternalError("dipole phase convention self-test failed");
    }
    if (potential_at(scene, {1}, Pixel{20, 26}) <= 0.0)
        throw InternalError("dipole phase convention self-test failed: wrong sign side");
}

}  // namespace strokefield
