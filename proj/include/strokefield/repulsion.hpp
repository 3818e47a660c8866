#pragma once

// Orientation-sign optimization: choose the +-1 flip of every sub-stroke so
// the dipole fields reinforce the regions they jointly bound. The objective
// is the variance of |E|^2, which splits into quiet plateaus and sharp
// boundaries when the repulsion between strokes is maximal.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <optional>
#include <string>
#include <vector>

#include "em_field.hpp"
#include "raster.hpp"
#include "stroke_model.hpp"

namespace strokefield {

struct SignConfiguration {
    std::vector<int> signs;  // one per sub-stroke, first pinned to +1
    double objective = 0.0;
};

struct FlipGroup {
    std::vector<int> ids;  // 1-based sub-stroke ids, ascending
    double score = 0.0;    // strongest pairwise interaction inside the group
};

struct FlipGroupList {
    std::vector<FlipGroup> groups;
    double vth1 = 0.0, vth2 = 0.0;
};

/// Per-sub-stroke unit-sign fields. Candidate configurations are signed
/// sums of these, so a flip costs a raster pass instead of a convolution;
/// the gradient is linear in the potential and caches the same way.
struct SubstrokeFieldCache {
    int width = 0, height = 0;
    std::vector<Raster<double>> potential, grad_x, grad_y;

    static SubstrokeFieldCache build(const StrokeScene& scene, const DipoleKernel& kernel,
                                     ConvolutionPath path = ConvolutionPath::Spatial) {
        SubstrokeFieldCache cache;
        cache.width = scene.width;
        cache.height = scene.height;
        std::optional<detail::FrequencyConvolver> freq;
        if (path == ConvolutionPath::Frequency) freq.emplace(scene.width, scene.height);
        for (const auto& sub : scene.substrokes) {
            Raster<double> v = path == ConvolutionPath::Spatial
                                   ? detail::spatial_substroke_potential(scene, sub, kernel)
                                   : freq->convolve(scene, sub);
            const ElectricField e = electric_field(PotentialField{v, {}});
            cache.potential.push_back(std::move(v));
            cache.grad_x.push_back(e.ex);
            cache.grad_y.push_back(e.ey);
        }
        return cache;
    }

    std::size_t count() const { return potential.size(); }

    /// Signed superposition of the cached potentials, summed in id order.
    Raster<double> combine(const std::vector<int>& signs) const {
        Raster<double> out(width, height, 0.0);
        for (std::size_t i = 0; i < potential.size(); ++i) {
            const double s = static_cast<double>(signs.at(i));
            for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] += s * potential[i].data()[k];
        }
        return out;
    }
};

/// Population variance of |E|^2 over the unmasked pixels (mask nonzero =
/// included; no mask = whole field).
inline double variance_objective(const ElectricField& e, const Raster<unsigned char>* mask = nullptr) {
    double n = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < e.ex.size(); ++i) {
        if (mask && !mask->data()[i]) continue;
        const double gx = e.ex.data()[i], gy = e.ey.data()[i];
        const double m2 = gx * gx + gy * gy;
        n += 1.0;
        s1 += m2;
        s2 += m2 * m2;
    }
    if (n == 0.0) throw std::invalid_argument("variance_objective: empty mask");
    const double mean = s1 / n;
    return s2 / n - mean * mean;
}

namespace detail {

inline double objective_from_sums(const std::vector<Raster<double>>& gx, const std::vector<Raster<double>>& gy,
                                  const std::vector<int>& signs) {
    const std::size_t sz = gx.empty() ? 0 : gx[0].size();
    double n = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < sz; ++k) {
        double ax = 0.0, ay = 0.0;
        for (std::size_t i = 0; i < gx.size(); ++i) {
            ax += signs[i] * gx[i].data()[k];
            ay += signs[i] * gy[i].data()[k];
        }
        const double m2 = ax * ax + ay * ay;
        n += 1.0;
        s1 += m2;
        s2 += m2 * m2;
    }
    if (n == 0.0) return 0.0;
    const double mean = s1 / n;
    return s2 / n - mean * mean;
}

}  // namespace detail

/// Mean absolute potential of stroke i sampled along the pixels of stroke j,
/// symmetrized; the grouping statistic for "magnetically interacting".
inline double interaction_score(const SubstrokeFieldCache& cache, const StrokeScene& scene, int i, int j) {
    auto mean_along = [&](int field_idx, const SubStroke& target) {
        double acc = 0.0;
        for (Pixel p : target.pixels) acc += std::abs(cache.potential[static_cast<std::size_t>(field_idx)].at(p.x, p.y));
        return target.pixels.empty() ? 0.0 : acc / static_cast<double>(target.pixels.size());
    };
    const auto& si = scene.substrokes[static_cast<std::size_t>(i) - 1];
    const auto& sj = scene.substrokes[static_cast<std::size_t>(j) - 1];
    return 0.5 * (mean_along(i - 1, sj) + mean_along(j - 1, si));
}

/// All singletons, plus the connected components of the interaction graph
/// at the two thresholds.
inline FlipGroupList build_groups(const StrokeScene& scene, const SubstrokeFieldCache& cache, double vth1,
                                  double vth2) {
    const int n = static_cast<int>(scene.substrokes.size());
    FlipGroupList list;
    list.vth1 = vth1;
    list.vth2 = vth2;
    for (int i = 1; i <= n; ++i) list.groups.push_back({{i}, 0.0});
    if (n < 2) return list;

    std::vector<std::vector<double>> score(static_cast<std::size_t>(n) + 1,
                                           std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            score[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = interaction_score(cache, scene, i, j);

    std::vector<std::vector<int>> seen;
    for (double th : {vth1, vth2}) {
        std::vector<int> comp(static_cast<std::size_t>(n) + 1, 0);
        int labels = 0;
        for (int i = 1; i <= n; ++i) {
            if (comp[static_cast<std::size_t>(i)]) continue;
            ++labels;
            std::vector<int> stack{i};
            comp[static_cast<std::size_t>(i)] = labels;
            std::vector<int> members;
            while (!stack.empty()) {
                const int u = stack.back();
                stack.pop_back();
                members.push_back(u);
                for (int v = 1; v <= n; ++v) {
                    const double s = u < v ? score[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]
                                           : score[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)];
                    if (v == u || comp[static_cast<std::size_t>(v)] || s <= th) continue;
                    comp[static_cast<std::size_t>(v)] = labels;
                    stack.push_back(v);
                }
            }
            if (members.size() < 2) continue;
            std::sort(members.begin(), members.end());
            if (std::find(seen.begin(), seen.end(), members) != seen.end()) continue;
            seen.push_back(members);
            double best = 0.0;
            for (std::size_t a = 0; a < members.size(); ++a)
                for (std::size_t b = a + 1; b < members.size(); ++b)
                    best = std::max(best, score[static_cast<std::size_t>(members[a])]
                                               [static_cast<std::size_t>(members[b])]);
            list.groups.push_back({members, best});
        }
    }

    // sweep order: singletons by id, then multi-groups by descending score
    std::stable_sort(list.groups.begin(), list.groups.end(), [](const FlipGroup& a, const FlipGroup& b) {
        const bool sa = a.ids.size() == 1, sb = b.ids.size() == 1;
        if (sa != sb) return sa;
        if (sa) return a.ids[0] < b.ids[0];
        if (a.score != b.score) return a.score > b.score;
        return a.ids < b.ids;
    });
    return list;
}

struct FlipReportRow {
    int restart = 0;
    int sweep = 0;
    std::string group;
    double before = 0.0, after = 0.0;
    bool accepted = false;
};

namespace detail {

inline std::vector<int> lex_normalized(std::vector<int> signs) {
    if (!signs.empty() && signs[0] < 0)
        for (int& s : signs) s = -s;
    return signs;
}

// +1 sorts before -1, so the all-plus vector is the lexicographic minimum
inline bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        if (a[i] != b[i]) return a[i] > b[i];
    }
    return a.size() < b.size();
}

}  // namespace detail

/// Greedy group-flip sweeps with randomized restarts. A flip is kept only
/// when the objective strictly increases, so the sweep terminates; restarts
/// explore other basins and the best result wins.
inline SignConfiguration optimize_flips(const StrokeScene& scene, const SubstrokeFieldCache& cache,
                                        const FlipGroupList& groups, const SignConfiguration& initial,
                                        int restarts = 4, std::uint64_t seed = 0,
                                        std::vector<FlipReportRow>* report = nullptr) {
    const int n = static_cast<int>(scene.substrokes.size());
    if (restarts < 1) throw std::invalid_argument("optimize_flips: restarts must be >= 1");
    if (static_cast<int>(initial.signs.size()) != n)
        throw std::invalid_argument("optimize_flips: one initial sign per sub-stroke required");
    if (n == 0) return {{}, 0.0};
    const std::size_t sz = cache.potential.empty() ? 0 : cache.potential[0].size();

    SignConfiguration best;
    bool have_best = false;
    for (int restart = 0; restart < restarts; ++restart) {
        std::vector<int> signs = initial.signs;
        if (restart > 0) {
            std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(restart));
            for (int i = 1; i < n; ++i) signs[static_cast<std::size_t>(i)] = (rng() & 1) ? 1 : -1;
        }
        signs[0] = 1;

        std::vector<double> ax(sz, 0.0), ay(sz, 0.0);
        for (int i = 0; i < n; ++i) {
            const double s = signs[static_cast<std::size_t>(i)];
            const auto& gx = cache.grad_x[static_cast<std::size_t>(i)].data();
            const auto& gy = cache.grad_y[static_cast<std::size_t>(i)].data();
            for (std::size_t k = 0; k < sz; ++k) {
                ax[k] += s * gx[k];
                ay[k] += s * gy[k];
            }
        }
        auto omega_of = [&](const std::vector<double>& vx, const std::vector<double>& vy) {
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t k = 0; k < sz; ++k) {
                const double m2 = vx[k] * vx[k] + vy[k] * vy[k];
                s1 += m2;
                s2 += m2 * m2;
            }
            const double mean = s1 / static_cast<double>(sz);
            return s2 / static_cast<double>(sz) - mean * mean;
        };
        double omega = omega_of(ax, ay);

        std::vector<double> dx(sz), dy(sz), cx(sz), cy(sz);
        bool flipped = true;
        int sweep = 0;
        while (flipped) {
            flipped = false;
            ++sweep;
            for (const FlipGroup& g : groups.groups) {
                std::fill(dx.begin(), dx.end(), 0.0);
                std::fill(dy.begin(), dy.end(), 0.0);
                for (int id : g.ids) {
                    const std::size_t i = static_cast<std::size_t>(id) - 1;
                    const double s = signs[i];
                    const auto& gx = cache.grad_x[i].data();
                    const auto& gy = cache.grad_y[i].data();
                    for (std::size_t k = 0; k < sz; ++k) {
                        dx[k] += s * gx[k];
                        dy[k] += s * gy[k];
                    }
                }
                for (std::size_t k = 0; k < sz; ++k) {
                    cx[k] = ax[k] - 2.0 * dx[k];
                    cy[k] = ay[k] - 2.0 * dy[k];
                }
                const double cand = omega_of(cx, cy);
                if (report) {
                    std::string name;
                    for (int id : g.ids) name += (name.empty() ? "" : "+") + std::to_string(id);
                    report->push_back({restart, sweep, name, omega, cand, cand > omega});
                }
                if (cand > omega) {
                    omega = cand;
                    ax.swap(cx);
                    ay.swap(cy);
                    for (int id : g.ids) signs[static_cast<std::size_t>(id) - 1] *= -1;
                    flipped = true;
                }
            }
        }
        std::vector<int> normalized = detail::lex_normalized(signs);
        if (!have_best || omega > best.objective ||
            (omega == best.objective && detail::lex_less(normalized, best.signs))) {
            best = {normalized, omega};
            have_best = true;
        }
    }
    return best;
}

/// Exact argmax over the 2^(n-1) distinct configurations; the reference
/// for the greedy optimizer at small n.
inline SignConfiguration brute_force_flips(const StrokeScene& scene, const SubstrokeFieldCache& cache) {
    const int n = static_cast<int>(scene.substrokes.size());
    if (n > 20) throw std::invalid_argument("brute_force_flips: more than 20 sub-strokes");
    if (n == 0) return {{}, 0.0};
    SignConfiguration best;
    std::vector<int> signs(static_cast<std::size_t>(n), 1);
    const std::uint64_t total = 1ull << (n - 1);
    for (std::uint64_t code = 0; code < total; ++code) {
        for (int i = 1; i < n; ++i)
            signs[static_cast<std::size_t>(i)] = (code >> (i - 1)) & 1 ? -1 : 1;
        const double omega = detail::objective_from_sums(cache.grad_x, cache.grad_y, signs);
        if (code == 0 || omega > best.objective ||
            (omega == best.objective && detail::lex_less(signs, best.signs))) {
            best = {signs, omega};
        }
    }
    return best;
}

}  // namespace strokefield
