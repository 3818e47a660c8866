#pragma once

// Sub-image splitting. After sign optimization some stroke pairs still face
// each other with opposite potentials; such pairs cannot bound a region
// together, so the scene is split into overlapping sub-images in which only
// mutually repulsive (or indifferent) strokes remain.

#include <algorithm>
#include <set>
#include <vector>

#include "em_field.hpp"
#include "repulsion.hpp"
#include "stroke_model.hpp"

namespace strokefield {

inline constexpr double kNegligibleInteraction = 0.05 * kTwoPi;

enum class InteractionKind { Attractive, Repulsive, Negligible };

/// Signed mean potential of stroke i along stroke j under the chosen signs.
inline double signed_interaction(const SubstrokeFieldCache& cache, const StrokeScene& scene,
                                 const std::vector<int>& signs, int i, int j) {
    const auto& target = scene.substrokes[static_cast<std::size_t>(j) - 1];
    double acc = 0.0;
    for (Pixel p : target.pixels) acc += cache.potential[static_cast<std::size_t>(i) - 1].at(p.x, p.y);
    const double mean = target.pixels.empty() ? 0.0 : acc / static_cast<double>(target.pixels.size());
    return signs[static_cast<std::size_t>(i) - 1] * mean;
}

/// Pair classification: attractive pairs see each other's field with
/// opposite signs, repulsive ones with the same sign, and pairs below the
/// threshold do not interact meaningfully either way.
inline InteractionKind interaction_sign(int i, int j, const StrokeScene& scene, const SubstrokeFieldCache& cache,
                                        const std::vector<int>& signs,
                                        double negligible_threshold = kNegligibleInteraction) {
    if (i == j) throw std::invalid_argument("interaction_sign: i and j must differ");
    const double a = signed_interaction(cache, scene, signs, i, j);
    const double b = signed_interaction(cache, scene, signs, j, i);
    if (std::abs(a) <= negligible_threshold || std::abs(b) <= negligible_threshold)
        return InteractionKind::Negligible;
    return (a > 0.0) == (b > 0.0) ? InteractionKind::Repulsive : InteractionKind::Attractive;
}

struct SubImage {
    std::vector<int> ids;  // ascending sub-stroke ids
    PotentialField field;
};

struct SubImageSet {
    std::vector<SubImage> members;
};

/// Greedy split: from each seed, close over repulsive edges while refusing
/// anything attractive to a member already in the set. Without any
/// attractive pair the scene stays whole. Strokes may land in several
/// sub-images; every stroke lands in at least one.
inline SubImageSet split_by_attraction(const StrokeScene& scene, const SubstrokeFieldCache& cache,
                                       const std::vector<int>& signs,
                                       double negligible_threshold = kNegligibleInteraction,
                                       const std::vector<int>* universe = nullptr) {
    std::vector<int> ids;
    if (universe) {
        ids = *universe;
    } else {
        for (const auto& s : scene.substrokes) ids.push_back(s.id);
    }
    std::sort(ids.begin(), ids.end());

    auto field_of = [&](const std::vector<int>& members) {
        PotentialField f;
        f.values = Raster<double>(scene.width, scene.height, 0.0);
        for (int id : members) {
            const double s = static_cast<double>(signs[static_cast<std::size_t>(id) - 1]);
            const auto& part = cache.potential[static_cast<std::size_t>(id) - 1];
            for (std::size_t k = 0; k < part.size(); ++k) f.values.data()[k] += s * part.data()[k];
        }
        f.provenance = "subimage:";
        for (int id : members) f.provenance += " " + std::to_string(id);
        return f;
    };

    SubImageSet out;
    if (ids.empty()) {
        out.members.push_back({{}, field_of({})});
        return out;
    }

    std::vector<std::vector<InteractionKind>> kind(ids.size(), std::vector<InteractionKind>(ids.size()));
    bool any_attraction = false;
    for (std::size_t a = 0; a < ids.size(); ++a)
        for (std::size_t b = a + 1; b < ids.size(); ++b) {
            kind[a][b] = kind[b][a] = interaction_sign(ids[a], ids[b], scene, cache, signs, negligible_threshold);
            any_attraction |= kind[a][b] == InteractionKind::Attractive;
        }
    if (!any_attraction) {
        out.members.push_back({ids, field_of(ids)});
        return out;
    }

    // seeds by descending stroke length, ties by ascending id
    std::vector<std::size_t> seed_order(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) seed_order[k] = k;
    std::stable_sort(seed_order.begin(), seed_order.end(), [&](std::size_t a, std::size_t b) {
        const auto la = scene.substrokes[static_cast<std::size_t>(ids[a]) - 1].pixels.size();
        const auto lb = scene.substrokes[static_cast<std::size_t>(ids[b]) - 1].pixels.size();
        if (la != lb) return la > lb;
        return ids[a] < ids[b];
    });

    std::set<std::vector<int>> emitted;
    for (std::size_t seed : seed_order) {
        std::vector<char> in_set(ids.size(), 0);
        in_set[seed] = 1;
        bool grew = true;
        while (grew) {
            grew = false;
            for (std::size_t cand = 0; cand < ids.size(); ++cand) {
                if (in_set[cand]) continue;
                bool touches = false, blocked = false;
                for (std::size_t m = 0; m < ids.size(); ++m) {
                    if (!in_set[m]) continue;
                    if (kind[cand][m] == InteractionKind::Repulsive) touches = true;
                    if (kind[cand][m] == InteractionKind::Attractive) blocked = true;
                }
                if (touches && !blocked) {
                    in_set[cand] = 1;
                    grew = true;
                }
            }
        }
        std::vector<int> members;
        for (std::size_t k = 0; k < ids.size(); ++k)
            if (in_set[k]) members.push_back(ids[k]);
        if (emitted.insert(members).second) out.members.push_back({members, field_of(members)});
    }
    return out;
}

}  // namespace strokefield
