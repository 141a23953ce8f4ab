#pragma once

#include "sareo/catalog.hpp"
#include "sareo/error.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sareo {

struct PairRecord {
    std::string eo_scene_id;
    std::string sar_scene_id;
    std::string tile_id;
    int day_offset = 0;  // SAR date - EO date
};

struct StageCounts {
    std::uint64_t input = 0;
    std::uint64_t stage1_dropped = 0;
    std::uint64_t stage2_dropped = 0;
    std::uint64_t stage3_dropped = 0;
    std::uint64_t kept = 0;

    void validate() const {
        require(input == kept + stage1_dropped + stage2_dropped + stage3_dropped,
                Errc::InvalidArgument, "stage counts do not reconcile");
    }
};

struct PairManifest {
    std::string config_fingerprint;
    StageCounts stage_counts;
    std::vector<PairRecord> pairs;
};

// All (eo, sar) with matching tile_id and |offset| <= window, window
// inclusive. A positive cap keeps only the nearest-in-time SAR scenes per EO
// scene (ties: earlier date, then scene_id). Output order is
// (tile_id, eo date, eo scene, |offset|, sar scene), independent of input
// order.
inline std::vector<PairRecord> build_pairs(const std::vector<SceneRecord>& clean_eo,
                                           const std::vector<SceneRecord>& sar, int window_days,
                                           std::uint64_t max_pairs_per_eo = 0) {
    require(window_days >= 0, Errc::NegativeWindow, "pairing window must be nonnegative");
    for (const auto& r : clean_eo)
        require(r.sensor == Sensor::EO, Errc::InvalidArgument, r.scene_id + ": expected an EO record");

    std::map<std::string, std::vector<const SceneRecord*>> sar_by_tile;
    for (const auto& r : sar) {
        require(r.sensor == Sensor::SAR, Errc::InvalidArgument,
                r.scene_id + ": expected a SAR record");
        sar_by_tile[r.tile_id].push_back(&r);
    }

    std::vector<PairRecord> pairs;
    for (const auto& eo : clean_eo) {
        auto it = sar_by_tile.find(eo.tile_id);
        if (it == sar_by_tile.end()) continue;

        struct Candidate {
            const SceneRecord* rec;
            int offset;
        };
        std::vector<Candidate> candidates;
        for (const SceneRecord* s : it->second) {
            const int offset = days_between(eo.date, s->date);
            if (offset >= -window_days && offset <= window_days) candidates.push_back({s, offset});
        }
        if (max_pairs_per_eo > 0 && candidates.size() > max_pairs_per_eo) {
            std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
                const int aa = std::abs(a.offset), ab = std::abs(b.offset);
                if (aa != ab) return aa < ab;
                if (a.rec->date != b.rec->date) return a.rec->date < b.rec->date;
                return a.rec->scene_id < b.rec->scene_id;
            });
            candidates.resize(max_pairs_per_eo);
        }
        for (const Candidate& c : candidates)
            pairs.push_back({eo.scene_id, c.rec->scene_id, eo.tile_id, c.offset});
    }

    std::map<std::string, Date> eo_dates;
    for (const auto& r : clean_eo) eo_dates.emplace(r.scene_id, r.date);

    std::sort(pairs.begin(), pairs.end(), [&](const PairRecord& a, const PairRecord& b) {
        if (a.tile_id != b.tile_id) return a.tile_id < b.tile_id;
        if (a.eo_scene_id != b.eo_scene_id) {
            // eo date first; scene_id disambiguates same-day scenes
            const Date da = eo_dates.at(a.eo_scene_id);
            const Date db = eo_dates.at(b.eo_scene_id);
            if (da != db) return da < db;
            return a.eo_scene_id < b.eo_scene_id;
        }
        const int oa = std::abs(a.day_offset), ob = std::abs(b.day_offset);
        if (oa != ob) return oa < ob;
        return a.sar_scene_id < b.sar_scene_id;
    });
    return pairs;
}

}  // namespace sareo
