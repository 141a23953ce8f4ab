#pragma once

#include "sareo/catalog.hpp"
#include "sareo/error.hpp"
#include "sareo/filters.hpp"
#include "sareo/pairing.hpp"
#include "sareo/util.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sareo {

using Json = nlohmann::ordered_json;

// Manifests are the only contract between stages: each stage reads its
// predecessor's manifest from <out>/manifests and writes its own before the
// next stage starts. All writes go through write-temp-then-rename, so an
// interrupted run never leaves a half-written manifest behind.

inline std::filesystem::path manifest_path(const std::filesystem::path& out_dir,
                                           std::string_view stage) {
    return out_dir / "manifests" / (std::string(stage) + ".json");
}

inline std::filesystem::path report_path(const std::filesystem::path& out_dir,
                                         std::string_view stage) {
    return out_dir / "reports" / (std::string(stage) + "_report.json");
}

inline void write_json_atomic(const std::filesystem::path& path, const Json& doc) {
    std::filesystem::create_directories(path.parent_path());
    write_file_atomic(path, doc.dump(2) + "\n");
}

inline Json load_manifest(const std::filesystem::path& out_dir, std::string_view stage) {
    const auto path = manifest_path(out_dir, stage);
    require(std::filesystem::exists(path), Errc::MissingUpstreamManifest,
            "stage '" + std::string(stage) + "' manifest not found at " + path.string() +
                " (run the earlier stages first)");
    try {
        return Json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::DecodeError, path.string() + ": " + e.what());
    }
}

struct StageReport {
    std::string stage;
    std::uint64_t input = 0;
    std::uint64_t kept = 0;
    std::map<std::string, std::uint64_t> dropped;  // rule name -> count
    double wall_seconds = 0.0;

    void validate() const {
        std::uint64_t d = 0;
        for (const auto& [rule, n] : dropped) d += n;
        require(input == kept + d, Errc::InvalidArgument,
                stage + ": report counts do not reconcile");
    }

    Json to_json() const {
        validate();
        Json j;
        j["stage"] = stage;
        j["input"] = input;
        j["kept"] = kept;
        j["dropped"] = Json::object();
        for (const auto& [rule, n] : dropped) j["dropped"][rule] = n;
        j["wall_seconds"] = wall_seconds;
        j["tiles_per_second"] = wall_seconds > 0.0 ? static_cast<double>(input) / wall_seconds : 0.0;
        return j;
    }
};

inline Json record_to_json(const SceneRecord& rec) {
    Json j;
    j["scene_id"] = rec.scene_id;
    j["sensor"] = sensor_name(rec.sensor);
    j["tile_id"] = rec.tile_id;
    j["date"] = format_date(rec.date);
    j["path"] = rec.path;
    j["bands"] = rec.bands;
    return j;
}

inline SceneRecord record_from_json(const Json& j) {
    SceneRecord rec;
    rec.scene_id = j.at("scene_id").get<std::string>();
    rec.sensor = parse_sensor(j.at("sensor").get<std::string>());
    rec.tile_id = j.at("tile_id").get<std::string>();
    rec.date = parse_date(j.at("date").get<std::string>());
    rec.path = j.at("path").get<std::string>();
    rec.bands = j.at("bands").get<std::vector<std::string>>();
    return rec;
}

inline Json verdict_to_json(const FilterVerdict& v) {
    Json j;
    j["scene_id"] = v.scene_id;
    j["kept"] = v.kept;
    j["stage"] = std::string(stage_name(v.stage));
    j["rule"] = std::string(rule_name(v.rule));
    j["statistic"] = v.statistic;
    return j;
}

inline FilterVerdict verdict_from_json(const Json& j) {
    FilterVerdict v;
    v.scene_id = j.at("scene_id").get<std::string>();
    v.kept = j.at("kept").get<bool>();
    v.stage = parse_stage(j.at("stage").get<std::string>());
    v.rule = parse_rule(j.at("rule").get<std::string>());
    v.statistic = j.at("statistic").get<double>();
    return v;
}

inline Json pair_manifest_to_json(const PairManifest& m) {
    m.stage_counts.validate();
    Json j;
    j["config_fingerprint"] = m.config_fingerprint;
    j["stage_counts"] = {{"input", m.stage_counts.input},
                         {"stage1_dropped", m.stage_counts.stage1_dropped},
                         {"stage2_dropped", m.stage_counts.stage2_dropped},
                         {"stage3_dropped", m.stage_counts.stage3_dropped},
                         {"kept", m.stage_counts.kept}};
    j["pairs"] = Json::array();
    for (const auto& p : m.pairs)
        j["pairs"].push_back({{"eo", p.eo_scene_id},
                              {"sar", p.sar_scene_id},
                              {"tile", p.tile_id},
                              {"day_offset", p.day_offset}});
    return j;
}

inline PairManifest pair_manifest_from_json(const Json& j) {
    PairManifest m;
    m.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    const Json& c = j.at("stage_counts");
    m.stage_counts.input = c.at("input").get<std::uint64_t>();
    m.stage_counts.stage1_dropped = c.at("stage1_dropped").get<std::uint64_t>();
    m.stage_counts.stage2_dropped = c.at("stage2_dropped").get<std::uint64_t>();
    m.stage_counts.stage3_dropped = c.at("stage3_dropped").get<std::uint64_t>();
    m.stage_counts.kept = c.at("kept").get<std::uint64_t>();
    for (const Json& p : j.at("pairs"))
        m.pairs.push_back({p.at("eo").get<std::string>(), p.at("sar").get<std::string>(),
                           p.at("tile").get<std::string>(), p.at("day_offset").get<int>()});
    return m;
}

inline std::string pair_manifest_csv(const PairManifest& m) {
    std::string out = "eo_scene_id,sar_scene_id,tile_id,day_offset\n";
    for (const auto& p : m.pairs)
        out += p.eo_scene_id + "," + p.sar_scene_id + "," + p.tile_id + "," +
               std::to_string(p.day_offset) + "\n";
    return out;
}

}  // namespace sareo
