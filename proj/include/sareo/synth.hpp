#pragma once

#include "sareo/catalog.hpp"
#include "sareo/config.hpp"
#include "sareo/error.hpp"
#include "sareo/filters.hpp"
#include "sareo/image.hpp"
#include "sareo/png_io.hpp"
#include "sareo/tiff_io.hpp"
#include "sareo/util.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace sareo {

// Deterministic labeled corpus: five EO classes plus SAR tiles. Class
// parameters keep every generated statistic at least 10% away from the
// default thresholds, so the expected verdicts are unambiguous:
//   clean   two-tone texture, passes all three stages
//   cloud   saturated above alpha; every fifth tile carries a QA60 band
//           with the opaque-cloud bit set (rejected by the QA rule instead)
//   night   dim values, mean V well under the brightness threshold
//   nodata  a 15-35% zero-pixel fraction, rest moderately bright
//   hazy    bright low-texture tiles; they clear stages 1-2 and score close
//           to the cloud-reference pool, so stage 3 rejects them
// The leading hazy scene ids double as the cloud-reference subset list.
struct SynthSpec {
    std::uint64_t seed = 7;
    std::uint32_t tile_size = 256;
    std::uint64_t clean = 400;
    std::uint64_t cloud = 120;
    std::uint64_t night = 120;
    std::uint64_t nodata = 120;
    std::uint64_t hazy = 120;
    std::uint64_t sar = 120;
    std::uint64_t cloud_subset = 40;
    double cloud_min = 4600.0;
    double cloud_max = 9000.0;
    double night_min = 400.0;
    double night_max = 900.0;
    double nodata_frac_min = 0.15;
    double nodata_frac_max = 0.35;

    void validate() const {
        require(tile_size >= 64, Errc::ConfigError, "synth.tile_size must be at least 64");
        require(clean > 0 && hazy > 0, Errc::ConfigError,
                "synth corpus needs clean and hazy tiles for stage 3 to be meaningful");
        require(cloud_subset > 0 && cloud_subset <= hazy, Errc::ConfigError,
                "synth.cloud_subset must fit inside the hazy class");
        require(cloud_min > 4096.0 * 1.1, Errc::ConfigError,
                "synth.cloud_min must clear the pixel threshold with margin");
        require(cloud_max > cloud_min && cloud_max < 65536.0, Errc::ConfigError,
                "bad cloud brightness range");
        require(night_min >= 0.0 && night_max > night_min, Errc::ConfigError, "bad night range");
        require(night_max / (10000.0 / 255.0) < 30.0 * 0.9, Errc::ConfigError,
                "synth.night_max must keep mean V under the brightness threshold with margin");
        require(nodata_frac_min > 0.10 * 1.1 && nodata_frac_max > nodata_frac_min &&
                    nodata_frac_max <= 1.0,
                Errc::ConfigError, "bad nodata fraction range");
    }
};

inline std::span<const KeyDefault> synth_registry() {
    static const KeyDefault keys[] = {
        {"synth.seed", "7"},
        {"synth.tile_size", "256"},
        {"synth.clean", "400"},
        {"synth.cloud", "120"},
        {"synth.night", "120"},
        {"synth.nodata", "120"},
        {"synth.hazy", "120"},
        {"synth.sar", "120"},
        {"synth.cloud_subset", "40"},
        {"synth.cloud_min", "4600"},
        {"synth.cloud_max", "9000"},
        {"synth.night_min", "400"},
        {"synth.night_max", "900"},
        {"synth.nodata_frac_min", "0.15"},
        {"synth.nodata_frac_max", "0.35"},
    };
    return keys;
}

inline SynthSpec synth_spec_from_config(const Config& cfg) {
    SynthSpec s;
    s.seed = static_cast<std::uint64_t>(cfg.get_int("synth.seed"));
    s.tile_size = static_cast<std::uint32_t>(cfg.get_int("synth.tile_size"));
    s.clean = static_cast<std::uint64_t>(cfg.get_int("synth.clean"));
    s.cloud = static_cast<std::uint64_t>(cfg.get_int("synth.cloud"));
    s.night = static_cast<std::uint64_t>(cfg.get_int("synth.night"));
    s.nodata = static_cast<std::uint64_t>(cfg.get_int("synth.nodata"));
    s.hazy = static_cast<std::uint64_t>(cfg.get_int("synth.hazy"));
    s.sar = static_cast<std::uint64_t>(cfg.get_int("synth.sar"));
    s.cloud_subset = static_cast<std::uint64_t>(cfg.get_int("synth.cloud_subset"));
    s.cloud_min = cfg.get_double("synth.cloud_min");
    s.cloud_max = cfg.get_double("synth.cloud_max");
    s.night_min = cfg.get_double("synth.night_min");
    s.night_max = cfg.get_double("synth.night_max");
    s.nodata_frac_min = cfg.get_double("synth.nodata_frac_min");
    s.nodata_frac_max = cfg.get_double("synth.nodata_frac_max");
    s.validate();
    return s;
}

struct SynthLabel {
    std::string scene_id;
    Stage expected_stage = Stage::None;
    Rule expected_rule = Rule::None;
};

struct SynthResult {
    std::vector<SceneRecord> records;
    std::vector<SynthLabel> labels;
    std::vector<std::string> cloud_subset_ids;
};

namespace synthdet {

inline std::string scene_name(const char* cls, std::uint64_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%04llu", cls, static_cast<unsigned long long>(i));
    return buf;
}

inline std::string tile_name(std::uint64_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "T%04llu", static_cast<unsigned long long>(i));
    return buf;
}

inline Date date_for(std::uint64_t eo_index) {
    using namespace std::chrono;
    return year_month_day{sys_days{year{2021} / 1 / 1} + days{(eo_index * 13) % 360}};
}

inline std::uint16_t quantize(double v) {
    long r = std::lround(v);
    if (r < 0) r = 0;
    if (r > 65535) r = 65535;
    return static_cast<std::uint16_t>(r);
}

}  // namespace synthdet

// Single sequential PRNG stream, fixed class order; identical seeds give
// byte-identical corpora.
inline SynthResult generate(const SynthSpec& spec, const std::filesystem::path& out_dir) {
    spec.validate();
    SplitMix64 rng(spec.seed);
    const std::uint32_t ts = spec.tile_size;
    const std::size_t npx = std::size_t(ts) * ts;
    const std::filesystem::path tiles_dir = out_dir / "tiles";
    std::filesystem::create_directories(tiles_dir);

    SynthResult result;
    std::uint64_t eo_index = 0;
    std::vector<Date> clean_dates;

    auto emit_eo = [&](const std::string& scene_id, ImageTile&& tile, bool has_qa, Stage st, Rule rule) {
        const std::string rel = "tiles/" + scene_id + ".png";
        encode_png(out_dir / rel, tile);
        SceneRecord rec;
        rec.scene_id = scene_id;
        rec.sensor = Sensor::EO;
        rec.tile_id = synthdet::tile_name(eo_index);
        rec.date = synthdet::date_for(eo_index);
        rec.path = rel;
        rec.bands = has_qa ? std::vector<std::string>{"B4", "B3", "B2", "QA60"}
                           : std::vector<std::string>{"B4", "B3", "B2"};
        result.records.push_back(rec);
        result.labels.push_back({scene_id, st, rule});
        ++eo_index;
    };

    auto blank = [&](std::uint32_t bands) {
        ImageTile t;
        t.width = ts;
        t.height = ts;
        t.bands = bands;
        t.bit_depth = 16;
        t.pixels.assign(npx * bands, 0);
        return t;
    };

    for (std::uint64_t i = 0; i < spec.clean; ++i) {
        ImageTile t = blank(3);
        for (std::size_t p = 0; p < npx; ++p) {
            const double tone = rng.unit() < 0.5 ? 1800.0 : 3400.0;
            for (std::size_t b = 0; b < 3; ++b)
                t.pixels[b * npx + p] = synthdet::quantize(tone + rng.range(-150.0, 150.0));
        }
        clean_dates.push_back(synthdet::date_for(eo_index));
        emit_eo(synthdet::scene_name("clean", i), std::move(t), false, Stage::None, Rule::None);
    }

    for (std::uint64_t i = 0; i < spec.cloud; ++i) {
        const bool with_qa = (i % 5) == 0;
        ImageTile t = blank(with_qa ? 4 : 3);
        for (std::size_t b = 0; b < 3; ++b)
            for (std::size_t p = 0; p < npx; ++p)
                t.pixels[b * npx + p] = synthdet::quantize(rng.range(spec.cloud_min, spec.cloud_max));
        if (with_qa)
            for (std::size_t p = 0; p < npx; ++p)
                t.pixels[3 * npx + p] = rng.unit() < 0.55 ? 1024 : 0;  // bit 10: opaque cloud
        emit_eo(synthdet::scene_name("cloud", i), std::move(t), with_qa, Stage::Stage1,
                with_qa ? Rule::QACloud : Rule::PixelThreshold);
    }

    for (std::uint64_t i = 0; i < spec.night; ++i) {
        ImageTile t = blank(3);
        for (std::size_t b = 0; b < 3; ++b)
            for (std::size_t p = 0; p < npx; ++p)
                t.pixels[b * npx + p] = synthdet::quantize(rng.range(spec.night_min, spec.night_max));
        emit_eo(synthdet::scene_name("night", i), std::move(t), false, Stage::Stage2, Rule::Night);
    }

    for (std::uint64_t i = 0; i < spec.nodata; ++i) {
        ImageTile t = blank(3);
        const double frac = rng.range(spec.nodata_frac_min, spec.nodata_frac_max);
        for (std::size_t p = 0; p < npx; ++p) {
            if (rng.unit() < frac) continue;  // stays zero in every band
            for (std::size_t b = 0; b < 3; ++b)
                t.pixels[b * npx + p] = synthdet::quantize(rng.range(2200.0, 3200.0));
        }
        emit_eo(synthdet::scene_name("nodata", i), std::move(t), false, Stage::Stage2, Rule::NoData);
    }

    for (std::uint64_t i = 0; i < spec.hazy; ++i) {
        ImageTile t = blank(3);
        const double base = rng.range(3100.0, 3400.0);
        for (std::size_t p = 0; p < npx; ++p)
            for (std::size_t b = 0; b < 3; ++b)
                t.pixels[b * npx + p] = synthdet::quantize(base + rng.unit() * 120.0);
        const std::string scene_id = synthdet::scene_name("hazy", i);
        if (i < spec.cloud_subset) result.cloud_subset_ids.push_back(scene_id);
        emit_eo(scene_id, std::move(t), false, Stage::Stage3, Rule::FrechetScore);
    }

    for (std::uint64_t j = 0; j < spec.sar; ++j) {
        ImageTile t = blank(2);
        for (std::size_t p = 0; p < npx; ++p) {
            t.pixels[p] = synthdet::quantize(rng.range(800.0, 2000.0));
            t.pixels[npx + p] = synthdet::quantize(rng.range(300.0, 1200.0));
        }
        const std::string scene_id = synthdet::scene_name("sar", j);
        const std::string rel = "tiles/" + scene_id + ".tif";
        encode_tiff(out_dir / rel, t);
        const std::uint64_t anchor = j % spec.clean;  // pair SAR tiles with clean EO scenes
        SceneRecord rec;
        rec.scene_id = scene_id;
        rec.sensor = Sensor::SAR;
        rec.tile_id = synthdet::tile_name(anchor);
        using namespace std::chrono;
        const int delta = static_cast<int>((j * 7) % 41) - 20;
        rec.date = year_month_day{sys_days{clean_dates[anchor]} + days{delta}};
        rec.path = rel;
        rec.bands = {"VV", "VH"};
        result.records.push_back(rec);
    }

    // catalog in the loader's canonical order
    std::vector<SceneRecord> sorted = result.records;
    std::sort(sorted.begin(), sorted.end(), [](const SceneRecord& a, const SceneRecord& b) {
        if (a.tile_id != b.tile_id) return a.tile_id < b.tile_id;
        if (a.date != b.date) return a.date < b.date;
        return a.scene_id < b.scene_id;
    });
    std::string catalog_text = std::string(kCatalogHeader) + "\n";
    for (const auto& rec : sorted) catalog_text += catalog_line(rec) + "\n";
    write_file_atomic(out_dir / "catalog.csv", catalog_text);

    nlohmann::ordered_json labels_doc;
    labels_doc["prng"] = "splitmix64";
    labels_doc["seed"] = spec.seed;
    labels_doc["labels"] = nlohmann::ordered_json::array();
    for (const auto& l : result.labels)
        labels_doc["labels"].push_back({{"scene_id", l.scene_id},
                                        {"expected_stage", std::string(stage_name(l.expected_stage))},
                                        {"expected_rule", std::string(rule_name(l.expected_rule))}});
    write_file_atomic(out_dir / "labels.json", labels_doc.dump(2) + "\n");

    std::string subset_text;
    for (const auto& id : result.cloud_subset_ids) subset_text += id + "\n";
    write_file_atomic(out_dir / "cloud_subset.txt", subset_text);

    return result;
}

}  // namespace sareo
