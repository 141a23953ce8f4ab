#pragma once

#include "sareo/error.hpp"
#include "sareo/image.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sareo {

enum class Stage { Stage1, Stage2, Stage3, None };
enum class Rule { QACloud, PixelThreshold, Night, NoData, FrechetScore, None };

inline std::string_view stage_name(Stage s) {
    switch (s) {
    case Stage::Stage1: return "stage1";
    case Stage::Stage2: return "stage2";
    case Stage::Stage3: return "stage3";
    case Stage::None: return "none";
    }
    return "none";
}

inline std::string_view rule_name(Rule r) {
    switch (r) {
    case Rule::QACloud: return "qa_cloud";
    case Rule::PixelThreshold: return "pixel_threshold";
    case Rule::Night: return "night";
    case Rule::NoData: return "no_data";
    case Rule::FrechetScore: return "frechet_score";
    case Rule::None: return "none";
    }
    return "none";
}

inline Stage parse_stage(std::string_view s) {
    if (s == "stage1") return Stage::Stage1;
    if (s == "stage2") return Stage::Stage2;
    if (s == "stage3") return Stage::Stage3;
    if (s == "none") return Stage::None;
    raise(Errc::InvalidArgument, "unknown stage name: " + std::string(s));
}

inline Rule parse_rule(std::string_view s) {
    if (s == "qa_cloud") return Rule::QACloud;
    if (s == "pixel_threshold") return Rule::PixelThreshold;
    if (s == "night") return Rule::Night;
    if (s == "no_data") return Rule::NoData;
    if (s == "frechet_score") return Rule::FrechetScore;
    if (s == "none") return Rule::None;
    raise(Errc::InvalidArgument, "unknown rule name: " + std::string(s));
}

struct FilterVerdict {
    std::string scene_id;
    bool kept = true;
    Stage stage = Stage::None;
    Rule rule = Rule::None;
    double statistic = 0.0;
};

struct Stage1Config {
    std::uint32_t alpha = 4096;      // raw pixel threshold, native 16-bit scale
    double bright_pixel_ratio = 0.01;
    double qa_cloud_ratio = 0.0;

    void validate() const {
        require(alpha < (1u << 16), Errc::ConfigError, "stage1.alpha must be below 2^16");
        require(bright_pixel_ratio >= 0.0 && bright_pixel_ratio <= 1.0, Errc::ConfigError,
                "stage1.bright_pixel_ratio must lie in [0,1]");
        require(qa_cloud_ratio >= 0.0 && qa_cloud_ratio <= 1.0, Errc::ConfigError,
                "stage1.qa_cloud_ratio must lie in [0,1]");
    }
};

struct Stage2Config {
    double brightness_threshold = 30.0;   // mean-V threshold, 0-255 scale
    double nodata_value_threshold = 10.0; // per-pixel V cutoff, 0-255 scale
    double nodata_ratio = 0.10;

    void validate() const {
        require(brightness_threshold >= 0.0 && brightness_threshold <= 255.0, Errc::ConfigError,
                "stage2.brightness_threshold must lie in [0,255]");
        require(nodata_value_threshold >= 0.0 && nodata_value_threshold <= 255.0, Errc::ConfigError,
                "stage2.nodata_value_threshold must lie in [0,255]");
        require(nodata_ratio >= 0.0 && nodata_ratio <= 1.0, Errc::ConfigError,
                "stage2.nodata_ratio must lie in [0,1]");
    }
};

// QA test first, pixel test second, either rejects. A pixel counts toward the
// bright fraction when any band exceeds alpha.
inline FilterVerdict stage1_filter(const std::string& scene_id, const ImageTile& tile,
                                   const QAMask* qa, const Stage1Config& cfg) {
    tile.validate();
    cfg.validate();
    const std::size_t npx = tile.pixel_count();
    require(npx > 0, Errc::InvalidArgument, scene_id + ": empty tile");

    FilterVerdict v;
    v.scene_id = scene_id;

    if (qa != nullptr) {
        require(qa->width == tile.width && qa->height == tile.height, Errc::DimensionMismatch,
                scene_id + ": QA mask dimensions differ from tile");
        const double qa_fraction = static_cast<double>(qa->cloud_count()) / static_cast<double>(npx);
        if (qa_fraction > cfg.qa_cloud_ratio) {
            v.kept = false;
            v.stage = Stage::Stage1;
            v.rule = Rule::QACloud;
            v.statistic = qa_fraction;
            return v;
        }
    }

    std::size_t bright = 0;
    for (std::size_t p = 0; p < npx; ++p) {
        for (std::uint32_t b = 0; b < tile.bands; ++b) {
            if (tile.pixels[std::size_t(b) * npx + p] > cfg.alpha) {
                ++bright;
                break;
            }
        }
    }
    const double bright_fraction = static_cast<double>(bright) / static_cast<double>(npx);
    if (bright_fraction > cfg.bright_pixel_ratio) {
        v.kept = false;
        v.stage = Stage::Stage1;
        v.rule = Rule::PixelThreshold;
    }
    v.statistic = bright_fraction;
    return v;
}

struct RgbBands {
    std::string r, g, b;
};

inline ImageTile to_rgb8(const ImageTile& tile, const RgbBands& bands, double scale) {
    tile.validate();
    require(scale > 0.0, Errc::InvalidArgument, "rgb scale must be positive");
    const std::string* labels[3] = {&bands.r, &bands.g, &bands.b};
    int src[3];
    for (int i = 0; i < 3; ++i) {
        src[i] = band_index(tile, *labels[i]);
        require(src[i] >= 0, Errc::MissingBand, "band not present: " + *labels[i]);
    }
    const std::size_t npx = tile.pixel_count();
    ImageTile out;
    out.width = tile.width;
    out.height = tile.height;
    out.bands = 3;
    out.bit_depth = 8;
    out.band_labels = {bands.r, bands.g, bands.b};
    out.pixels.resize(npx * 3);
    for (int i = 0; i < 3; ++i) {
        const auto plane = tile.plane(static_cast<std::uint32_t>(src[i]));
        for (std::size_t p = 0; p < npx; ++p) {
            long v = std::lround(static_cast<double>(plane[p]) / scale);
            if (v < 0) v = 0;
            if (v > 255) v = 255;
            out.pixels[std::size_t(i) * npx + p] = static_cast<std::uint16_t>(v);
        }
    }
    return out;
}

// Night before NoData. Mean V is compared as an exact integer sum against
// threshold * pixel count, so the verdict carries no float drift.
inline FilterVerdict stage2_filter(const std::string& scene_id, const ImageTile& rgb,
                                   const Stage2Config& cfg) {
    rgb.validate();
    cfg.validate();
    require(rgb.bands == 3 && rgb.bit_depth == 8, Errc::WrongBandLayout,
            scene_id + ": stage 2 expects an 8-bit 3-band composite");
    const std::size_t npx = rgb.pixel_count();
    require(npx > 0, Errc::InvalidArgument, scene_id + ": empty tile");

    std::uint64_t v_sum = 0;
    std::size_t nodata = 0;
    const auto r = rgb.plane(0), g = rgb.plane(1), b = rgb.plane(2);
    for (std::size_t p = 0; p < npx; ++p) {
        std::uint16_t v = std::max(r[p], std::max(g[p], b[p]));
        v_sum += v;
        if (static_cast<double>(v) < cfg.nodata_value_threshold) ++nodata;
    }

    FilterVerdict verdict;
    verdict.scene_id = scene_id;
    const double mean_v = static_cast<double>(v_sum) / static_cast<double>(npx);
    if (static_cast<double>(v_sum) < cfg.brightness_threshold * static_cast<double>(npx)) {
        verdict.kept = false;
        verdict.stage = Stage::Stage2;
        verdict.rule = Rule::Night;
        verdict.statistic = mean_v;
        return verdict;
    }
    const double nodata_fraction = static_cast<double>(nodata) / static_cast<double>(npx);
    if (nodata_fraction > cfg.nodata_ratio) {
        verdict.kept = false;
        verdict.stage = Stage::Stage2;
        verdict.rule = Rule::NoData;
    }
    verdict.statistic = nodata_fraction;
    return verdict;
}

}  // namespace sareo
