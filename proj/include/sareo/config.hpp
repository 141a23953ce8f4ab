#pragma once

#include "sareo/error.hpp"
#include "sareo/util.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sareo {

// Line-oriented config: [section] headers, key = value lines, # comments.
// Every key must appear in the registry for its consumer; unknown or
// duplicate keys are fatal so a misspelled threshold can never silently
// fall back to a default.

struct KeyDefault {
    std::string_view key;  // "section.key"
    std::string_view value;
};

class Config {
public:
    Config() = default;

    static Config from_registry(std::span<const KeyDefault> registry) {
        Config c;
        for (const auto& kd : registry) c.values_.emplace(std::string(kd.key), std::string(kd.value));
        return c;
    }

    static Config parse(std::string_view text, std::span<const KeyDefault> registry,
                        const std::string& origin) {
        Config c = from_registry(registry);
        std::string section;
        std::size_t line_no = 0;
        std::map<std::string, bool> seen;
        for (const std::string& raw : split(text, '\n')) {
            ++line_no;
            const std::string line = trim(raw);
            const std::string where = origin + ":" + std::to_string(line_no);
            if (line.empty() || line.front() == '#') continue;
            if (line.front() == '[') {
                require(line.back() == ']' && line.size() > 2, Errc::ConfigError,
                        where + ": malformed section header");
                section = trim(std::string_view(line).substr(1, line.size() - 2));
                require(!section.empty(), Errc::ConfigError, where + ": empty section name");
                continue;
            }
            const auto eq = line.find('=');
            require(eq != std::string::npos, Errc::ConfigError, where + ": expected key = value");
            const std::string key_part = trim(std::string_view(line).substr(0, eq));
            const std::string value = trim(std::string_view(line).substr(eq + 1));
            require(!key_part.empty(), Errc::ConfigError, where + ": empty key");
            require(!section.empty(), Errc::ConfigError, where + ": key outside any [section]");
            const std::string key = section + "." + key_part;
            require(c.values_.count(key) > 0, Errc::ConfigError, where + ": unknown key " + key);
            require(!seen[key], Errc::ConfigError, where + ": duplicate key " + key);
            seen[key] = true;
            c.values_[key] = value;
        }
        return c;
    }

    static Config load(const std::filesystem::path& path, std::span<const KeyDefault> registry) {
        return parse(read_file(path), registry, path.string());
    }

    const std::string& raw(std::string_view key) const {
        auto it = values_.find(std::string(key));
        require(it != values_.end(), Errc::ConfigError, "unregistered config key " + std::string(key));
        return it->second;
    }

    void set(std::string_view key, std::string_view value) {
        auto it = values_.find(std::string(key));
        require(it != values_.end(), Errc::ConfigError, "unregistered config key " + std::string(key));
        it->second = std::string(value);
    }

    std::string get_string(std::string_view key) const { return raw(key); }

    std::int64_t get_int(std::string_view key) const {
        std::int64_t out = 0;
        require(parse_int64(raw(key), out), Errc::ConfigError,
                std::string(key) + ": expected an integer, got '" + raw(key) + "'");
        return out;
    }

    double get_double(std::string_view key) const {
        double out = 0.0;
        require(parse_double(raw(key), out), Errc::ConfigError,
                std::string(key) + ": expected a number, got '" + raw(key) + "'");
        return out;
    }

    bool get_bool(std::string_view key) const {
        const std::string& v = raw(key);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        raise(Errc::ConfigError, std::string(key) + ": expected true/false, got '" + v + "'");
    }

    // Stable digest over the sorted key=value serialization. Everything the
    // pipeline's behavior depends on is a registered key, so equal
    // fingerprints mean equal configured behavior; runtime-only knobs
    // (worker count, output directory) are deliberately not config keys.
    std::string fingerprint() const {
        std::uint64_t h = 14695981039346656037ULL;
        for (const auto& [k, v] : values_) {
            const std::string line = k + "=" + v + "\n";
            h = fnv1a64(line.data(), line.size(), h);
        }
        return to_hex(h);
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

inline std::span<const KeyDefault> pipeline_registry() {
    static const std::string scale_default = canonical_double(10000.0 / 255.0);
    static const KeyDefault keys[] = {
        {"io.catalog", ""},
        {"io.root", ""},
        {"stage1.alpha", "4096"},
        {"stage1.bright_pixel_ratio", "0.01"},
        {"stage1.qa_cloud_ratio", "0"},
        {"stage1.qa_band", "QA60"},
        {"stage1.qa_bits", "10;11"},
        {"stage2.brightness_threshold", "30"},
        {"stage2.nodata_value_threshold", "10"},
        {"stage2.nodata_ratio", "0.1"},
        {"rgb.bands", "B4;B3;B2"},
        {"rgb.scale", scale_default},
        {"score.beta", "0.4"},
        {"score.threshold_form", "literal_eq1"},
        {"score.patch_size", "64"},
        {"score.extractor", "handcrafted"},
        {"score.epsilon_reg", "1e-06"},
        {"score.cloud_subset", ""},
        {"score.external_features", ""},
        {"score.external_index", ""},
        {"pair.window_days", "30"},
        {"pair.max_pairs_per_eo", "0"},
        {"sar.recipe", "vv_vh_avg"},
        {"sar.median_k", "3"},
        {"sar.db_input", "false"},
        {"sar.vv_band", "VV"},
        {"sar.vh_band", "VH"},
        {"norm.variant", "dataset1_minmax"},
        {"norm.tanh_scale", "1"},
        {"norm.minmax_mode", "per_image"},
        {"norm.global_min", "0"},
        {"norm.global_max", "0"},
        {"bridge.cmd", ""},
        {"eval.norm", "meanabs"},
        {"eval.outputs", ""},
        {"eval.references", ""},
        {"eval.mapping", ""},
    };
    return keys;
}

inline Config pipeline_defaults() { return Config::from_registry(pipeline_registry()); }

inline Config load_pipeline_config(const std::filesystem::path& path) {
    return Config::load(path, pipeline_registry());
}

}  // namespace sareo
