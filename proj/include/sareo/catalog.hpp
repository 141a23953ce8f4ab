#pragma once

#include "sareo/error.hpp"
#include "sareo/util.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_set>
#include <vector>

namespace sareo {

enum class Sensor { SAR, EO };

inline const char* sensor_name(Sensor s) { return s == Sensor::SAR ? "SAR" : "EO"; }

inline Sensor parse_sensor(std::string_view s) {
    if (s == "SAR") return Sensor::SAR;
    if (s == "EO") return Sensor::EO;
    raise(Errc::MalformedCatalog, "unknown sensor '" + std::string(s) + "' (expected SAR or EO)");
}

// Calendar date at day resolution (UTC).
using Date = std::chrono::year_month_day;

inline Date parse_date(std::string_view s) {
    // strict YYYY-MM-DD
    auto bad = [&]() {
        raise(Errc::MalformedCatalog, "unparseable date '" + std::string(s) + "' (expected YYYY-MM-DD)");
    };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') bad();
    std::int64_t y = 0, m = 0, d = 0;
    if (!parse_int64(s.substr(0, 4), y) || !parse_int64(s.substr(5, 2), m) || !parse_int64(s.substr(8, 2), d))
        bad();
    Date ymd{std::chrono::year(static_cast<int>(y)), std::chrono::month(static_cast<unsigned>(m)),
             std::chrono::day(static_cast<unsigned>(d))};
    if (!ymd.ok()) bad();
    return ymd;
}

inline std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

inline std::chrono::sys_days to_days(const Date& d) { return std::chrono::sys_days(d); }

// Days from a to b (b - a), signed.
inline int days_between(const Date& a, const Date& b) {
    return static_cast<int>((to_days(b) - to_days(a)).count());
}

struct SceneRecord {
    std::string scene_id;
    Sensor sensor = Sensor::EO;
    std::string tile_id;  // spatial grid cell
    Date date{};
    std::string path;  // relative to the catalog file's directory (or io.root)
    std::vector<std::string> bands;
};

inline constexpr const char* kCatalogHeader = "scene_id,sensor,tile_id,date,path,bands";
inline constexpr const char* kDefaultQaBandLabel = "QA60";

// Loads a scene catalog: UTF-8 CSV, one scene per line, header required.
// Band labels are ';'-separated inside the last column. Records come back
// in a total deterministic order: (tile_id, date, scene_id).
inline std::vector<SceneRecord> load_catalog(const std::filesystem::path& path,
                                             std::string_view qa_band_label = kDefaultQaBandLabel) {
    require(std::filesystem::exists(path), Errc::IoError, "catalog not found: " + path.string());
    const std::string data = read_file(path);
    std::vector<SceneRecord> records;
    std::unordered_set<std::string> seen_ids;

    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos <= data.size()) {
        std::size_t eol = data.find('\n', pos);
        if (eol == std::string::npos) eol = data.size();
        std::string line = trim(std::string_view(data).substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (line.empty() || line[0] == '#') {
            if (pos > data.size()) break;
            continue;
        }
        auto ctx = [&](const std::string& msg) {
            return path.filename().string() + ":" + std::to_string(line_no) + ": " + msg;
        };
        if (!header_seen) {
            auto fields = split(line, ',');
            std::string canon;
            for (std::size_t i = 0; i < fields.size(); ++i)
                canon += (i ? "," : "") + trim(fields[i]);
            require(canon == kCatalogHeader, Errc::MalformedCatalog,
                    ctx("missing or wrong header (expected '" + std::string(kCatalogHeader) + "')"));
            header_seen = true;
            continue;
        }
        auto fields = split(line, ',');
        require(fields.size() == 6, Errc::MalformedCatalog,
                ctx("expected 6 fields, got " + std::to_string(fields.size())));

        SceneRecord rec;
        rec.scene_id = trim(fields[0]);
        require(!rec.scene_id.empty(), Errc::MalformedCatalog, ctx("empty scene_id"));
        require(seen_ids.insert(rec.scene_id).second, Errc::DuplicateSceneId,
                ctx("duplicate scene_id '" + rec.scene_id + "'"));
        rec.sensor = parse_sensor(trim(fields[1]));
        rec.tile_id = trim(fields[2]);
        require(!rec.tile_id.empty(), Errc::MalformedCatalog, ctx("empty tile_id"));
        rec.date = parse_date(trim(fields[3]));
        rec.path = trim(fields[4]);
        require(!rec.path.empty(), Errc::MalformedCatalog, ctx("empty path"));
        for (auto& b : split(fields[5], ';')) {
            std::string label = trim(b);
            require(!label.empty(), Errc::MalformedCatalog, ctx("empty band label"));
            require(std::find(rec.bands.begin(), rec.bands.end(), label) == rec.bands.end(),
                    Errc::MalformedCatalog, ctx("duplicate band label '" + label + "'"));
            rec.bands.push_back(std::move(label));
        }
        require(!rec.bands.empty(), Errc::MalformedCatalog, ctx("no band labels"));
        if (rec.sensor == Sensor::SAR) {
            require(std::find(rec.bands.begin(), rec.bands.end(), qa_band_label) == rec.bands.end(),
                    Errc::MalformedCatalog, ctx("SAR record must not reference a QA band"));
        }
        records.push_back(std::move(rec));
        if (pos > data.size()) break;
    }
    require(header_seen, Errc::MalformedCatalog, path.filename().string() + ": empty catalog (header required)");

    std::sort(records.begin(), records.end(), [](const SceneRecord& a, const SceneRecord& b) {
        if (a.tile_id != b.tile_id) return a.tile_id < b.tile_id;
        if (a.date != b.date) return to_days(a.date) < to_days(b.date);
        return a.scene_id < b.scene_id;
    });
    return records;
}

inline std::string catalog_line(const SceneRecord& rec) {
    std::string bands;
    for (std::size_t i = 0; i < rec.bands.size(); ++i) bands += (i ? ";" : "") + rec.bands[i];
    return rec.scene_id + "," + sensor_name(rec.sensor) + "," + rec.tile_id + "," + format_date(rec.date) +
           "," + rec.path + "," + bands;
}

}  // namespace sareo
