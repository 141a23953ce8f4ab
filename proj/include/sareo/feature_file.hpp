#pragma once

#include "sareo/error.hpp"
#include "sareo/util.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

namespace sareo {

// Precomputed per-patch feature container, little-endian:
//   "CCAF" | u32 version | u32 d | u64 row_count | row_count * d * float32
// A companion text index maps scene_ids to row ranges: scene_id,start,count

inline constexpr std::uint32_t kFeatureFileVersion = 1;

struct FeatureFile {
    std::uint32_t d = 0;
    std::uint64_t row_count = 0;
    std::vector<float> values;  // row-major, row_count * d

    std::vector<double> row(std::uint64_t i) const {
        require(i < row_count, Errc::InvalidArgument, "feature row out of range");
        std::vector<double> out(d);
        for (std::uint32_t j = 0; j < d; ++j) out[j] = values[i * d + j];
        return out;
    }
};

struct FeatureIndexEntry {
    std::string scene_id;
    std::uint64_t start = 0;
    std::uint64_t count = 0;
};

namespace ccafdet {

inline void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& s, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t get_u32(const std::string& s, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(s[off + i]);
    return v;
}

inline std::uint64_t get_u64(const std::string& s, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(s[off + i]);
    return v;
}

}  // namespace ccafdet

inline void write_feature_file(const std::filesystem::path& path, std::uint32_t d,
                               const std::vector<std::vector<double>>& rows) {
    require(d > 0, Errc::InvalidArgument, "feature dimension must be positive");
    std::string buf;
    buf.reserve(20 + rows.size() * d * 4);
    buf += "CCAF";
    ccafdet::put_u32(buf, kFeatureFileVersion);
    ccafdet::put_u32(buf, d);
    ccafdet::put_u64(buf, rows.size());
    for (const auto& row : rows) {
        require(row.size() == d, Errc::DimensionMismatch, "feature row dimension mismatch");
        for (double x : row) {
            const float f = static_cast<float>(x);
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            ccafdet::put_u32(buf, bits);
        }
    }
    write_file_atomic(path, buf);
}

inline FeatureFile read_feature_file(const std::filesystem::path& path) {
    const std::string buf = read_file(path);
    require(buf.size() >= 20, Errc::DecodeError, "truncated feature file: " + path.string());
    require(buf.compare(0, 4, "CCAF") == 0, Errc::DecodeError, "bad feature file magic: " + path.string());
    const std::uint32_t version = ccafdet::get_u32(buf, 4);
    require(version == kFeatureFileVersion, Errc::DecodeError,
            "unsupported feature file version " + std::to_string(version));
    FeatureFile f;
    f.d = ccafdet::get_u32(buf, 8);
    f.row_count = ccafdet::get_u64(buf, 12);
    require(f.d > 0, Errc::DecodeError, "feature file with zero dimension");
    const std::uint64_t n_values = f.row_count * f.d;
    require(buf.size() == 20 + n_values * 4, Errc::DecodeError,
            "feature file size mismatch: " + path.string());
    f.values.resize(n_values);
    for (std::uint64_t i = 0; i < n_values; ++i) {
        const std::uint32_t bits = ccafdet::get_u32(buf, 20 + i * 4);
        std::memcpy(&f.values[i], &bits, 4);
    }
    return f;
}

inline void write_feature_index(const std::filesystem::path& path,
                                const std::vector<FeatureIndexEntry>& entries) {
    std::string out;
    for (const auto& e : entries)
        out += e.scene_id + "," + std::to_string(e.start) + "," + std::to_string(e.count) + "\n";
    write_file_atomic(path, out);
}

inline std::vector<FeatureIndexEntry> read_feature_index(const std::filesystem::path& path,
                                                         std::uint64_t row_count) {
    const std::string buf = read_file(path);
    std::vector<FeatureIndexEntry> entries;
    std::size_t line_no = 0;
    for (const std::string& raw : split(buf, '\n')) {
        ++line_no;
        const std::string t = trim(raw);
        if (t.empty() || t.front() == '#') continue;
        const auto fields = split(t, ',');
        const std::string where = path.string() + ":" + std::to_string(line_no);
        require(fields.size() == 3, Errc::DecodeError, where + ": expected scene_id,start,count");
        FeatureIndexEntry e;
        e.scene_id = trim(fields[0]);
        require(!e.scene_id.empty(), Errc::DecodeError, where + ": empty scene_id");
        std::int64_t start = 0, count = 0;
        require(parse_int64(trim(fields[1]), start) && start >= 0 &&
                    parse_int64(trim(fields[2]), count) && count >= 0,
                Errc::DecodeError, where + ": bad row range");
        e.start = static_cast<std::uint64_t>(start);
        e.count = static_cast<std::uint64_t>(count);
        require(e.start + e.count <= row_count, Errc::DecodeError,
                where + ": row range exceeds feature file");
        entries.push_back(std::move(e));
    }
    return entries;
}

}  // namespace sareo
