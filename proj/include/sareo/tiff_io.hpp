#pragma once

#include "sareo/error.hpp"
#include "sareo/image.hpp"
#include "sareo/util.hpp"

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <vector>

namespace sareo {

// Minimal strip-based TIFF codec covering the profile this toolkit needs:
// 8/16-bit unsigned and 32-bit float samples, any band count, chunky or
// planar layout, Compression = none or deflate, either byte order on read.
// The encoder always writes little-endian, chunky, single-strip files.
// Tiled TIFFs are rejected.

enum class SampleKind { U8, U16, F32 };

struct TiffImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t channels = 0;
    SampleKind kind = SampleKind::U8;
    std::vector<std::uint16_t> upixels;  // planar, U8/U16
    std::vector<float> fpixels;          // planar, F32
};

namespace tiffdet {

static_assert(std::endian::native == std::endian::little, "TIFF codec assumes a little-endian host");

constexpr std::uint16_t kTagWidth = 256;
constexpr std::uint16_t kTagHeight = 257;
constexpr std::uint16_t kTagBitsPerSample = 258;
constexpr std::uint16_t kTagCompression = 259;
constexpr std::uint16_t kTagPhotometric = 262;
constexpr std::uint16_t kTagStripOffsets = 273;
constexpr std::uint16_t kTagSamplesPerPixel = 277;
constexpr std::uint16_t kTagRowsPerStrip = 278;
constexpr std::uint16_t kTagStripByteCounts = 279;
constexpr std::uint16_t kTagPlanarConfig = 284;
constexpr std::uint16_t kTagTileWidth = 322;
constexpr std::uint16_t kTagTileOffsets = 324;
constexpr std::uint16_t kTagSampleFormat = 339;

struct Reader {
    const std::string& data;
    bool big_endian = false;

    std::uint16_t u16(std::size_t off) const {
        require(off + 2 <= data.size(), Errc::DecodeError, "truncated TIFF");
        auto b0 = static_cast<std::uint8_t>(data[off]);
        auto b1 = static_cast<std::uint8_t>(data[off + 1]);
        return big_endian ? static_cast<std::uint16_t>((b0 << 8) | b1)
                          : static_cast<std::uint16_t>((b1 << 8) | b0);
    }

    std::uint32_t u32(std::size_t off) const {
        require(off + 4 <= data.size(), Errc::DecodeError, "truncated TIFF");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            auto b = static_cast<std::uint8_t>(data[off + (big_endian ? i : 3 - i)]);
            v = (v << 8) | b;
        }
        return v;
    }
};

struct IfdEntry {
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::size_t field_off = 0;  // offset of the 4-byte value/offset field
};

inline std::size_t type_size(std::uint16_t type) {
    switch (type) {
    case 1: return 1;   // BYTE
    case 3: return 2;   // SHORT
    case 4: return 4;   // LONG
    case 11: return 4;  // FLOAT
    default: return 0;
    }
}

inline std::vector<std::uint32_t> entry_values(const Reader& r, const IfdEntry& e) {
    const std::size_t elem = type_size(e.type);
    require(elem != 0, Errc::DecodeError, "unsupported TIFF field type " + std::to_string(e.type));
    const std::size_t total = elem * e.count;
    const std::size_t base = total <= 4 ? e.field_off : r.u32(e.field_off);
    std::vector<std::uint32_t> vals(e.count);
    for (std::uint32_t i = 0; i < e.count; ++i) {
        std::size_t off = base + i * elem;
        if (elem == 1) {
            require(off < r.data.size(), Errc::DecodeError, "truncated TIFF");
            vals[i] = static_cast<std::uint8_t>(r.data[off]);
        } else if (elem == 2) {
            vals[i] = r.u16(off);
        } else {
            vals[i] = r.u32(off);
        }
    }
    return vals;
}

inline std::vector<std::uint8_t> inflate_strip(const std::uint8_t* src, std::size_t src_len,
                                               std::size_t expected) {
    std::vector<std::uint8_t> out(expected);
    uLongf dest_len = static_cast<uLongf>(expected);
    int rc = uncompress(out.data(), &dest_len, src, static_cast<uLong>(src_len));
    require(rc == Z_OK && dest_len == expected, Errc::DecodeError, "deflate strip decode failed");
    return out;
}

// --- writer helpers ---

struct Builder {
    std::string bytes;

    void u16(std::uint16_t v) {
        bytes.push_back(static_cast<char>(v & 0xFF));
        bytes.push_back(static_cast<char>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void raw(const void* p, std::size_t n) { bytes.append(static_cast<const char*>(p), n); }
};

struct PendingEntry {
    std::uint16_t tag;
    std::uint16_t type;
    std::vector<std::uint32_t> values;
};

inline void write_tiff_file(const std::filesystem::path& path, std::uint32_t w, std::uint32_t h,
                            std::uint32_t channels, std::uint16_t bits, std::uint16_t sample_format,
                            const std::vector<std::uint8_t>& chunky, bool deflate) {
    std::vector<std::uint8_t> strip = chunky;
    std::uint16_t compression = 1;
    if (deflate) {
        uLongf bound = compressBound(static_cast<uLong>(chunky.size()));
        std::vector<std::uint8_t> packed(bound);
        int rc = compress2(packed.data(), &bound, chunky.data(), static_cast<uLong>(chunky.size()), 6);
        require(rc == Z_OK, Errc::IoError, "deflate failed");
        packed.resize(bound);
        strip = std::move(packed);
        compression = 8;
    }

    // layout: header (8) | strip data | IFD | overflow arrays
    const std::uint32_t strip_off = 8;
    std::uint32_t ifd_off = strip_off + static_cast<std::uint32_t>(strip.size());
    if (ifd_off & 1) ++ifd_off;  // IFDs must start on a word boundary

    std::vector<PendingEntry> entries = {
        {kTagWidth, 4, {w}},
        {kTagHeight, 4, {h}},
        {kTagBitsPerSample, 3, std::vector<std::uint32_t>(channels, bits)},
        {kTagCompression, 3, {compression}},
        {kTagPhotometric, 3, {channels >= 3 ? 2u : 1u}},
        {kTagStripOffsets, 4, {strip_off}},
        {kTagSamplesPerPixel, 3, {channels}},
        {kTagRowsPerStrip, 4, {h}},
        {kTagStripByteCounts, 4, {static_cast<std::uint32_t>(strip.size())}},
        {kTagPlanarConfig, 3, {1}},
        {kTagSampleFormat, 3, std::vector<std::uint32_t>(channels, sample_format)},
    };

    std::uint32_t overflow_off = ifd_off + 2 + 12 * static_cast<std::uint32_t>(entries.size()) + 4;

    Builder b;
    b.u16(0x4949);  // "II"
    b.u16(42);
    b.u32(ifd_off);
    b.raw(strip.data(), strip.size());
    while (b.bytes.size() < ifd_off) b.bytes.push_back('\0');

    Builder overflow;
    b.u16(static_cast<std::uint16_t>(entries.size()));
    for (const auto& e : entries) {
        b.u16(e.tag);
        b.u16(e.type);
        b.u32(static_cast<std::uint32_t>(e.values.size()));
        const std::size_t elem = type_size(e.type);
        const std::size_t total = elem * e.values.size();
        if (total <= 4) {
            std::size_t before = b.bytes.size();
            for (std::uint32_t v : e.values) {
                if (elem == 2)
                    b.u16(static_cast<std::uint16_t>(v));
                else
                    b.u32(v);
            }
            while (b.bytes.size() < before + 4) b.bytes.push_back('\0');
        } else {
            b.u32(overflow_off + static_cast<std::uint32_t>(overflow.bytes.size()));
            for (std::uint32_t v : e.values) {
                if (elem == 2)
                    overflow.u16(static_cast<std::uint16_t>(v));
                else
                    overflow.u32(v);
            }
        }
    }
    b.u32(0);  // next IFD
    b.bytes += overflow.bytes;

    write_file_atomic(path, b.bytes);
}

}  // namespace tiffdet

inline TiffImage decode_tiff(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    require(data.size() >= 8, Errc::DecodeError, "truncated TIFF: " + path.string());
    tiffdet::Reader r{data, false};
    if (data[0] == 'M' && data[1] == 'M')
        r.big_endian = true;
    else
        require(data[0] == 'I' && data[1] == 'I', Errc::DecodeError, "not a TIFF: " + path.string());
    require(r.u16(2) == 42, Errc::DecodeError, "bad TIFF magic: " + path.string());

    const std::uint32_t ifd_off = r.u32(4);
    const std::uint16_t n_entries = r.u16(ifd_off);
    std::map<std::uint16_t, tiffdet::IfdEntry> ifd;
    for (std::uint16_t i = 0; i < n_entries; ++i) {
        std::size_t off = ifd_off + 2 + std::size_t(i) * 12;
        std::uint16_t tag = r.u16(off);
        tiffdet::IfdEntry e;
        e.type = r.u16(off + 2);
        e.count = r.u32(off + 4);
        e.field_off = off + 8;
        ifd[tag] = e;
    }

    require(!ifd.count(tiffdet::kTagTileWidth) && !ifd.count(tiffdet::kTagTileOffsets), Errc::DecodeError,
            "tiled TIFF unsupported: " + path.string());

    auto scalar = [&](std::uint16_t tag, std::uint32_t fallback, bool required_tag) -> std::uint32_t {
        auto it = ifd.find(tag);
        if (it == ifd.end()) {
            require(!required_tag, Errc::DecodeError,
                    "TIFF missing tag " + std::to_string(tag) + ": " + path.string());
            return fallback;
        }
        auto vals = tiffdet::entry_values(r, it->second);
        require(!vals.empty(), Errc::DecodeError, "empty TIFF tag " + std::to_string(tag));
        return vals[0];
    };
    auto vec = [&](std::uint16_t tag) -> std::vector<std::uint32_t> {
        auto it = ifd.find(tag);
        require(it != ifd.end(), Errc::DecodeError,
                "TIFF missing tag " + std::to_string(tag) + ": " + path.string());
        return tiffdet::entry_values(r, it->second);
    };

    TiffImage img;
    img.width = scalar(tiffdet::kTagWidth, 0, true);
    img.height = scalar(tiffdet::kTagHeight, 0, true);
    img.channels = scalar(tiffdet::kTagSamplesPerPixel, 1, false);
    require(img.width > 0 && img.height > 0 && img.channels > 0, Errc::DecodeError,
            "degenerate TIFF dimensions: " + path.string());

    const auto bits_vec = vec(tiffdet::kTagBitsPerSample);
    require(!bits_vec.empty(), Errc::DecodeError, "missing BitsPerSample");
    const std::uint32_t bits = bits_vec[0];
    for (auto bv : bits_vec)
        require(bv == bits, Errc::DecodeError, "mixed per-band bit depths unsupported");

    std::uint32_t sample_format = 1;
    if (ifd.count(tiffdet::kTagSampleFormat)) sample_format = vec(tiffdet::kTagSampleFormat)[0];
    if (bits == 32) {
        require(sample_format == 3, Errc::DecodeError, "32-bit TIFF must be IEEE float");
        img.kind = SampleKind::F32;
    } else if (bits == 16) {
        require(sample_format == 1, Errc::DecodeError, "non-integer 16-bit TIFF unsupported");
        img.kind = SampleKind::U16;
    } else if (bits == 8) {
        require(sample_format == 1, Errc::DecodeError, "non-integer 8-bit TIFF unsupported");
        img.kind = SampleKind::U8;
    } else {
        raise(Errc::DecodeError, "unsupported TIFF bit depth " + std::to_string(bits));
    }

    const std::uint32_t compression = scalar(tiffdet::kTagCompression, 1, false);
    require(compression == 1 || compression == 8 || compression == 32946, Errc::DecodeError,
            "unsupported TIFF compression " + std::to_string(compression));
    const std::uint32_t planar = scalar(tiffdet::kTagPlanarConfig, 1, false);
    require(planar == 1 || planar == 2, Errc::DecodeError, "unsupported planar configuration");
    const std::uint32_t rows_per_strip = scalar(tiffdet::kTagRowsPerStrip, img.height, false);
    require(rows_per_strip > 0, Errc::DecodeError, "RowsPerStrip is zero");

    const auto offsets = vec(tiffdet::kTagStripOffsets);
    const auto counts = vec(tiffdet::kTagStripByteCounts);
    require(offsets.size() == counts.size(), Errc::DecodeError, "strip offset/count mismatch");

    const std::size_t bytes_per_sample = bits / 8;
    const std::uint32_t strips_per_plane = (img.height + rows_per_strip - 1) / rows_per_strip;
    const std::size_t expected_strips =
        planar == 1 ? strips_per_plane : std::size_t(strips_per_plane) * img.channels;
    require(offsets.size() == expected_strips, Errc::DecodeError,
            "unexpected strip count in " + path.string());

    // decode every strip into one contiguous buffer
    std::vector<std::uint8_t> raw;
    raw.reserve(std::size_t(img.width) * img.height * img.channels * bytes_per_sample);
    const std::size_t row_bytes =
        std::size_t(img.width) * bytes_per_sample * (planar == 1 ? img.channels : 1);
    for (std::size_t s = 0; s < offsets.size(); ++s) {
        const std::uint32_t row_in_plane =
            static_cast<std::uint32_t>((s % strips_per_plane) * rows_per_strip);
        const std::uint32_t rows = std::min(rows_per_strip, img.height - row_in_plane);
        const std::size_t expected = rows * row_bytes;
        require(std::size_t(offsets[s]) + counts[s] <= data.size(), Errc::DecodeError,
                "strip out of bounds in " + path.string());
        const auto* src = reinterpret_cast<const std::uint8_t*>(data.data() + offsets[s]);
        if (compression == 1) {
            require(counts[s] == expected, Errc::DecodeError, "strip byte count mismatch");
            raw.insert(raw.end(), src, src + expected);
        } else {
            auto strip = tiffdet::inflate_strip(src, counts[s], expected);
            raw.insert(raw.end(), strip.begin(), strip.end());
        }
    }
    const std::size_t n_samples = std::size_t(img.width) * img.height * img.channels;
    require(raw.size() == n_samples * bytes_per_sample, Errc::DecodeError, "decoded size mismatch");

    if (r.big_endian && bytes_per_sample > 1) {
        for (std::size_t i = 0; i < raw.size(); i += bytes_per_sample)
            std::reverse(raw.begin() + i, raw.begin() + i + bytes_per_sample);
    }

    // assemble planar sample buffers
    const std::size_t npx = std::size_t(img.width) * img.height;
    auto sample_index = [&](std::size_t i) {
        // raw index i -> (plane, pixel) position in planar output
        if (planar == 2) return i;
        std::size_t px = i / img.channels, c = i % img.channels;
        return c * npx + px;
    };
    if (img.kind == SampleKind::F32) {
        img.fpixels.resize(n_samples);
        const auto* src = reinterpret_cast<const float*>(raw.data());
        for (std::size_t i = 0; i < n_samples; ++i) img.fpixels[sample_index(i)] = src[i];
    } else if (img.kind == SampleKind::U16) {
        img.upixels.resize(n_samples);
        const auto* src = reinterpret_cast<const std::uint16_t*>(raw.data());
        for (std::size_t i = 0; i < n_samples; ++i) img.upixels[sample_index(i)] = src[i];
    } else {
        img.upixels.resize(n_samples);
        for (std::size_t i = 0; i < n_samples; ++i) img.upixels[sample_index(i)] = raw[i];
    }
    return img;
}

inline void encode_tiff(const std::filesystem::path& path, const ImageTile& tile, bool deflate = true) {
    tile.validate();
    const std::size_t npx = tile.pixel_count();
    const std::size_t bps = tile.bit_depth / 8;
    std::vector<std::uint8_t> chunky(npx * tile.bands * bps);
    if (tile.bit_depth == 8) {
        for (std::size_t p = 0; p < npx; ++p)
            for (std::uint32_t c = 0; c < tile.bands; ++c)
                chunky[p * tile.bands + c] = static_cast<std::uint8_t>(tile.pixels[c * npx + p]);
    } else {
        auto* dst = reinterpret_cast<std::uint16_t*>(chunky.data());
        for (std::size_t p = 0; p < npx; ++p)
            for (std::uint32_t c = 0; c < tile.bands; ++c)
                dst[p * tile.bands + c] = tile.pixels[c * npx + p];
    }
    tiffdet::write_tiff_file(path, tile.width, tile.height, tile.bands,
                             static_cast<std::uint16_t>(tile.bit_depth), 1, chunky, deflate);
}

inline void encode_tiff_f32(const std::filesystem::path& path, const PlanarImage& img,
                            bool deflate = true) {
    img.validate();
    const std::size_t npx = img.pixel_count();
    const std::size_t ch = img.channels();
    std::vector<std::uint8_t> chunky(npx * ch * 4);
    auto* dst = reinterpret_cast<float*>(chunky.data());
    for (std::size_t p = 0; p < npx; ++p)
        for (std::size_t c = 0; c < ch; ++c) dst[p * ch + c] = img.planes[c][p];
    tiffdet::write_tiff_file(path, img.width, img.height, static_cast<std::uint32_t>(ch), 32, 3, chunky,
                             deflate);
}

}  // namespace sareo
