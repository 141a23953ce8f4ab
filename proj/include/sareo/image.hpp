#pragma once

#include "sareo/error.hpp"

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sareo {

// Decoded raster at native bit depth. Storage is planar (band 0 fully,
// then band 1, ...); each plane is row-major. Values stay integer until a
// stage explicitly converts -- filter thresholds like alpha = 4096 are
// defined on raw 16-bit values.
struct ImageTile {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t bands = 0;
    std::uint8_t bit_depth = 8;  // 8 or 16
    std::vector<std::uint16_t> pixels;
    std::vector<std::string> band_labels;  // empty, or one label per band

    std::size_t pixel_count() const { return std::size_t(width) * height; }

    std::span<const std::uint16_t> plane(std::size_t b) const {
        return {pixels.data() + b * pixel_count(), pixel_count()};
    }

    std::span<std::uint16_t> plane(std::size_t b) {
        return {pixels.data() + b * pixel_count(), pixel_count()};
    }

    std::uint16_t at(std::uint32_t x, std::uint32_t y, std::uint32_t b) const {
        return pixels[std::size_t(b) * pixel_count() + std::size_t(y) * width + x];
    }

    void validate() const {
        require(width > 0 && height > 0 && bands > 0, Errc::InvalidArgument, "empty tile");
        require(bit_depth == 8 || bit_depth == 16, Errc::InvalidArgument, "bit depth must be 8 or 16");
        require(pixels.size() == pixel_count() * bands, Errc::InvalidArgument,
                "pixel buffer size does not match width*height*bands");
        require(band_labels.empty() || band_labels.size() == bands, Errc::InvalidArgument,
                "band label count does not match band count");
        if (bit_depth == 8) {
            const bool ok = std::all_of(pixels.begin(), pixels.end(), [](std::uint16_t v) { return v < 256; });
            require(ok, Errc::InvalidArgument, "8-bit tile holds values >= 256");
        }
    }
};

// -1 when the label is absent.
inline int band_index(const ImageTile& tile, std::string_view label) {
    for (std::size_t i = 0; i < tile.band_labels.size(); ++i)
        if (tile.band_labels[i] == label) return static_cast<int>(i);
    return -1;
}

inline ImageTile extract_band(const ImageTile& tile, std::size_t b) {
    require(b < tile.bands, Errc::InvalidArgument, "band index out of range");
    ImageTile out;
    out.width = tile.width;
    out.height = tile.height;
    out.bands = 1;
    out.bit_depth = tile.bit_depth;
    auto p = tile.plane(b);
    out.pixels.assign(p.begin(), p.end());
    if (!tile.band_labels.empty()) out.band_labels = {tile.band_labels[b]};
    return out;
}

inline ImageTile drop_band(const ImageTile& tile, std::size_t b) {
    require(b < tile.bands, Errc::InvalidArgument, "band index out of range");
    require(tile.bands > 1, Errc::InvalidArgument, "cannot drop the only band");
    ImageTile out;
    out.width = tile.width;
    out.height = tile.height;
    out.bands = tile.bands - 1;
    out.bit_depth = tile.bit_depth;
    out.pixels.reserve(out.pixel_count() * out.bands);
    for (std::size_t i = 0; i < tile.bands; ++i) {
        if (i == b) continue;
        auto p = tile.plane(i);
        out.pixels.insert(out.pixels.end(), p.begin(), p.end());
        if (!tile.band_labels.empty()) out.band_labels.push_back(tile.band_labels[i]);
    }
    return out;
}

// Real-valued planar image for SAR composites, normalized outputs, and the
// evaluation metric.
struct PlanarImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::vector<float>> planes;

    std::size_t pixel_count() const { return std::size_t(width) * height; }
    std::size_t channels() const { return planes.size(); }

    void validate() const {
        require(width > 0 && height > 0 && !planes.empty(), Errc::InvalidArgument, "empty planar image");
        for (const auto& p : planes)
            require(p.size() == pixel_count(), Errc::InvalidArgument, "plane size mismatch");
    }
};

inline PlanarImage make_planar(std::uint32_t w, std::uint32_t h, std::size_t channels, float fill = 0.0f) {
    PlanarImage img;
    img.width = w;
    img.height = h;
    img.planes.assign(channels, std::vector<float>(std::size_t(w) * h, fill));
    return img;
}

// Per-pixel QA bitfield (Sentinel-2 QA60 convention: bits 10 and 11 are the
// opaque-cloud and cirrus flags). Flags are copied verbatim from the raster;
// cloud_flagged is a pure function of the flags and the configured bits.
struct QAMask {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint16_t> flags;
    std::uint32_t cloud_bit_mask = 0;

    bool cloud_flagged(std::size_t p) const { return (flags[p] & cloud_bit_mask) != 0; }

    std::size_t cloud_count() const {
        std::size_t n = 0;
        for (std::uint16_t f : flags)
            if (f & cloud_bit_mask) ++n;
        return n;
    }
};

inline QAMask decode_qa_mask(const ImageTile& tile, std::span<const int> cloud_bits) {
    require(tile.bands == 1, Errc::NotSingleBand, "QA raster must have exactly one band");
    QAMask mask;
    mask.width = tile.width;
    mask.height = tile.height;
    mask.flags.assign(tile.pixels.begin(), tile.pixels.end());
    for (int b : cloud_bits) {
        require(b >= 0 && b < 16, Errc::ConfigError, "QA cloud bit index out of range [0,16)");
        mask.cloud_bit_mask |= 1u << b;
    }
    return mask;
}

}  // namespace sareo
