#pragma once

#include "sareo/catalog.hpp"
#include "sareo/error.hpp"
#include "sareo/image.hpp"
#include "sareo/png_io.hpp"
#include "sareo/tiff_io.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <string>

namespace sareo {

inline std::string path_extension_lower(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

inline bool is_tiff_path(const std::filesystem::path& path) {
    const std::string ext = path_extension_lower(path);
    return ext == ".tif" || ext == ".tiff";
}

inline bool is_png_path(const std::filesystem::path& path) {
    return path_extension_lower(path) == ".png";
}

inline ImageTile tiff_to_tile(const TiffImage& img, const std::filesystem::path& path) {
    require(img.kind != SampleKind::F32, Errc::DecodeError,
            "float TIFF cannot be loaded as an integer tile: " + path.string());
    ImageTile tile;
    tile.width = img.width;
    tile.height = img.height;
    tile.bands = img.channels;
    tile.bit_depth = img.kind == SampleKind::U8 ? 8 : 16;
    tile.pixels = img.upixels;
    tile.validate();
    return tile;
}

inline ImageTile load_raster(const std::filesystem::path& path) {
    if (is_png_path(path)) return decode_png(path);
    if (is_tiff_path(path)) return tiff_to_tile(decode_tiff(path), path);
    raise(Errc::DecodeError, "unsupported raster extension: " + path.string());
}

// Loads the raster a catalog record points at and attaches the record's band
// labels. The decoded band count must match the catalog's claim exactly.
inline ImageTile load_tile(const SceneRecord& rec, const std::filesystem::path& root) {
    const std::filesystem::path full = root / rec.path;
    ImageTile tile = load_raster(full);
    require(tile.bands == rec.bands.size(), Errc::BandCountMismatch,
            rec.scene_id + ": catalog lists " + std::to_string(rec.bands.size()) + " bands, raster has " +
                std::to_string(tile.bands));
    tile.band_labels = rec.bands;
    return tile;
}

inline void save_tile(const std::filesystem::path& path, const ImageTile& tile) {
    if (is_png_path(path)) {
        encode_png(path, tile);
        return;
    }
    if (is_tiff_path(path)) {
        encode_tiff(path, tile);
        return;
    }
    raise(Errc::IoError, "unsupported raster extension: " + path.string());
}

// Loads any supported raster as float planes. Integer samples map onto [0, 1]
// by dividing by the type maximum; float samples pass through untouched.
inline PlanarImage load_planar(const std::filesystem::path& path) {
    PlanarImage out;
    if (is_tiff_path(path)) {
        TiffImage img = decode_tiff(path);
        out.width = img.width;
        out.height = img.height;
        const std::size_t npx = std::size_t(img.width) * img.height;
        out.planes.resize(img.channels);
        if (img.kind == SampleKind::F32) {
            for (std::uint32_t c = 0; c < img.channels; ++c)
                out.planes[c].assign(img.fpixels.begin() + c * npx, img.fpixels.begin() + (c + 1) * npx);
        } else {
            const float scale = img.kind == SampleKind::U8 ? 255.0f : 65535.0f;
            for (std::uint32_t c = 0; c < img.channels; ++c) {
                out.planes[c].resize(npx);
                for (std::size_t p = 0; p < npx; ++p)
                    out.planes[c][p] = static_cast<float>(img.upixels[c * npx + p]) / scale;
            }
        }
        out.validate();
        return out;
    }
    const ImageTile tile = load_raster(path);
    out.width = tile.width;
    out.height = tile.height;
    const std::size_t npx = tile.pixel_count();
    const float scale = tile.bit_depth == 8 ? 255.0f : 65535.0f;
    out.planes.resize(tile.bands);
    for (std::uint32_t c = 0; c < tile.bands; ++c) {
        out.planes[c].resize(npx);
        const auto plane = tile.plane(c);
        for (std::size_t p = 0; p < npx; ++p) out.planes[c][p] = static_cast<float>(plane[p]) / scale;
    }
    out.validate();
    return out;
}

}  // namespace sareo
