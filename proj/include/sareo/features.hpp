#pragma once

#include "sareo/error.hpp"
#include "sareo/image.hpp"

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace sareo {

using FeatureVector = std::vector<double>;

inline constexpr std::size_t kFeatureDim = 24;
inline constexpr std::string_view kHandcraftedExtractorId = "handcrafted-v1";

// Frozen layout, 24 values on the 0-255 scale. Scores computed under
// different layouts are not comparable, so any change must bump the id.
//   [6c+0 .. 6c+5] for channel c in {0,1,2}:
//       mean, population std, histogram fractions for value/64 bins 0..3
//   [18..20]  mean forward-difference gradient magnitude per channel
//   [21..23]  mean V, population variance of V, fraction of pixels with V > 200
inline FeatureVector extract_features_handcrafted(const ImageTile& rgb) {
    rgb.validate();
    require(rgb.bands == 3 && rgb.bit_depth == 8, Errc::WrongBandLayout,
            "handcrafted extractor expects an 8-bit 3-band composite");
    const std::size_t npx = rgb.pixel_count();
    require(npx > 0, Errc::InvalidArgument, "empty tile");
    const std::size_t w = rgb.width, h = rgb.height;

    FeatureVector f(kFeatureDim, 0.0);
    for (std::uint32_t c = 0; c < 3; ++c) {
        const auto plane = rgb.plane(c);
        std::uint64_t sum = 0, sum_sq = 0;
        std::size_t hist[4] = {0, 0, 0, 0};
        for (std::size_t p = 0; p < npx; ++p) {
            const std::uint16_t v = plane[p];
            sum += v;
            sum_sq += std::uint64_t(v) * v;
            ++hist[v >> 6];
        }
        const double n = static_cast<double>(npx);
        const double mean = static_cast<double>(sum) / n;
        const double var = static_cast<double>(sum_sq) / n - mean * mean;
        f[6 * c + 0] = mean;
        f[6 * c + 1] = std::sqrt(var > 0.0 ? var : 0.0);
        for (int bin = 0; bin < 4; ++bin) f[6 * c + 2 + bin] = static_cast<double>(hist[bin]) / n;

        // forward differences, zero beyond the last row/column
        double grad_sum = 0.0;
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const double v = plane[y * w + x];
                const double dx = x + 1 < w ? plane[y * w + x + 1] - v : 0.0;
                const double dy = y + 1 < h ? plane[(y + 1) * w + x] - v : 0.0;
                grad_sum += std::sqrt(dx * dx + dy * dy);
            }
        }
        f[18 + c] = grad_sum / static_cast<double>(npx);
    }

    const auto r = rgb.plane(0), g = rgb.plane(1), b = rgb.plane(2);
    std::uint64_t v_sum = 0, v_sum_sq = 0;
    std::size_t v_high = 0;
    for (std::size_t p = 0; p < npx; ++p) {
        const std::uint16_t v = std::max(r[p], std::max(g[p], b[p]));
        v_sum += v;
        v_sum_sq += std::uint64_t(v) * v;
        if (v > 200) ++v_high;
    }
    const double n = static_cast<double>(npx);
    const double v_mean = static_cast<double>(v_sum) / n;
    f[21] = v_mean;
    f[22] = static_cast<double>(v_sum_sq) / n - v_mean * v_mean;
    f[23] = static_cast<double>(v_high) / n;
    return f;
}

// Non-overlapping grid, row-major; incomplete edge patches are dropped.
inline std::vector<ImageTile> tile_patches(const ImageTile& tile, std::uint32_t patch_size) {
    tile.validate();
    require(patch_size >= 8, Errc::InvalidArgument, "patch size must be at least 8");
    require(patch_size <= tile.width && patch_size <= tile.height, Errc::PatchTooLarge,
            "patch size " + std::to_string(patch_size) + " exceeds tile " + std::to_string(tile.width) +
                "x" + std::to_string(tile.height));

    const std::uint32_t nx = tile.width / patch_size;
    const std::uint32_t ny = tile.height / patch_size;
    const std::size_t npx = tile.pixel_count();
    const std::size_t patch_px = std::size_t(patch_size) * patch_size;

    std::vector<ImageTile> patches;
    patches.reserve(std::size_t(nx) * ny);
    for (std::uint32_t py = 0; py < ny; ++py) {
        for (std::uint32_t px = 0; px < nx; ++px) {
            ImageTile patch;
            patch.width = patch_size;
            patch.height = patch_size;
            patch.bands = tile.bands;
            patch.bit_depth = tile.bit_depth;
            patch.band_labels = tile.band_labels;
            patch.pixels.resize(patch_px * tile.bands);
            for (std::uint32_t b = 0; b < tile.bands; ++b) {
                const std::size_t src_base = std::size_t(b) * npx;
                const std::size_t dst_base = std::size_t(b) * patch_px;
                for (std::uint32_t y = 0; y < patch_size; ++y) {
                    const std::size_t src_row =
                        src_base + std::size_t(py * patch_size + y) * tile.width + px * patch_size;
                    std::copy_n(tile.pixels.begin() + src_row, patch_size,
                                patch.pixels.begin() + dst_base + std::size_t(y) * patch_size);
                }
            }
            patches.push_back(std::move(patch));
        }
    }
    return patches;
}

}  // namespace sareo
