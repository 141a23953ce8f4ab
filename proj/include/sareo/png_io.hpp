#pragma once

#include "sareo/error.hpp"
#include "sareo/image.hpp"

#include <png.h>

#include <cstdio>
#include <csetjmp>
#include <filesystem>
#include <memory>
#include <vector>

namespace sareo {

// PNG raster IO: 8/16-bit, 1-4 channels (gray, gray+alpha, RGB, RGBA).
// Palette and sub-8-bit gray inputs are expanded on read; the encoder never
// produces them. 16-bit samples are byte-swapped to native order.

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FileHandle = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace detail

inline ImageTile decode_png(const std::filesystem::path& path) {
    detail::FileHandle fp(std::fopen(path.string().c_str(), "rb"));
    require(fp != nullptr, Errc::IoError, "cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require(png != nullptr, Errc::DecodeError, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        raise(Errc::DecodeError, "png_create_info_struct failed");
    }

    std::vector<png_byte> interleaved;
    std::vector<png_bytep> row_ptrs;
    ImageTile tile;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(Errc::DecodeError, "corrupt or truncated PNG: " + path.string());
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int depth = png_get_bit_depth(png, info);
    int color = png_get_color_type(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (depth == 16) png_set_swap(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    depth = png_get_bit_depth(png, info);
    const int channels = png_get_channels(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);

    interleaved.resize(row_bytes * h);
    row_ptrs.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = interleaved.data() + y * row_bytes;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    tile.width = w;
    tile.height = h;
    tile.bands = static_cast<std::uint32_t>(channels);
    tile.bit_depth = static_cast<std::uint8_t>(depth);
    tile.pixels.resize(tile.pixel_count() * tile.bands);

    // de-interleave into planar storage
    const std::size_t npx = tile.pixel_count();
    if (depth == 8) {
        for (std::size_t p = 0; p < npx; ++p)
            for (int c = 0; c < channels; ++c)
                tile.pixels[std::size_t(c) * npx + p] = interleaved[p * channels + c];
    } else {
        const auto* src = reinterpret_cast<const std::uint16_t*>(interleaved.data());
        for (std::size_t p = 0; p < npx; ++p)
            for (int c = 0; c < channels; ++c)
                tile.pixels[std::size_t(c) * npx + p] = src[p * channels + c];
    }
    tile.validate();
    return tile;
}

inline void encode_png(const std::filesystem::path& path, const ImageTile& tile) {
    tile.validate();
    require(tile.bands >= 1 && tile.bands <= 4, Errc::InvalidArgument,
            "PNG supports 1-4 channels, got " + std::to_string(tile.bands));

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    detail::FileHandle fp(std::fopen(path.string().c_str(), "wb"));
    require(fp != nullptr, Errc::IoError, "cannot open " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require(png != nullptr, Errc::IoError, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        raise(Errc::IoError, "png_create_info_struct failed");
    }

    const std::size_t npx = tile.pixel_count();
    const std::size_t bytes_per_sample = tile.bit_depth == 16 ? 2 : 1;
    const std::size_t row_bytes = std::size_t(tile.width) * tile.bands * bytes_per_sample;
    std::vector<png_byte> interleaved(row_bytes * tile.height);
    std::vector<png_bytep> row_ptrs(tile.height);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        raise(Errc::IoError, "PNG write failed: " + path.string());
    }

    static const int color_types[] = {PNG_COLOR_TYPE_GRAY, PNG_COLOR_TYPE_GRAY_ALPHA, PNG_COLOR_TYPE_RGB,
                                      PNG_COLOR_TYPE_RGBA};
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, tile.width, tile.height, tile.bit_depth, color_types[tile.bands - 1],
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (tile.bit_depth == 16) png_set_swap(png);

    if (tile.bit_depth == 8) {
        for (std::size_t p = 0; p < npx; ++p)
            for (std::uint32_t c = 0; c < tile.bands; ++c)
                interleaved[p * tile.bands + c] =
                    static_cast<png_byte>(tile.pixels[std::size_t(c) * npx + p]);
    } else {
        auto* dst = reinterpret_cast<std::uint16_t*>(interleaved.data());
        for (std::size_t p = 0; p < npx; ++p)
            for (std::uint32_t c = 0; c < tile.bands; ++c)
                dst[p * tile.bands + c] = tile.pixels[std::size_t(c) * npx + p];
    }
    for (std::uint32_t y = 0; y < tile.height; ++y)
        row_ptrs[y] = interleaved.data() + std::size_t(y) * row_bytes;

    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace sareo
