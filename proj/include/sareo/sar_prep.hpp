#pragma once

#include "sareo/error.hpp"
#include "sareo/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace sareo {

enum class SarRecipe { VvVhAvg, Custom };

// Custom composite: channel c = a[c]*VV + b[c]*VH.
struct CustomRecipe {
    std::array<double, 3> a{1.0, 0.0, 0.5};
    std::array<double, 3> b{0.0, 1.0, 0.5};
};

struct SarComposite {
    PlanarImage image;  // exactly 3 planes
    SarRecipe recipe = SarRecipe::VvVhAvg;
};

inline SarComposite synthesize_3ch(const std::vector<float>& vv, const std::vector<float>& vh,
                                   std::uint32_t width, std::uint32_t height,
                                   SarRecipe recipe = SarRecipe::VvVhAvg,
                                   const CustomRecipe& custom = CustomRecipe{}) {
    const std::size_t npx = std::size_t(width) * height;
    require(npx > 0, Errc::InvalidArgument, "empty SAR plane");
    require(vv.size() == npx && vh.size() == npx, Errc::DimensionMismatch,
            "VV/VH plane dimensions differ");
    for (std::size_t p = 0; p < npx; ++p)
        require(std::isfinite(vv[p]) && std::isfinite(vh[p]), Errc::NonFinite,
                "non-finite SAR sample");

    SarComposite out;
    out.recipe = recipe;
    out.image.width = width;
    out.image.height = height;
    out.image.planes.assign(3, std::vector<float>(npx));
    if (recipe == SarRecipe::VvVhAvg) {
        out.image.planes[0] = vv;
        out.image.planes[1] = vh;
        for (std::size_t p = 0; p < npx; ++p)
            out.image.planes[2][p] = static_cast<float>((double(vv[p]) + double(vh[p])) / 2.0);
    } else {
        for (int c = 0; c < 3; ++c)
            for (std::size_t p = 0; p < npx; ++p)
                out.image.planes[c][p] =
                    static_cast<float>(custom.a[c] * double(vv[p]) + custom.b[c] * double(vh[p]));
    }
    return out;
}

// k x k median with edge replication; output never leaves the input's range.
inline std::vector<float> median_blur(const std::vector<float>& plane, std::uint32_t width,
                                      std::uint32_t height, std::uint32_t k) {
    require(k % 2 == 1 && k >= 3, Errc::EvenKernel, "median kernel must be odd and at least 3");
    require(width >= k && height >= k, Errc::PlaneTooSmall,
            "plane smaller than the median kernel");
    require(plane.size() == std::size_t(width) * height, Errc::DimensionMismatch,
            "plane size mismatch");

    const int r = static_cast<int>(k) / 2;
    std::vector<float> out(plane.size());
    std::vector<float> window(std::size_t(k) * k);
    for (std::uint32_t y = 0; y < height; ++y) {
        for (std::uint32_t x = 0; x < width; ++x) {
            std::size_t w = 0;
            for (int dy = -r; dy <= r; ++dy) {
                const int yy = std::clamp<int>(int(y) + dy, 0, int(height) - 1);
                for (int dx = -r; dx <= r; ++dx) {
                    const int xx = std::clamp<int>(int(x) + dx, 0, int(width) - 1);
                    window[w++] = plane[std::size_t(yy) * width + xx];
                }
            }
            auto mid = window.begin() + w / 2;
            std::nth_element(window.begin(), mid, window.begin() + w);
            out[std::size_t(y) * width + x] = *mid;
        }
    }
    return out;
}

enum class NormVariant { Dataset1MinMax, Dataset2Tanh };
enum class MinMaxMode { PerImage, GlobalFromConfig };

inline std::string_view norm_variant_name(NormVariant v) {
    return v == NormVariant::Dataset1MinMax ? "dataset1_minmax" : "dataset2_tanh";
}

inline NormVariant parse_norm_variant(std::string_view s) {
    if (s == "dataset1_minmax") return NormVariant::Dataset1MinMax;
    if (s == "dataset2_tanh") return NormVariant::Dataset2Tanh;
    raise(Errc::ConfigError, "unknown normalization variant: " + std::string(s));
}

inline MinMaxMode parse_minmax_mode(std::string_view s) {
    if (s == "per_image") return MinMaxMode::PerImage;
    if (s == "global_from_config") return MinMaxMode::GlobalFromConfig;
    raise(Errc::ConfigError, "unknown minmax mode: " + std::string(s));
}

struct NormalizationSpec {
    NormVariant variant = NormVariant::Dataset1MinMax;
    double tanh_scale = 1.0;
    MinMaxMode minmax_mode = MinMaxMode::PerImage;
    double global_min = 0.0;
    double global_max = 0.0;

    void validate() const {
        require(tanh_scale > 0.0 && std::isfinite(tanh_scale), Errc::ConfigError,
                "norm.tanh_scale must be positive");
        if (variant == NormVariant::Dataset1MinMax && minmax_mode == MinMaxMode::GlobalFromConfig)
            require(global_min < global_max, Errc::ConfigError,
                    "norm.global_min must be below norm.global_max");
    }
};

struct NormalizeResult {
    PlanarImage image;
    std::vector<std::size_t> degenerate_planes;  // constant planes mapped to 0
};

namespace prepdet {

inline double median_of(std::vector<double>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 0) {
        double lo = *std::max_element(v.begin(), v.begin() + mid);
        return (lo + hi) / 2.0;
    }
    return hi;
}

}  // namespace prepdet

// Dataset1: (x - min)/(max - min) rescaled onto [-1, 1]; a constant plane
// has no usable range and maps to the midpoint 0.
// Dataset2: tanh of the median/MAD standardized value, strictly inside
// (-1, 1). The standardized argument is capped at +-8 so float32 storage
// cannot round the result onto the open interval's endpoints.
inline NormalizeResult normalize(const PlanarImage& input, const NormalizationSpec& spec) {
    input.validate();
    spec.validate();
    const std::size_t npx = input.pixel_count();
    require(npx > 0, Errc::InvalidArgument, "empty image");
    for (const auto& plane : input.planes)
        for (float x : plane) require(std::isfinite(x), Errc::NonFinite, "non-finite input sample");

    NormalizeResult result;
    result.image.width = input.width;
    result.image.height = input.height;
    result.image.planes.resize(input.channels());

    for (std::size_t c = 0; c < input.channels(); ++c) {
        const auto& src = input.planes[c];
        auto& dst = result.image.planes[c];
        dst.resize(npx);

        if (spec.variant == NormVariant::Dataset1MinMax) {
            double mn, mx;
            if (spec.minmax_mode == MinMaxMode::GlobalFromConfig) {
                mn = spec.global_min;
                mx = spec.global_max;
            } else {
                const auto [mn_it, mx_it] = std::minmax_element(src.begin(), src.end());
                mn = *mn_it;
                mx = *mx_it;
            }
            if (!(mx > mn)) {
                std::fill(dst.begin(), dst.end(), 0.0f);
                result.degenerate_planes.push_back(c);
                continue;
            }
            const double range = mx - mn;
            for (std::size_t p = 0; p < npx; ++p) {
                double v = 2.0 * ((double(src[p]) - mn) / range) - 1.0;
                if (spec.minmax_mode == MinMaxMode::GlobalFromConfig) v = std::clamp(v, -1.0, 1.0);
                dst[p] = static_cast<float>(v);
            }
        } else {
            std::vector<double> tmp(src.begin(), src.end());
            const double med = prepdet::median_of(tmp);
            for (std::size_t p = 0; p < npx; ++p) tmp[p] = std::abs(double(src[p]) - med);
            const double mad = prepdet::median_of(tmp);
            const double denom = spec.tanh_scale * mad + 1e-12;
            for (std::size_t p = 0; p < npx; ++p) {
                const double arg = std::clamp((double(src[p]) - med) / denom, -8.0, 8.0);
                dst[p] = static_cast<float>(std::tanh(arg));
            }
        }
    }
    return result;
}

// 8-bit preview of a [-1, 1] image: linear map onto [0, 255].
inline ImageTile preview_tile(const PlanarImage& img) {
    img.validate();
    const std::size_t npx = img.pixel_count();
    ImageTile out;
    out.width = img.width;
    out.height = img.height;
    out.bands = static_cast<std::uint32_t>(img.channels());
    out.bit_depth = 8;
    out.pixels.resize(npx * img.channels());
    for (std::size_t c = 0; c < img.channels(); ++c)
        for (std::size_t p = 0; p < npx; ++p) {
            long v = std::lround((double(img.planes[c][p]) + 1.0) / 2.0 * 255.0);
            out.pixels[c * npx + p] = static_cast<std::uint16_t>(std::clamp(v, 0L, 255L));
        }
    return out;
}

}  // namespace sareo
