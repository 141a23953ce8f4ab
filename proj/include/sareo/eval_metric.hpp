#pragma once

#include "sareo/error.hpp"
#include "sareo/image.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sareo {

enum class DistanceNorm { MeanAbs, MeanSq };

inline std::string_view distance_norm_name(DistanceNorm n) {
    return n == DistanceNorm::MeanAbs ? "meanabs" : "meansq";
}

inline DistanceNorm parse_distance_norm(std::string_view s) {
    if (s == "meanabs") return DistanceNorm::MeanAbs;
    if (s == "meansq") return DistanceNorm::MeanSq;
    raise(Errc::ConfigError, "unknown distance norm: " + std::string(s));
}

// Mean per-sample distance between two [0, 1] images. One running sum in
// plane order; the reduction order is part of the contract because reports
// are compared bit-for-bit across runs.
inline double pairwise_distance(const PlanarImage& output, const PlanarImage& reference,
                                DistanceNorm norm) {
    output.validate();
    reference.validate();
    require(output.width == reference.width && output.height == reference.height &&
                output.channels() == reference.channels(),
            Errc::DimensionMismatch, "image dimensions differ");
    const std::size_t npx = output.pixel_count();
    require(npx > 0 && output.channels() > 0, Errc::InvalidArgument, "empty image");

    double sum = 0.0;
    for (std::size_t c = 0; c < output.channels(); ++c) {
        const auto& a = output.planes[c];
        const auto& b = reference.planes[c];
        for (std::size_t p = 0; p < npx; ++p) {
            require(a[p] >= 0.0f && a[p] <= 1.0f && b[p] >= 0.0f && b[p] <= 1.0f, Errc::OutOfRange,
                    "image values must lie in [0,1]");
            const double d = double(a[p]) - double(b[p]);
            sum += norm == DistanceNorm::MeanAbs ? std::abs(d) : d * d;
        }
    }
    return sum / (static_cast<double>(npx) * static_cast<double>(output.channels()));
}

// Mean forward-difference gradient magnitude over all channels; differences
// past the last row/column count as zero.
inline double sharpness(const PlanarImage& img) {
    img.validate();
    const std::size_t w = img.width, h = img.height;
    require(w > 0 && h > 0 && img.channels() > 0, Errc::InvalidArgument, "empty image");
    double sum = 0.0;
    for (const auto& plane : img.planes) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const double v = plane[y * w + x];
                const double dx = x + 1 < w ? plane[y * w + x + 1] - v : 0.0;
                const double dy = y + 1 < h ? plane[(y + 1) * w + x] - v : 0.0;
                sum += std::sqrt(dx * dx + dy * dy);
            }
        }
    }
    return sum / (static_cast<double>(w) * h * img.channels());
}

struct NamedImage {
    std::string id;
    PlanarImage image;
};

struct ReferenceMatch {
    std::string reference_id;
    std::string best_output_id;
    double distance = 0.0;
};

struct EvalReport {
    double total = 0.0;
    std::vector<ReferenceMatch> per_reference;
    double mean_mae = 0.0;   // always the MeanAbs norm, whatever `total` uses
    double sharpness = 0.0;  // mean over outputs
};

// For each reference, the minimum distance over all outputs; total sums those
// minima in reference order. Ties keep the lowest output index.
inline EvalReport eval_set(const std::vector<NamedImage>& outputs,
                           const std::vector<NamedImage>& references, DistanceNorm norm) {
    require(!outputs.empty() && !references.empty(), Errc::EmptySet,
            "evaluation needs at least one output and one reference");

    EvalReport report;
    double mae_sum = 0.0;
    for (const auto& ref : references) {
        std::size_t best = 0;
        double best_dist = pairwise_distance(outputs[0].image, ref.image, norm);
        for (std::size_t i = 1; i < outputs.size(); ++i) {
            const double d = pairwise_distance(outputs[i].image, ref.image, norm);
            if (d < best_dist) {
                best_dist = d;
                best = i;
            }
        }
        report.per_reference.push_back({ref.id, outputs[best].id, best_dist});
        report.total += best_dist;
        if (norm == DistanceNorm::MeanAbs) {
            mae_sum += best_dist;
        } else {
            double best_mae = pairwise_distance(outputs[0].image, ref.image, DistanceNorm::MeanAbs);
            for (std::size_t i = 1; i < outputs.size(); ++i)
                best_mae = std::min(best_mae,
                                    pairwise_distance(outputs[i].image, ref.image, DistanceNorm::MeanAbs));
            mae_sum += best_mae;
        }
    }
    report.mean_mae = mae_sum / static_cast<double>(references.size());

    double sharp_sum = 0.0;
    for (const auto& out : outputs) sharp_sum += sharpness(out.image);
    report.sharpness = sharp_sum / static_cast<double>(outputs.size());
    return report;
}

}  // namespace sareo
