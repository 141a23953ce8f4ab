#pragma once

#include "sareo/error.hpp"
#include "sareo/features.hpp"
#include "sareo/filters.hpp"
#include "sareo/linalg.hpp"
#include "sareo/stats.hpp"

#include <cmath>
#include <map>
#include <string>

namespace sareo {

enum class ThresholdForm { LiteralEq1, Interpolation };
enum class Extractor { Handcrafted, ExternalFeatures };

inline std::string_view threshold_form_name(ThresholdForm f) {
    return f == ThresholdForm::LiteralEq1 ? "literal_eq1" : "interpolation";
}

inline ThresholdForm parse_threshold_form(std::string_view s) {
    if (s == "literal_eq1") return ThresholdForm::LiteralEq1;
    if (s == "interpolation") return ThresholdForm::Interpolation;
    raise(Errc::ConfigError, "unknown threshold form: " + std::string(s));
}

inline std::string_view extractor_name(Extractor e) {
    return e == Extractor::Handcrafted ? "handcrafted" : "external_features";
}

inline Extractor parse_extractor(std::string_view s) {
    if (s == "handcrafted") return Extractor::Handcrafted;
    if (s == "external_features") return Extractor::ExternalFeatures;
    raise(Errc::ConfigError, "unknown extractor: " + std::string(s));
}

struct Stage3Config {
    double beta = 0.4;
    ThresholdForm threshold_form = ThresholdForm::LiteralEq1;
    std::uint32_t patch_size = 64;
    Extractor extractor = Extractor::Handcrafted;
    double epsilon_reg = 1e-6;

    void validate() const {
        require(beta >= 0.0 && beta <= 1.0, Errc::ConfigError, "score.beta must lie in [0,1]");
        require(patch_size >= 8, Errc::ConfigError, "score.patch_size must be at least 8");
        require(epsilon_reg > 0.0 && std::isfinite(epsilon_reg), Errc::ConfigError,
                "score.epsilon_reg must be a small positive real");
    }
};

struct ScoreSet {
    std::map<std::string, double> scores;

    std::size_t n() const { return scores.size(); }

    void insert(const std::string& scene_id, double score) {
        require(std::isfinite(score) && score >= 0.0, Errc::NonFinite,
                scene_id + ": score must be finite and nonnegative");
        scores.emplace(scene_id, score);
    }
};

// Gaussian Frechet distance in the symmetric product form, which keeps the
// matrix under the inner square root SPD by construction:
//   d = |mu_a - mu_b|^2 + tr(Sa + Sb - 2 (Sa^1/2 Sb Sa^1/2)^1/2)
// with eps*I added to both covariances first. Negative rounding residue is
// clamped to zero.
inline double frechet_distance(const GaussianStats& a, const GaussianStats& b, double eps) {
    require(a.dim() == b.dim() && a.dim() > 0, Errc::DimensionMismatch,
            "frechet distance dimension mismatch");
    require(eps >= 0.0 && std::isfinite(eps), Errc::InvalidArgument, "eps must be nonnegative");
    const std::size_t d = a.dim();

    SquareMatrix sa = a.cov, sb = b.cov;
    require(sa.n == d && sb.n == d, Errc::DimensionMismatch, "covariance dimension mismatch");
    for (std::size_t i = 0; i < d; ++i) {
        sa.at(i, i) += eps;
        sb.at(i, i) += eps;
    }

    double mean_term = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double delta = a.mean[i] - b.mean[i];
        mean_term += delta * delta;
    }

    const SquareMatrix root_a = sqrtm_spd(sa);
    const SquareMatrix inner = matmul(matmul(root_a, sb), root_a);
    const SquareMatrix cross = sqrtm_spd(inner);

    const double result = mean_term + trace(sa) + trace(sb) - 2.0 * trace(cross);
    return result > 0.0 ? result : 0.0;
}

namespace scoredet {

inline void score_range(const ScoreSet& scores, double& mn, double& mx) {
    require(!scores.scores.empty(), Errc::EmptyScoreSet, "threshold of an empty score set");
    mn = mx = scores.scores.begin()->second;
    for (const auto& [id, s] : scores.scores) {
        require(std::isfinite(s) && s >= 0.0, Errc::NonFinite, id + ": invalid score");
        mn = std::min(mn, s);
        mx = std::max(mx, s);
    }
}

}  // namespace scoredet

// (min(S) + max(S) - min(S)) * beta collapses to max(S) * beta; the
// interpolation form reads the same expression as min + (max - min) * beta.
// Both are computed so reports can carry the two side by side.
inline double threshold_literal(double mn, double mx, double beta) {
    (void)mn;
    return mx * beta;
}

inline double threshold_interpolation(double mn, double mx, double beta) {
    return mn + (mx - mn) * beta;
}

inline double stage3_threshold(const ScoreSet& scores, const Stage3Config& cfg) {
    cfg.validate();
    double mn = 0.0, mx = 0.0;
    scoredet::score_range(scores, mn, mx);
    return cfg.threshold_form == ThresholdForm::LiteralEq1 ? threshold_literal(mn, mx, cfg.beta)
                                                           : threshold_interpolation(mn, mx, cfg.beta);
}

inline FilterVerdict stage3_filter(const std::string& scene_id, double score, double f_th) {
    require(std::isfinite(score), Errc::NonFinite, scene_id + ": non-finite score");
    FilterVerdict v;
    v.scene_id = scene_id;
    v.statistic = score;
    if (score < f_th) {
        v.kept = false;
        v.stage = Stage::Stage3;
        v.rule = Rule::FrechetScore;
    }
    return v;
}

// Per-tile score for the handcrafted path: the tile's patch features form one
// Gaussian, compared against the pooled cloud-reference Gaussian.
inline GaussianStats tile_feature_stats(const ImageTile& rgb8, std::uint32_t patch_size) {
    StatsAccumulator acc(kFeatureDim);
    for (const ImageTile& patch : tile_patches(rgb8, patch_size))
        acc.add(extract_features_handcrafted(patch));
    return acc.finalize();
}

inline double score_tile_handcrafted(const ImageTile& rgb8, const GaussianStats& reference,
                                     const Stage3Config& cfg) {
    cfg.validate();
    const GaussianStats stats = tile_feature_stats(rgb8, cfg.patch_size);
    return frechet_distance(stats, reference, cfg.epsilon_reg);
}

}  // namespace sareo
