#pragma once

#include "sareo/catalog.hpp"
#include "sareo/config.hpp"
#include "sareo/error.hpp"
#include "sareo/eval_metric.hpp"
#include "sareo/feature_file.hpp"
#include "sareo/filters.hpp"
#include "sareo/frechet.hpp"
#include "sareo/manifest.hpp"
#include "sareo/pairing.hpp"
#include "sareo/raster_io.hpp"
#include "sareo/sar_prep.hpp"
#include "sareo/worker_pool.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace sareo {

struct PipelineContext {
    Config config;
    std::filesystem::path out_dir;
    unsigned workers = 1;
};

inline const std::vector<std::string>& stage_order() {
    static const std::vector<std::string> order = {"ingest",    "filter", "score", "pair",
                                                   "prep",      "translate", "eval"};
    return order;
}

namespace pipedet {

class StageTimer {
public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline void check_fingerprint(const Json& manifest, const PipelineContext& ctx,
                              std::string_view upstream) {
    const std::string recorded = manifest.at("config_fingerprint").get<std::string>();
    require(recorded == ctx.config.fingerprint(), Errc::ConfigError,
            std::string(upstream) + " manifest was produced under a different config (fingerprint " +
                recorded + ", current " + ctx.config.fingerprint() + ")");
}

inline std::filesystem::path resolve_root(const PipelineContext& ctx,
                                          const std::filesystem::path& catalog_path) {
    const std::string root = ctx.config.get_string("io.root");
    if (!root.empty()) return root;
    return catalog_path.parent_path();
}

inline std::vector<int> parse_qa_bits(const Config& cfg) {
    std::vector<int> bits;
    for (const std::string& part : split(cfg.get_string("stage1.qa_bits"), ';')) {
        const std::string t = trim(part);
        if (t.empty()) continue;
        std::int64_t b = 0;
        require(parse_int64(t, b) && b >= 0 && b < 16, Errc::ConfigError,
                "stage1.qa_bits: expected bit indices in [0,16), got '" + t + "'");
        bits.push_back(static_cast<int>(b));
    }
    require(!bits.empty(), Errc::ConfigError, "stage1.qa_bits must name at least one bit");
    return bits;
}

inline Stage1Config stage1_from_config(const Config& cfg) {
    Stage1Config c;
    const std::int64_t alpha = cfg.get_int("stage1.alpha");
    require(alpha >= 0, Errc::ConfigError, "stage1.alpha must be nonnegative");
    c.alpha = static_cast<std::uint32_t>(alpha);
    c.bright_pixel_ratio = cfg.get_double("stage1.bright_pixel_ratio");
    c.qa_cloud_ratio = cfg.get_double("stage1.qa_cloud_ratio");
    c.validate();
    return c;
}

inline Stage2Config stage2_from_config(const Config& cfg) {
    Stage2Config c;
    c.brightness_threshold = cfg.get_double("stage2.brightness_threshold");
    c.nodata_value_threshold = cfg.get_double("stage2.nodata_value_threshold");
    c.nodata_ratio = cfg.get_double("stage2.nodata_ratio");
    c.validate();
    return c;
}

inline Stage3Config stage3_from_config(const Config& cfg) {
    Stage3Config c;
    c.beta = cfg.get_double("score.beta");
    c.threshold_form = parse_threshold_form(cfg.get_string("score.threshold_form"));
    const std::int64_t patch = cfg.get_int("score.patch_size");
    require(patch >= 8, Errc::ConfigError, "score.patch_size must be at least 8");
    c.patch_size = static_cast<std::uint32_t>(patch);
    c.extractor = parse_extractor(cfg.get_string("score.extractor"));
    c.epsilon_reg = cfg.get_double("score.epsilon_reg");
    c.validate();
    return c;
}

inline RgbBands rgb_bands_from_config(const Config& cfg) {
    const auto parts = split(cfg.get_string("rgb.bands"), ';');
    require(parts.size() == 3, Errc::ConfigError, "rgb.bands must name exactly three bands");
    RgbBands b;
    b.r = trim(parts[0]);
    b.g = trim(parts[1]);
    b.b = trim(parts[2]);
    require(!b.r.empty() && !b.g.empty() && !b.b.empty(), Errc::ConfigError,
            "rgb.bands must name exactly three bands");
    return b;
}

inline NormalizationSpec norm_from_config(const Config& cfg) {
    NormalizationSpec spec;
    spec.variant = parse_norm_variant(cfg.get_string("norm.variant"));
    spec.tanh_scale = cfg.get_double("norm.tanh_scale");
    spec.minmax_mode = parse_minmax_mode(cfg.get_string("norm.minmax_mode"));
    spec.global_min = cfg.get_double("norm.global_min");
    spec.global_max = cfg.get_double("norm.global_max");
    spec.validate();
    return spec;
}

inline SarRecipe recipe_from_config(const Config& cfg, CustomRecipe& custom) {
    const std::string raw = cfg.get_string("sar.recipe");
    if (raw == "vv_vh_avg") return SarRecipe::VvVhAvg;
    if (raw.rfind("custom:", 0) == 0) {
        const auto rows = split(std::string_view(raw).substr(7), ';');
        require(rows.size() == 3, Errc::ConfigError,
                "sar.recipe custom form needs three a,b coefficient pairs");
        for (int c = 0; c < 3; ++c) {
            const auto ab = split(rows[c], ',');
            require(ab.size() == 2, Errc::ConfigError, "sar.recipe: expected 'a,b' per channel");
            require(parse_double(trim(ab[0]), custom.a[c]) && parse_double(trim(ab[1]), custom.b[c]),
                    Errc::ConfigError, "sar.recipe: bad coefficient in '" + rows[c] + "'");
        }
        return SarRecipe::Custom;
    }
    raise(Errc::ConfigError, "sar.recipe must be vv_vh_avg or custom:a,b;c,d;e,f");
}

// Per-scene filter evaluation shared by the filter stage and tests. The QA
// band, when present, never participates in the pixel-threshold scan.
inline FilterVerdict filter_one(const SceneRecord& rec, const std::filesystem::path& root,
                                const Config& cfg) {
    const ImageTile loaded = load_tile(rec, root);
    const std::string qa_label = cfg.get_string("stage1.qa_band");
    const int qa_idx = band_index(loaded, qa_label);

    const Stage1Config s1 = stage1_from_config(cfg);
    const Stage2Config s2 = stage2_from_config(cfg);

    FilterVerdict v;
    if (qa_idx >= 0) {
        const QAMask qa = decode_qa_mask(extract_band(loaded, static_cast<std::uint32_t>(qa_idx)),
                                         parse_qa_bits(cfg));
        const ImageTile data = drop_band(loaded, static_cast<std::uint32_t>(qa_idx));
        v = stage1_filter(rec.scene_id, data, &qa, s1);
        if (!v.kept) return v;
        return stage2_filter(rec.scene_id,
                             to_rgb8(data, rgb_bands_from_config(cfg), cfg.get_double("rgb.scale")), s2);
    }
    v = stage1_filter(rec.scene_id, loaded, nullptr, s1);
    if (!v.kept) return v;
    return stage2_filter(rec.scene_id,
                         to_rgb8(loaded, rgb_bands_from_config(cfg), cfg.get_double("rgb.scale")), s2);
}

inline std::vector<std::string> load_scene_list(const std::filesystem::path& path) {
    std::vector<std::string> ids;
    for (const std::string& raw : split(read_file(path), '\n')) {
        const std::string t = trim(raw);
        if (t.empty() || t.front() == '#') continue;
        ids.push_back(t);
    }
    require(!ids.empty(), Errc::InvalidArgument, path.string() + ": empty scene list");
    return ids;
}

}  // namespace pipedet

inline StageReport run_ingest(const PipelineContext& ctx) {
    pipedet::StageTimer timer;
    const std::string catalog_value = ctx.config.get_string("io.catalog");
    require(!catalog_value.empty(), Errc::ConfigError, "io.catalog is not set");
    const std::filesystem::path catalog_path = catalog_value;
    const auto records = load_catalog(catalog_path, ctx.config.get_string("stage1.qa_band"));
    const std::filesystem::path root = pipedet::resolve_root(ctx, catalog_path);

    std::uint64_t n_eo = 0, n_sar = 0;
    for (const auto& r : records) (r.sensor == Sensor::EO ? n_eo : n_sar) += 1;

    Json m;
    m["config_fingerprint"] = ctx.config.fingerprint();
    m["source_catalog"] = catalog_path.string();
    m["root"] = root.string();
    m["counts"] = {{"eo", n_eo}, {"sar", n_sar}};
    m["records"] = Json::array();
    for (const auto& r : records) m["records"].push_back(record_to_json(r));
    write_json_atomic(manifest_path(ctx.out_dir, "ingest"), m);

    StageReport report;
    report.stage = "ingest";
    report.input = records.size();
    report.kept = records.size();
    report.wall_seconds = timer.seconds();
    write_json_atomic(report_path(ctx.out_dir, "ingest"), report.to_json());
    return report;
}

inline StageReport run_filter(const PipelineContext& ctx) {
    pipedet::StageTimer timer;
    const Json ingest = load_manifest(ctx.out_dir, "ingest");
    pipedet::check_fingerprint(ingest, ctx, "ingest");
    const std::filesystem::path root = ingest.at("root").get<std::string>();

    std::vector<SceneRecord> eo;
    for (const Json& j : ingest.at("records")) {
        SceneRecord rec = record_from_json(j);
        if (rec.sensor == Sensor::EO) eo.push_back(std::move(rec));
    }

    std::vector<FilterVerdict> verdicts(eo.size());
    parallel_for(eo.size(), ctx.workers,
                 [&](std::size_t i) { verdicts[i] = pipedet::filter_one(eo[i], root, ctx.config); });

    StageReport report;
    report.stage = "filter";
    report.input = eo.size();
    for (const auto& v : verdicts) {
        if (v.kept)
            ++report.kept;
        else
            ++report.dropped[std::string(rule_name(v.rule))];
    }

    Json m;
    m["config_fingerprint"] = ctx.config.fingerprint();
    m["counts"] = {{"input", report.input}, {"kept", report.kept}};
    m["verdicts"] = Json::array();
    for (const auto& v : verdicts) m["verdicts"].push_back(verdict_to_json(v));
    write_json_atomic(manifest_path(ctx.out_dir, "filter"), m);

    report.wall_seconds = timer.seconds();
    write_json_atomic(report_path(ctx.out_dir, "filter"), report.to_json());
    return report;
}

inline StageReport run_score(const PipelineContext& ctx) {
    pipedet::StageTimer timer;
    const Json ingest = load_manifest(ctx.out_dir, "ingest");
    const Json filter = load_manifest(ctx.out_dir, "filter");
    pipedet::check_fingerprint(ingest, ctx, "ingest");
    pipedet::check_fingerprint(filter, ctx, "filter");
    const std::filesystem::path root = ingest.at("root").get<std::string>();
    const Stage3Config cfg = pipedet::stage3_from_config(ctx.config);

    std::map<std::string, SceneRecord> records;
    for (const Json& j : ingest.at("records")) {
        SceneRecord rec = record_from_json(j);
        records.emplace(rec.scene_id, std::move(rec));
    }
    std::vector<std::string> survivors;
    for (const Json& j : filter.at("verdicts"))
        if (j.at("kept").get<bool>()) survivors.push_back(j.at("scene_id").get<std::string>());

    const auto load_rgb8 = [&](const std::string& scene_id) {
        auto it = records.find(scene_id);
        require(it != records.end(), Errc::InvalidArgument, scene_id + ": not in the ingest manifest");
        ImageTile tile = load_tile(it->second, root);
        const int qa_idx = band_index(tile, ctx.config.get_string("stage1.qa_band"));
        if (qa_idx >= 0) tile = drop_band(tile, static_cast<std::uint32_t>(qa_idx));
        return to_rgb8(tile, pipedet::rgb_bands_from_config(ctx.config),
                       ctx.config.get_double("rgb.scale"));
    };

    std::string extractor_id;
    std::vector<double> scores(survivors.size(), 0.0);

    if (!survivors.empty() && cfg.extractor == Extractor::Handcrafted) {
        extractor_id = std::string(kHandcraftedExtractorId);
        const std::string subset_path = ctx.config.get_string("score.cloud_subset");
        require(!subset_path.empty(), Errc::ConfigError, "score.cloud_subset is not set");
        const auto subset_ids = pipedet::load_scene_list(subset_path);

        std::vector<StatsAccumulator> partials(subset_ids.size());
        parallel_for(subset_ids.size(), ctx.workers, [&](std::size_t i) {
            StatsAccumulator acc(kFeatureDim);
            for (const ImageTile& patch : tile_patches(load_rgb8(subset_ids[i]), cfg.patch_size))
                acc.add(extract_features_handcrafted(patch));
            partials[i] = std::move(acc);
        });
        StatsAccumulator pooled(kFeatureDim);
        for (const auto& p : partials) pooled.merge(p);  // fixed order, worker-count independent
        const GaussianStats reference = pooled.finalize();

        parallel_for(survivors.size(), ctx.workers, [&](std::size_t i) {
            scores[i] = score_tile_handcrafted(load_rgb8(survivors[i]), reference, cfg);
        });
    } else if (!survivors.empty()) {
        const std::string features_path = ctx.config.get_string("score.external_features");
        const std::string index_path = ctx.config.get_string("score.external_index");
        require(!features_path.empty() && !index_path.empty(), Errc::ConfigError,
                "score.external_features and score.external_index are required for the external extractor");
        const FeatureFile features = read_feature_file(features_path);
        extractor_id = "external:" + to_hex(fnv1a64(read_file(features_path)));
        std::map<std::string, FeatureIndexEntry> index;
        for (auto& e : read_feature_index(index_path, features.row_count))
            index.emplace(e.scene_id, std::move(e));

        const auto stats_for = [&](const std::string& scene_id) {
            auto it = index.find(scene_id);
            require(it != index.end(), Errc::InvalidArgument,
                    scene_id + ": no rows in the external feature index");
            StatsAccumulator acc(features.d);
            for (std::uint64_t r = 0; r < it->second.count; ++r)
                acc.add(features.row(it->second.start + r));
            return acc;
        };

        const std::string subset_path = ctx.config.get_string("score.cloud_subset");
        require(!subset_path.empty(), Errc::ConfigError, "score.cloud_subset is not set");
        StatsAccumulator pooled(features.d);
        for (const auto& id : pipedet::load_scene_list(subset_path)) pooled.merge(stats_for(id));
        const GaussianStats reference = pooled.finalize();

        parallel_for(survivors.size(), ctx.workers, [&](std::size_t i) {
            scores[i] = frechet_distance(stats_for(survivors[i]).finalize(), reference, cfg.epsilon_reg);
        });
    }

    ScoreSet score_set;
    for (std::size_t i = 0; i < survivors.size(); ++i) score_set.insert(survivors[i], scores[i]);

    double f_literal = 0.0, f_interp = 0.0;
    bool have_threshold = false;
    if (!survivors.empty()) {
        double mn = 0.0, mx = 0.0;
        scoredet::score_range(score_set, mn, mx);
        f_literal = threshold_literal(mn, mx, cfg.beta);
        f_interp = threshold_interpolation(mn, mx, cfg.beta);
        have_threshold = true;
    }
    const double f_th = cfg.threshold_form == ThresholdForm::LiteralEq1 ? f_literal : f_interp;

    StageReport report;
    report.stage = "score";
    report.input = survivors.size();
    std::vector<FilterVerdict> verdicts;
    verdicts.reserve(survivors.size());
    for (std::size_t i = 0; i < survivors.size(); ++i) {
        verdicts.push_back(stage3_filter(survivors[i], scores[i], f_th));
        if (verdicts.back().kept)
            ++report.kept;
        else
            ++report.dropped[std::string(rule_name(Rule::FrechetScore))];
    }

    Json m;
    m["config_fingerprint"] = ctx.config.fingerprint();
    m["extractor_id"] = extractor_id;
    m["threshold_form"] = std::string(threshold_form_name(cfg.threshold_form));
    m["f_th_literal"] = have_threshold ? Json(f_literal) : Json(nullptr);
    m["f_th_interp"] = have_threshold ? Json(f_interp) : Json(nullptr);
    m["counts"] = {{"input", report.input}, {"kept", report.kept}};
    m["verdicts"] = Json::array();
    for (const auto& v : verdicts) m["verdicts"].push_back(verdict_to_json(v));
    write_json_atomic(manifest_path(ctx.out_dir, "score"), m);

    Json score_report = Json::array();
    for (std::size_t i = 0; i < survivors.size(); ++i)
        score_report.push_back({{"scene_id", survivors[i]},
                                {"score", scores[i]},
                                {"kept", verdicts[i].kept},
                                {"f_th_literal", f_literal},
                                {"f_th_interp", f_interp},
                                {"extractor_id", extractor_id}});
    write_json_atomic(ctx.out_dir / "reports" / "scores.json", score_report);

    report.wall_seconds = timer.seconds();
    write_json_atomic(report_path(ctx.out_dir, "score"), report.to_json());
    return report;
}

inline StageReport run_pair(const PipelineContext& ctx) {
    pipedet::StageTimer timer;
    const Json ingest = load_manifest(ctx.out_dir, "ingest");
    const Json filter = load_manifest(ctx.out_dir, "filter");
    const Json score = load_manifest(ctx.out_dir, "score");
    pipedet::check_fingerprint(ingest, ctx, "ingest");
    pipedet::check_fingerprint(filter, ctx, "filter");
    pipedet::check_fingerprint(score, ctx, "score");

    std::set<std::string> clean;
    for (const Json& j : score.at("verdicts"))
        if (j.at("kept").get<bool>()) clean.insert(j.at("scene_id").get<std::string>());

    std::vector<SceneRecord> clean_eo, sar;
    for (const Json& j : ingest.at("records")) {
        SceneRecord rec = record_from_json(j);
        if (rec.sensor == Sensor::SAR)
            sar.push_back(std::move(rec));
        else if (clean.count(rec.scene_id))
            clean_eo.push_back(std::move(rec));
    }

    PairManifest manifest;
    manifest.config_fingerprint = ctx.config.fingerprint();
    const std::int64_t window = ctx.config.get_int("pair.window_days");
    require(window >= 0, Errc::NegativeWindow, "pair.window_days must be nonnegative");
    const std::int64_t cap = ctx.config.get_int("pair.max_pairs_per_eo");
    require(cap >= 0, Errc::ConfigError, "pair.max_pairs_per_eo must be nonnegative");
    manifest.pairs = build_pairs(clean_eo, sar, static_cast<int>(window),
                                 static_cast<std::uint64_t>(cap));

    StageCounts& counts = manifest.stage_counts;
    for (const Json& j : filter.at("verdicts")) {
        ++counts.input;
        const Rule rule = parse_rule(j.at("rule").get<std::string>());
        if (rule == Rule::QACloud || rule == Rule::PixelThreshold) ++counts.stage1_dropped;
        if (rule == Rule::Night || rule == Rule::NoData) ++counts.stage2_dropped;
    }
    for (const Json& j : score.at("verdicts"))
        if (!j.at("kept").get<bool>()) ++counts.stage3_dropped;
    counts.kept = clean.size();
    counts.validate();

    write_json_atomic(manifest_path(ctx.out_dir, "pair"), pair_manifest_to_json(manifest));
    write_file_atomic(ctx.out_dir / "manifests" / "pairs.csv", pair_manifest_csv(manifest));

    StageReport report;
    report.stage = "pair";
    report.input = clean_eo.size();
    report.kept = clean_eo.size();
    report.wall_seconds = timer.seconds();
    write_json_atomic(report_path(ctx.out_dir, "pair"), report.to_json());
    return report;
}

inline StageReport run_prep(const PipelineContext& ctx) {
    pipedet::StageTimer timer;
    const Json ingest = load_manifest(ctx.out_dir, "ingest");
    const Json pair = load_manifest(ctx.out_dir, "pair");
    pipedet::check_fingerprint(ingest, ctx, "ingest");
    pipedet::check_fingerprint(pair, ctx, "pair");
    const std::filesystem::path root = ingest.at("root").get<std::string>();

    std::map<std::string, SceneRecord> records;
    for (const Json& j : ingest.at("records")) {
        SceneRecord rec = record_from_json(j);
        records.emplace(rec.scene_id, std::move(rec));
    }

    std::set<std::string> sar_ids;
    for (const Json& p : pair.at("pairs")) sar_ids.insert(p.at("sar").get<std::string>());
    const std::vector<std::string> ids(sar_ids.begin(), sar_ids.end());

    CustomRecipe custom;
    const SarRecipe recipe = pipedet::recipe_from_config(ctx.config, custom);
    const std::int64_t median_k = ctx.config.get_int("sar.median_k");
    require(median_k >= 3 && median_k % 2 == 1, Errc::ConfigError,
            "sar.median_k must be odd and at least 3");
    const NormalizationSpec norm_spec = pipedet::norm_from_config(ctx.config);
    const std::string vv_label = ctx.config.get_string("sar.vv_band");
    const std::string vh_label = ctx.config.get_string("sar.vh_band");

    struct PrepEntry {
        std::string tiff, preview;
        std::vector<std::size_t> degenerate;
    };
    std::vector<PrepEntry> entries(ids.size());

    parallel_for(ids.size(), ctx.workers, [&](std::size_t i) {
        auto it = records.find(ids[i]);
        require(it != records.end(), Errc::InvalidArgument, ids[i] + ": not in the ingest manifest");
        const ImageTile tile = load_tile(it->second, root);
        const int vv_idx = band_index(tile, vv_label);
        const int vh_idx = band_index(tile, vh_label);
        require(vv_idx >= 0, Errc::MissingBand, ids[i] + ": band not present: " + vv_label);
        require(vh_idx >= 0, Errc::MissingBand, ids[i] + ": band not present: " + vh_label);

        const std::size_t npx = tile.pixel_count();
        std::vector<float> vv(npx), vh(npx);
        const auto vvp = tile.plane(static_cast<std::uint32_t>(vv_idx));
        const auto vhp = tile.plane(static_cast<std::uint32_t>(vh_idx));
        for (std::size_t p = 0; p < npx; ++p) {
            vv[p] = vvp[p];
            vh[p] = vhp[p];
        }

        SarComposite composite = synthesize_3ch(vv, vh, tile.width, tile.height, recipe, custom);
        for (auto& plane : composite.image.planes)
            plane = median_blur(plane, tile.width, tile.height, static_cast<std::uint32_t>(median_k));
        NormalizeResult result = normalize(composite.image, norm_spec);

        const std::string tiff_rel = "prep/" + ids[i] + ".tif";
        const std::string preview_rel = "prep_preview/" + ids[i] + ".png";
        encode_tiff_f32(ctx.out_dir / tiff_rel, result.image);
        encode_png(ctx.out_dir / preview_rel, preview_tile(result.image));
        entries[i] = {tiff_rel, preview_rel, std::move(result.degenerate_planes)};
    });

    Json m;
    m["config_fingerprint"] = ctx.config.fingerprint();
    m["counts"] = {{"input", ids.size()}, {"kept", ids.size()}};
    m["entries"] = Json::array();
    std::uint64_t degenerate_events = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        m["entries"].push_back({{"scene_id", ids[i]},
                                {"tiff", entries[i].tiff},
                                {"preview", entries[i].preview},
                                {"degenerate_planes", entries[i].degenerate}});
        degenerate_events += entries[i].degenerate.size();
    }
    m["degenerate_plane_events"] = degenerate_events;
    write_json_atomic(manifest_path(ctx.out_dir, "prep"), m);

    StageReport report;
    report.stage = "prep";
    report.input = ids.size();
    report.kept = ids.size();
    report.wall_seconds = timer.seconds();
    write_json_atomic(report_path(ctx.out_dir, "prep"), report.to_json());
    return report;
}

inline StageReport run_translate(const PipelineContext& ctx) {
    pipedet::StageTimer timer;
    const Json prep = load_manifest(ctx.out_dir, "prep");
    pipedet::check_fingerprint(prep, ctx, "prep");

    const std::string cmd_template = ctx.config.get_string("bridge.cmd");
    require(!cmd_template.empty(), Errc::ConfigError, "bridge.cmd is not set");
    require(cmd_template.find("{in_dir}") != std::string::npos &&
                cmd_template.find("{out_dir}") != std::string::npos,
            Errc::ConfigError, "bridge.cmd must contain {in_dir} and {out_dir}");

    const std::filesystem::path in_dir = ctx.out_dir / "bridge" / "in";
    const std::filesystem::path out_dir = ctx.out_dir / "bridge" / "out";
    std::filesystem::remove_all(in_dir);
    std::filesystem::remove_all(out_dir);
    std::filesystem::create_directories(in_dir);
    std::filesystem::create_directories(out_dir);

    std::vector<std::string> ids;
    for (const Json& e : prep.at("entries")) {
        const std::string scene_id = e.at("scene_id").get<std::string>();
        std::filesystem::copy_file(ctx.out_dir / e.at("preview").get<std::string>(),
                                   in_dir / (scene_id + ".png"));
        ids.push_back(scene_id);
    }

    std::string cmd = cmd_template;
    const auto substitute = [&cmd](std::string_view tag, const std::string& value) {
        for (std::size_t pos = cmd.find(tag); pos != std::string::npos; pos = cmd.find(tag, pos))
            cmd.replace(pos, tag.size(), value), pos += value.size();
    };
    substitute("{in_dir}", in_dir.string());
    substitute("{out_dir}", out_dir.string());

    const std::filesystem::path script = ctx.out_dir / "bridge" / "run.sh";
    const std::filesystem::path log = ctx.out_dir / "bridge" / "bridge.log";
    write_file_atomic(script, cmd + "\n");
    const std::string shell = "sh '" + script.string() + "' > '" + log.string() + "' 2>&1";
    const int status = std::system(shell.c_str());
    const bool exited_ok = status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
    if (!exited_ok) {
        std::string detail = "bridge command failed";
        if (status != -1 && WIFEXITED(status))
            detail += " (exit " + std::to_string(WEXITSTATUS(status)) + ")";
        detail += "; log: " + log.string();
        raise(Errc::CommandFailed, detail);
    }

    std::vector<std::string> missing;
    Json outputs = Json::array();
    for (const auto& id : ids) {
        const std::filesystem::path f = out_dir / (id + ".png");
        if (!std::filesystem::exists(f)) {
            missing.push_back(id);
            continue;
        }
        outputs.push_back({{"scene_id", id},
                           {"file", std::filesystem::relative(f, ctx.out_dir).string()},
                           {"checksum", digest_file(f)}});
    }
    if (!missing.empty()) {
        std::string names;
        for (const auto& id : missing) names += (names.empty() ? "" : ", ") + id;
        raise(Errc::IncompleteOutputs, "bridge produced no output for: " + names);
    }

    Json m;
    m["config_fingerprint"] = ctx.config.fingerprint();
    m["cmd"] = cmd_template;
    m["in_dir"] = in_dir.string();
    m["out_dir"] = out_dir.string();
    m["log"] = log.string();
    m["outputs"] = outputs;
    write_json_atomic(manifest_path(ctx.out_dir, "translate"), m);

    StageReport report;
    report.stage = "translate";
    report.input = ids.size();
    report.kept = ids.size();
    report.wall_seconds = timer.seconds();
    write_json_atomic(report_path(ctx.out_dir, "translate"), report.to_json());
    return report;
}

struct EvalOutcome {
    Json report;
    StageReport stage_report;
};

// Grouped evaluation: the mapping file assigns every image to a query key
// and a role; the min-over-outputs runs inside each group and the totals sum
// across groups.
inline EvalOutcome run_eval(const PipelineContext& ctx) {
    pipedet::StageTimer timer;
    const std::string mapping_path = ctx.config.get_string("eval.mapping");
    const std::string outputs_dir = ctx.config.get_string("eval.outputs");
    const std::string references_dir = ctx.config.get_string("eval.references");
    require(!mapping_path.empty(), Errc::ConfigError, "eval.mapping is not set");
    require(!outputs_dir.empty(), Errc::ConfigError, "eval.outputs is not set");
    require(!references_dir.empty(), Errc::ConfigError, "eval.references is not set");
    const DistanceNorm norm = parse_distance_norm(ctx.config.get_string("eval.norm"));

    struct Group {
        std::vector<NamedImage> outputs, references;
    };
    std::map<std::string, Group> groups;
    std::size_t line_no = 0;
    for (const std::string& raw : split(read_file(mapping_path), '\n')) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split(line, ',');
        const std::string where = mapping_path + ":" + std::to_string(line_no);
        require(fields.size() == 3, Errc::DecodeError, where + ": expected query_key,role,path");
        const std::string key = trim(fields[0]);
        const std::string role = trim(fields[1]);
        const std::string rel = trim(fields[2]);
        require(!key.empty() && !rel.empty(), Errc::DecodeError, where + ": empty field");

        const std::filesystem::path base = role == "output" ? outputs_dir : references_dir;
        const std::filesystem::path full =
            std::filesystem::path(rel).is_absolute() ? std::filesystem::path(rel) : base / rel;
        if (role == "output")
            groups[key].outputs.push_back({rel, load_planar(full)});
        else if (role == "reference")
            groups[key].references.push_back({rel, load_planar(full)});
        else
            raise(Errc::DecodeError, where + ": role must be output or reference, got '" + role + "'");
    }
    require(!groups.empty(), Errc::EmptySet, mapping_path + ": no usable mapping rows");

    double total = 0.0, mae_sum = 0.0, sharp_sum = 0.0;
    std::size_t n_refs = 0, n_outputs = 0;
    Json per_reference = Json::array();
    for (const auto& [key, group] : groups) {
        require(!group.outputs.empty(), Errc::EmptySet, "query '" + key + "' has no outputs");
        require(!group.references.empty(), Errc::EmptySet, "query '" + key + "' has no references");
        const EvalReport r = eval_set(group.outputs, group.references, norm);
        total += r.total;
        mae_sum += r.mean_mae * static_cast<double>(group.references.size());
        sharp_sum += r.sharpness * static_cast<double>(group.outputs.size());
        n_refs += group.references.size();
        n_outputs += group.outputs.size();
        for (const auto& match : r.per_reference)
            per_reference.push_back({{"query_key", key},
                                     {"reference_id", match.reference_id},
                                     {"best_output_id", match.best_output_id},
                                     {"distance", match.distance}});
    }

    EvalOutcome outcome;
    outcome.report["norm"] = std::string(distance_norm_name(norm));
    outcome.report["total"] = total;
    outcome.report["mean_mae"] = mae_sum / static_cast<double>(n_refs);
    outcome.report["sharpness"] = sharp_sum / static_cast<double>(n_outputs);
    outcome.report["per_reference"] = per_reference;

    outcome.stage_report.stage = "eval";
    outcome.stage_report.input = n_refs;
    outcome.stage_report.kept = n_refs;
    outcome.stage_report.wall_seconds = timer.seconds();
    if (!ctx.out_dir.empty()) {
        write_json_atomic(ctx.out_dir / "reports" / "eval_report.json", outcome.report);
        write_json_atomic(report_path(ctx.out_dir, "eval"), outcome.stage_report.to_json());
    }
    return outcome;
}

inline std::vector<StageReport> run_range(const PipelineContext& ctx, const std::string& from,
                                          const std::string& to) {
    const auto& order = stage_order();
    const auto it_from = std::find(order.begin(), order.end(), from);
    const auto it_to = std::find(order.begin(), order.end(), to);
    require(it_from != order.end(), Errc::ConfigError, "unknown stage: " + from);
    require(it_to != order.end(), Errc::ConfigError, "unknown stage: " + to);
    require(it_from <= it_to, Errc::ConfigError, "stage range runs backwards");

    std::vector<StageReport> reports;
    for (auto it = it_from; it <= it_to; ++it) {
        const std::string& stage = *it;
        try {
            if (stage == "ingest") reports.push_back(run_ingest(ctx));
            else if (stage == "filter") reports.push_back(run_filter(ctx));
            else if (stage == "score") reports.push_back(run_score(ctx));
            else if (stage == "pair") reports.push_back(run_pair(ctx));
            else if (stage == "prep") reports.push_back(run_prep(ctx));
            else if (stage == "translate") reports.push_back(run_translate(ctx));
            else reports.push_back(run_eval(ctx).stage_report);
        } catch (const Error&) {
            throw;  // already carries scene/stage context
        } catch (const std::exception& e) {
            raise(Errc::StageFailure, stage + ": " + e.what());
        }
    }
    return reports;
}

}  // namespace sareo
