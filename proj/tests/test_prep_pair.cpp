#include <catch2/catch_amalgamated.hpp>

#include "sareo/eval_metric.hpp"
#include "sareo/pairing.hpp"
#include "sareo/sar_prep.hpp"

#include "test_support.hpp"

using namespace sareo;

namespace {

SceneRecord scene(std::string id, Sensor sensor, std::string tile, std::string date) {
    SceneRecord r;
    r.scene_id = std::move(id);
    r.sensor = sensor;
    r.tile_id = std::move(tile);
    r.date = parse_date(date);
    r.path = r.scene_id + (sensor == Sensor::SAR ? ".tif" : ".png");
    r.bands = sensor == Sensor::SAR ? std::vector<std::string>{"VV", "VH"}
                                    : std::vector<std::string>{"B4", "B3", "B2"};
    return r;
}

PlanarImage plane_image(std::uint32_t w, std::uint32_t h, std::vector<std::vector<float>> planes) {
    PlanarImage img;
    img.width = w;
    img.height = h;
    img.planes = std::move(planes);
    return img;
}

}  // namespace

TEST_CASE("composite averages the polarizations into the third channel") {
    const std::vector<float> vv = {1.0f, 2.0f, 3.0f, 4.0f};
    const std::vector<float> vh = {5.0f, 6.0f, 7.0f, 8.0f};
    const SarComposite c = synthesize_3ch(vv, vh, 2, 2);
    REQUIRE(c.image.channels() == 3);
    CHECK(c.image.planes[0] == vv);
    CHECK(c.image.planes[1] == vh);
    CHECK(c.image.planes[2][0] == 3.0f);
    CHECK(c.image.planes[2][3] == 6.0f);
}

TEST_CASE("custom composite applies per-channel linear combinations") {
    const std::vector<float> vv = {10.0f}, vh = {2.0f};
    CustomRecipe recipe;
    recipe.a = {2.0, 0.0, 1.0};
    recipe.b = {0.0, 3.0, -1.0};
    const SarComposite c = synthesize_3ch(vv, vh, 1, 1, SarRecipe::Custom, recipe);
    CHECK(c.image.planes[0][0] == 20.0f);
    CHECK(c.image.planes[1][0] == 6.0f);
    CHECK(c.image.planes[2][0] == 8.0f);
}

TEST_CASE("composite rejects mismatched or non-finite planes") {
    const std::vector<float> four(4, 1.0f), two(2, 1.0f);
    CHECK_THROWS_MATCHES(synthesize_3ch(four, two, 2, 2), Error,
                         ErrorMatcher(Errc::DimensionMismatch));
    std::vector<float> bad(4, 1.0f);
    bad[2] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_MATCHES(synthesize_3ch(bad, four, 2, 2), Error, ErrorMatcher(Errc::NonFinite));
}

TEST_CASE("median blur takes the window median with replicated edges") {
    // [[1,2,3],[4,5,6],[7,8,9]]: center window is the whole plane, median 5;
    // the corner window replicates the first row/column
    const std::vector<float> plane = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    const std::vector<float> out = median_blur(plane, 3, 3, 3);
    CHECK(out[4] == 5.0f);
    CHECK(out[0] == 2.0f);  // multiset {1,1,2, 1,1,2, 4,4,5} -> 2
    CHECK(out[8] == 8.0f);  // {5,6,6, 8,9,9, 8,9,9} -> 9? no: {5,6,6,8,9,9,8,9,9} sorted mid = 8

    // an isolated spike is removed entirely
    std::vector<float> spiky(25, 10.0f);
    spiky[12] = 1000.0f;
    const std::vector<float> smooth = median_blur(spiky, 5, 5, 3);
    for (float v : smooth) CHECK(v == 10.0f);
}

TEST_CASE("median blur validates kernel and plane size") {
    const std::vector<float> plane(16, 0.0f);
    CHECK_THROWS_MATCHES(median_blur(plane, 4, 4, 4), Error, ErrorMatcher(Errc::EvenKernel));
    CHECK_THROWS_MATCHES(median_blur(plane, 4, 4, 1), Error, ErrorMatcher(Errc::EvenKernel));
    CHECK_THROWS_MATCHES(median_blur(plane, 4, 4, 5), Error, ErrorMatcher(Errc::PlaneTooSmall));
}

TEST_CASE("min-max normalization attains both endpoints") {
    const PlanarImage img = plane_image(3, 1, {{0.0f, 5.0f, 10.0f}});
    NormalizationSpec spec;
    const NormalizeResult r = normalize(img, spec);
    CHECK(r.image.planes[0][0] == -1.0f);
    CHECK(r.image.planes[0][1] == 0.0f);
    CHECK(r.image.planes[0][2] == 1.0f);
    CHECK(r.degenerate_planes.empty());
}

TEST_CASE("a constant plane normalizes to zero and is recorded") {
    const PlanarImage img = plane_image(2, 2, {{3.0f, 3.0f, 3.0f, 3.0f}, {0.0f, 1.0f, 2.0f, 3.0f}});
    const NormalizeResult r = normalize(img, NormalizationSpec{});
    CHECK(r.degenerate_planes == std::vector<std::size_t>{0});
    for (float v : r.image.planes[0]) CHECK(v == 0.0f);
    CHECK(r.image.planes[1][0] == -1.0f);
    CHECK(r.image.planes[1][3] == 1.0f);
}

TEST_CASE("global min-max mode clamps values outside the configured range") {
    const PlanarImage img = plane_image(4, 1, {{-5.0f, 0.0f, 10.0f, 25.0f}});
    NormalizationSpec spec;
    spec.minmax_mode = MinMaxMode::GlobalFromConfig;
    spec.global_min = 0.0;
    spec.global_max = 20.0;
    const NormalizeResult r = normalize(img, spec);
    CHECK(r.image.planes[0][0] == -1.0f);  // below the range clamps
    CHECK(r.image.planes[0][1] == -1.0f);
    CHECK(r.image.planes[0][2] == 0.0f);
    CHECK(r.image.planes[0][3] == 1.0f);  // above the range clamps
}

TEST_CASE("tanh normalization is strictly inside the open interval") {
    // heavy outlier: median 3, MAD 1, argument for 1e6 capped at 8
    const PlanarImage img = plane_image(5, 1, {{1.0f, 2.0f, 3.0f, 4.0f, 1e6f}});
    NormalizationSpec spec;
    spec.variant = NormVariant::Dataset2Tanh;
    const NormalizeResult r = normalize(img, spec);
    for (float v : r.image.planes[0]) {
        CHECK(v > -1.0f);
        CHECK(v < 1.0f);
    }
    CHECK(r.image.planes[0][2] == Catch::Approx(0.0).margin(1e-7));
    CHECK(r.image.planes[0][3] == Catch::Approx(std::tanh(1.0)).margin(1e-6));
    // monotone: order preserved
    CHECK(r.image.planes[0][0] < r.image.planes[0][1]);
    CHECK(r.image.planes[0][3] < r.image.planes[0][4]);
}

TEST_CASE("preview maps the signed range onto 8 bits") {
    const PlanarImage img = plane_image(3, 1, {{-1.0f, 0.0f, 1.0f}});
    const ImageTile t = preview_tile(img);
    CHECK(t.bit_depth == 8);
    CHECK(t.pixels[0] == 0);
    CHECK(t.pixels[1] == 128);  // lround(127.5) rounds away from zero
    CHECK(t.pixels[2] == 255);
}

TEST_CASE("pairing window is inclusive at thirty days") {
    const std::vector<SceneRecord> eo = {scene("eo", Sensor::EO, "T1", "2021-06-01")};
    std::vector<SceneRecord> sar = {
        scene("sar_m31", Sensor::SAR, "T1", "2021-05-01"),  // -31
        scene("sar_m30", Sensor::SAR, "T1", "2021-05-02"),  // -30
        scene("sar_0", Sensor::SAR, "T1", "2021-06-01"),    //  0
        scene("sar_p30", Sensor::SAR, "T1", "2021-07-01"),  // +30
        scene("sar_p31", Sensor::SAR, "T1", "2021-07-02"),  // +31
    };
    const auto pairs = build_pairs(eo, sar, 30);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0].sar_scene_id == "sar_0");
    CHECK(pairs[0].day_offset == 0);
    CHECK(pairs[1].sar_scene_id == "sar_m30");
    CHECK(pairs[1].day_offset == -30);
    CHECK(pairs[2].sar_scene_id == "sar_p30");
    CHECK(pairs[2].day_offset == 30);
}

TEST_CASE("day offset is signed as SAR minus EO") {
    const std::vector<SceneRecord> eo = {scene("eo", Sensor::EO, "T1", "2021-03-27")};
    const std::vector<SceneRecord> sar = {scene("sar", Sensor::SAR, "T1", "2021-03-01")};
    const auto pairs = build_pairs(eo, sar, 30);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].day_offset == -26);
}

TEST_CASE("tiles never pair across tile ids") {
    const std::vector<SceneRecord> eo = {scene("eo", Sensor::EO, "T1", "2021-06-01")};
    const std::vector<SceneRecord> sar = {scene("sar", Sensor::SAR, "T2", "2021-06-01")};
    CHECK(build_pairs(eo, sar, 30).empty());
}

TEST_CASE("per-eo cap keeps the nearest offsets with date tiebreak") {
    const std::vector<SceneRecord> eo = {scene("eo", Sensor::EO, "T1", "2021-06-10")};
    const std::vector<SceneRecord> sar = {
        scene("sar_a", Sensor::SAR, "T1", "2021-06-05"),  // -5
        scene("sar_b", Sensor::SAR, "T1", "2021-06-15"),  // +5, later date loses the tie
        scene("sar_c", Sensor::SAR, "T1", "2021-06-11"),  // +1, nearest
    };
    const auto pairs = build_pairs(eo, sar, 30, 2);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].sar_scene_id == "sar_c");
    CHECK(pairs[1].sar_scene_id == "sar_a");
}

TEST_CASE("pair order is independent of catalog order") {
    std::vector<SceneRecord> eo = {scene("eo_b", Sensor::EO, "T2", "2021-06-02"),
                                   scene("eo_a", Sensor::EO, "T1", "2021-06-01"),
                                   scene("eo_c", Sensor::EO, "T1", "2021-07-01")};
    std::vector<SceneRecord> sar = {scene("sar_2", Sensor::SAR, "T1", "2021-06-20"),
                                    scene("sar_1", Sensor::SAR, "T1", "2021-06-05"),
                                    scene("sar_3", Sensor::SAR, "T2", "2021-06-02")};
    const auto want = build_pairs(eo, sar, 30);

    std::reverse(eo.begin(), eo.end());
    std::reverse(sar.begin(), sar.end());
    const auto got = build_pairs(eo, sar, 30);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].eo_scene_id == want[i].eo_scene_id);
        CHECK(got[i].sar_scene_id == want[i].sar_scene_id);
        CHECK(got[i].day_offset == want[i].day_offset);
    }
    // tile-major, then EO date
    CHECK(want[0].eo_scene_id == "eo_a");
    CHECK(want.back().tile_id == "T2");
}

TEST_CASE("pairing rejects a negative window and wrong sensors") {
    const std::vector<SceneRecord> eo = {scene("eo", Sensor::EO, "T1", "2021-06-01")};
    const std::vector<SceneRecord> sar = {scene("sar", Sensor::SAR, "T1", "2021-06-01")};
    CHECK_THROWS_MATCHES(build_pairs(eo, sar, -1), Error, ErrorMatcher(Errc::NegativeWindow));
    CHECK_THROWS_MATCHES(build_pairs(sar, sar, 30), Error, ErrorMatcher(Errc::InvalidArgument));
}

TEST_CASE("pairwise distance reproduces hand-computed values") {
    const PlanarImage a = plane_image(2, 1, {{0.0f, 1.0f}});
    const PlanarImage b = plane_image(2, 1, {{0.5f, 0.5f}});
    CHECK(pairwise_distance(a, b, DistanceNorm::MeanAbs) == Catch::Approx(0.5));
    CHECK(pairwise_distance(a, b, DistanceNorm::MeanSq) == Catch::Approx(0.25));
    CHECK(pairwise_distance(a, a, DistanceNorm::MeanAbs) == 0.0);
}

TEST_CASE("pairwise distance validates the domain and the shapes") {
    const PlanarImage a = plane_image(2, 1, {{0.0f, 1.5f}});
    const PlanarImage b = plane_image(2, 1, {{0.0f, 1.0f}});
    CHECK_THROWS_MATCHES(pairwise_distance(a, b, DistanceNorm::MeanAbs), Error,
                         ErrorMatcher(Errc::OutOfRange));
    const PlanarImage c = plane_image(1, 1, {{0.0f}});
    CHECK_THROWS_MATCHES(pairwise_distance(b, c, DistanceNorm::MeanAbs), Error,
                         ErrorMatcher(Errc::DimensionMismatch));
}

TEST_CASE("evaluation takes the best output per reference") {
    const std::vector<NamedImage> outputs = {{"o0", plane_image(2, 1, {{0.0f, 0.0f}})},
                                             {"o1", plane_image(2, 1, {{1.0f, 1.0f}})}};
    const std::vector<NamedImage> refs = {{"r0", plane_image(2, 1, {{0.9f, 0.9f}})},
                                          {"r1", plane_image(2, 1, {{0.1f, 0.1f}})}};
    const EvalReport r = eval_set(outputs, refs, DistanceNorm::MeanAbs);
    REQUIRE(r.per_reference.size() == 2);
    CHECK(r.per_reference[0].best_output_id == "o1");
    CHECK(r.per_reference[0].distance == Catch::Approx(0.1));
    CHECK(r.per_reference[1].best_output_id == "o0");
    CHECK(r.per_reference[1].distance == Catch::Approx(0.1));
    CHECK(r.total == Catch::Approx(0.2));
    CHECK(r.mean_mae == Catch::Approx(0.1));
}

TEST_CASE("distance ties resolve to the earliest output") {
    const std::vector<NamedImage> outputs = {{"first", plane_image(1, 1, {{0.2f}})},
                                             {"second", plane_image(1, 1, {{0.6f}})}};
    const std::vector<NamedImage> refs = {{"r", plane_image(1, 1, {{0.4f}})}};
    const EvalReport r = eval_set(outputs, refs, DistanceNorm::MeanAbs);
    CHECK(r.per_reference[0].best_output_id == "first");
}

TEST_CASE("mean mae stays absolute when scoring under the squared norm") {
    const std::vector<NamedImage> outputs = {{"o", plane_image(1, 1, {{0.0f}})}};
    const std::vector<NamedImage> refs = {{"r", plane_image(1, 1, {{0.5f}})}};
    const EvalReport r = eval_set(outputs, refs, DistanceNorm::MeanSq);
    CHECK(r.total == Catch::Approx(0.25));
    CHECK(r.mean_mae == Catch::Approx(0.5));
}

TEST_CASE("evaluation agrees with the double-loop reference") {
    SplitMix64 rng(44);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n_out = 1 + rng.below(5), n_ref = 1 + rng.below(5);
        const std::uint32_t w = 3, h = 2;
        std::vector<NamedImage> outputs;
        std::vector<NamedImage> refs;
        std::vector<std::vector<std::vector<double>>> o_raw, r_raw;
        for (std::size_t i = 0; i < n_out; ++i) {
            PlanarImage img = make_planar(w, h, 2);
            std::vector<std::vector<double>> raw(2, std::vector<double>(w * h));
            for (int c = 0; c < 2; ++c)
                for (std::size_t p = 0; p < w * h; ++p) {
                    img.planes[c][p] = static_cast<float>(rng.unit());
                    raw[c][p] = img.planes[c][p];
                }
            outputs.push_back({"o" + std::to_string(i), std::move(img)});
            o_raw.push_back(std::move(raw));
        }
        for (std::size_t j = 0; j < n_ref; ++j) {
            PlanarImage img = make_planar(w, h, 2);
            std::vector<std::vector<double>> raw(2, std::vector<double>(w * h));
            for (int c = 0; c < 2; ++c)
                for (std::size_t p = 0; p < w * h; ++p) {
                    img.planes[c][p] = static_cast<float>(rng.unit());
                    raw[c][p] = img.planes[c][p];
                }
            refs.push_back({"r" + std::to_string(j), std::move(img)});
            r_raw.push_back(std::move(raw));
        }
        for (const bool sq : {false, true}) {
            const EvalReport got =
                eval_set(outputs, refs, sq ? DistanceNorm::MeanSq : DistanceNorm::MeanAbs);
            std::vector<std::size_t> best;
            const double want = double(oracle::brute_eval(o_raw, r_raw, sq, &best));
            CHECK(got.total == Catch::Approx(want).margin(1e-12));
            for (std::size_t j = 0; j < n_ref; ++j)
                CHECK(got.per_reference[j].best_output_id == outputs[best[j]].id);
        }
    }
}

TEST_CASE("sharpness is zero for flat images and scales with edges") {
    CHECK(sharpness(make_planar(4, 4, 3, 0.5f)) == 0.0);
    // single channel [[0,1],[0,1]]: dx=1 at the left column, dy=0 everywhere
    const PlanarImage img = plane_image(2, 2, {{0.0f, 1.0f, 0.0f, 1.0f}});
    CHECK(sharpness(img) == Catch::Approx(0.5));
}

TEST_CASE("evaluation refuses empty sets") {
    const std::vector<NamedImage> none;
    const std::vector<NamedImage> one = {{"x", plane_image(1, 1, {{0.5f}})}};
    CHECK_THROWS_MATCHES(eval_set(none, one, DistanceNorm::MeanAbs), Error,
                         ErrorMatcher(Errc::EmptySet));
    CHECK_THROWS_MATCHES(eval_set(one, none, DistanceNorm::MeanAbs), Error,
                         ErrorMatcher(Errc::EmptySet));
}
