#include <catch2/catch_amalgamated.hpp>

#include "sareo/raster_io.hpp"

#include "test_support.hpp"

using namespace sareo;

namespace {

ImageTile random_tile(std::uint32_t w, std::uint32_t h, std::uint32_t bands, std::uint8_t depth,
                      std::uint64_t seed) {
    SplitMix64 rng(seed);
    ImageTile t;
    t.width = w;
    t.height = h;
    t.bands = bands;
    t.bit_depth = depth;
    t.pixels.resize(std::size_t(w) * h * bands);
    const std::uint64_t cap = depth == 8 ? 256 : 65536;
    for (auto& p : t.pixels) p = static_cast<std::uint16_t>(rng.below(cap));
    return t;
}

void check_equal(const ImageTile& a, const ImageTile& b) {
    REQUIRE(a.width == b.width);
    REQUIRE(a.height == b.height);
    REQUIRE(a.bands == b.bands);
    REQUIRE(a.bit_depth == b.bit_depth);
    CHECK(a.pixels == b.pixels);
}

}  // namespace

TEST_CASE("png round-trips 8- and 16-bit tiles") {
    const auto dir = testsup::scratch_dir("png");
    for (const auto& [bands, depth] : std::vector<std::pair<std::uint32_t, std::uint8_t>>{
             {1, 8}, {3, 8}, {3, 16}, {4, 16}}) {
        const ImageTile t = random_tile(13, 9, bands, depth, 1000 + bands * 10 + depth);
        const auto path = dir / ("t" + std::to_string(bands) + "_" + std::to_string(depth) + ".png");
        encode_png(path, t);
        check_equal(decode_png(path), t);
    }
}

TEST_CASE("tiff round-trips integer tiles with and without compression") {
    const auto dir = testsup::scratch_dir("tiff");
    for (const bool deflate : {false, true}) {
        const ImageTile t8 = random_tile(11, 7, 1, 8, 2001);
        const ImageTile t16 = random_tile(16, 16, 3, 16, 2002);
        const auto p8 = dir / (deflate ? "a8z.tif" : "a8.tif");
        const auto p16 = dir / (deflate ? "a16z.tif" : "a16.tif");
        encode_tiff(p8, t8, deflate);
        encode_tiff(p16, t16, deflate);
        check_equal(load_raster(p8), t8);
        check_equal(load_raster(p16), t16);
    }
}

TEST_CASE("float tiff stores planes bit-exactly") {
    const auto dir = testsup::scratch_dir("tiff_f32");
    PlanarImage img = make_planar(6, 4, 3);
    SplitMix64 rng(3001);
    for (auto& plane : img.planes)
        for (auto& v : plane) v = static_cast<float>(rng.unit() * 2.0 - 1.0);
    encode_tiff_f32(dir / "f.tif", img);

    const PlanarImage back = load_planar(dir / "f.tif");
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    REQUIRE(back.channels() == 3);
    for (std::size_t c = 0; c < 3; ++c) CHECK(back.planes[c] == img.planes[c]);

    // an integer tile cannot come back from a float file
    CHECK_THROWS_MATCHES(load_raster(dir / "f.tif"), Error, ErrorMatcher(Errc::DecodeError));
}

TEST_CASE("tiff reader accepts separate-plane layout") {
    // hand-built 2x2, 2-channel, 8-bit file, PlanarConfiguration = 2: one
    // strip per plane, offset/count arrays in an overflow area past the IFD
    tiffdet::Builder b;
    b.u16(0x4949);
    b.u16(42);
    b.u32(16);  // IFD offset
    const std::uint8_t strips[8] = {1, 2, 3, 4, 5, 6, 7, 8};  // plane 0 at 8, plane 1 at 12
    b.raw(strips, 8);
    // IFD: 2 + 10*12 + 4 = 126 bytes, so overflow arrays start at 142
    const std::uint32_t offsets_off = 142, counts_off = 150;
    b.u16(10);
    const auto entry = [&](std::uint16_t tag, std::uint16_t type, std::uint32_t count,
                           std::uint32_t value) {
        b.u16(tag);
        b.u16(type);
        b.u32(count);
        if (type == 3 && count == 1) {
            b.u16(static_cast<std::uint16_t>(value));
            b.u16(0);
        } else {
            b.u32(value);
        }
    };
    entry(256, 4, 1, 2);            // width
    entry(257, 4, 1, 2);            // height
    entry(258, 3, 1, 8);            // bits per sample
    entry(259, 3, 1, 1);            // no compression
    entry(262, 3, 1, 1);            // photometric
    entry(273, 4, 2, offsets_off);  // two strip offsets, stored out of line
    entry(277, 3, 1, 2);            // samples per pixel
    entry(278, 4, 1, 2);            // rows per strip = full height
    entry(279, 4, 2, counts_off);   // two strip byte counts
    entry(284, 3, 1, 2);            // planar configuration: separate
    b.u32(0);
    b.u32(8);   // plane 0 strip offset
    b.u32(12);  // plane 1 strip offset
    b.u32(4);   // plane 0 byte count
    b.u32(4);   // plane 1 byte count

    const auto dir = testsup::scratch_dir("tiff_planar");
    write_file_atomic(dir / "planar.tif", b.bytes);
    const ImageTile t = load_raster(dir / "planar.tif");
    REQUIRE(t.bands == 2);
    CHECK(t.pixels == std::vector<std::uint16_t>{1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("tiff reader byte-swaps big-endian files") {
    // minimal MM file: 2x1, one 16-bit channel, values 0x0102 and 0x0304
    std::string bytes;
    const auto be16 = [&](std::uint16_t v) {
        bytes.push_back(static_cast<char>(v >> 8));
        bytes.push_back(static_cast<char>(v & 0xff));
    };
    const auto be32 = [&](std::uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) bytes.push_back(static_cast<char>((v >> s) & 0xff));
    };
    bytes += "MM";
    be16(42);
    be32(12);      // IFD right after the 4-byte strip
    be16(0x0102);  // pixel 0
    be16(0x0304);  // pixel 1
    be16(9);       // entry count
    const auto entry = [&](std::uint16_t tag, std::uint16_t type, std::uint32_t count,
                           std::uint32_t value) {
        be16(tag);
        be16(type);
        be32(count);
        if (type == 3) {
            be16(static_cast<std::uint16_t>(value));
            be16(0);
        } else {
            be32(value);
        }
    };
    entry(256, 4, 1, 2);
    entry(257, 4, 1, 1);
    entry(258, 3, 1, 16);
    entry(259, 3, 1, 1);
    entry(262, 3, 1, 1);
    entry(273, 4, 1, 8);
    entry(277, 3, 1, 1);
    entry(278, 4, 1, 1);
    entry(279, 4, 1, 4);
    be32(0);

    const auto dir = testsup::scratch_dir("tiff_mm");
    write_file_atomic(dir / "mm.tif", bytes);
    const ImageTile t = load_raster(dir / "mm.tif");
    REQUIRE(t.bands == 1);
    REQUIRE(t.bit_depth == 16);
    CHECK(t.pixels == std::vector<std::uint16_t>{0x0102, 0x0304});
}

TEST_CASE("tiff reader rejects damaged input") {
    const auto dir = testsup::scratch_dir("tiff_bad");
    write_file_atomic(dir / "short.tif", "II*");
    CHECK_THROWS_MATCHES(load_raster(dir / "short.tif"), Error, ErrorMatcher(Errc::DecodeError));
    write_file_atomic(dir / "magic.tif", std::string("XX\x2a\x00\x08\x00\x00\x00", 8));
    CHECK_THROWS_MATCHES(load_raster(dir / "magic.tif"), Error, ErrorMatcher(Errc::DecodeError));
}

TEST_CASE("load_tile attaches catalog band labels and checks the count") {
    const auto dir = testsup::scratch_dir("load_tile");
    const ImageTile t = random_tile(8, 8, 2, 16, 4001);
    encode_tiff(dir / "sar.tif", t);

    SceneRecord rec;
    rec.scene_id = "sar_1";
    rec.sensor = Sensor::SAR;
    rec.tile_id = "T1";
    rec.date = parse_date("2021-01-01");
    rec.path = "sar.tif";
    rec.bands = {"VV", "VH"};
    const ImageTile loaded = load_tile(rec, dir);
    CHECK(loaded.band_labels == rec.bands);
    CHECK(band_index(loaded, "VH") == 1);
    CHECK(band_index(loaded, "QA60") == -1);

    rec.bands = {"VV", "VH", "EXTRA"};
    CHECK_THROWS_MATCHES(load_tile(rec, dir), Error, ErrorMatcher(Errc::BandCountMismatch));
}

TEST_CASE("band extraction and removal preserve plane contents") {
    ImageTile t = random_tile(4, 4, 3, 16, 5001);
    t.band_labels = {"B4", "B3", "B2"};
    const ImageTile b3 = extract_band(t, 1);
    REQUIRE(b3.bands == 1);
    CHECK(std::equal(b3.pixels.begin(), b3.pixels.end(), t.plane(1).begin()));
    CHECK(b3.band_labels == std::vector<std::string>{"B3"});

    const ImageTile rest = drop_band(t, 1);
    REQUIRE(rest.bands == 2);
    CHECK(rest.band_labels == std::vector<std::string>{"B4", "B2"});
    CHECK(std::equal(rest.plane(0).begin(), rest.plane(0).end(), t.plane(0).begin()));
    CHECK(std::equal(rest.plane(1).begin(), rest.plane(1).end(), t.plane(2).begin()));
}

TEST_CASE("integer rasters load as unit-interval planes") {
    const auto dir = testsup::scratch_dir("planar_scale");
    ImageTile t;
    t.width = 2;
    t.height = 1;
    t.bands = 1;
    t.bit_depth = 8;
    t.pixels = {0, 255};
    encode_png(dir / "u8.png", t);
    const PlanarImage img = load_planar(dir / "u8.png");
    CHECK(img.planes[0][0] == 0.0f);
    CHECK(img.planes[0][1] == 1.0f);

    t.bit_depth = 16;
    t.pixels = {0, 65535};
    encode_tiff(dir / "u16.tif", t);
    const PlanarImage img16 = load_planar(dir / "u16.tif");
    CHECK(img16.planes[0][1] == 1.0f);
}
