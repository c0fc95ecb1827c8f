#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <vector>

#include <unistd.h>

#include "ctfat/volume.hpp"

using namespace ctfat;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() /
                 ("ctfat_volio_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// Builds a file-format header byte-by-byte, independent of the library's
// writer, so reader tests are not round-trip tautologies.
struct RawHeader {
    std::vector<std::uint8_t> bytes = std::vector<std::uint8_t>(348, 0);

    void put_i32(std::size_t off, std::int32_t v) { std::memcpy(&bytes[off], &v, 4); }
    void put_i16(std::size_t off, std::int16_t v) { std::memcpy(&bytes[off], &v, 2); }
    void put_f32(std::size_t off, float v) { std::memcpy(&bytes[off], &v, 4); }

    RawHeader(int nx, int ny, int nz, std::int16_t datatype, std::int16_t bitpix,
              float slope = 1.0f, float inter = 0.0f, float vox_offset = 352.0f) {
        put_i32(0, 348);
        put_i16(40, 3); // dim[0]
        put_i16(42, static_cast<std::int16_t>(nx));
        put_i16(44, static_cast<std::int16_t>(ny));
        put_i16(46, static_cast<std::int16_t>(nz));
        for (std::size_t k = 4; k < 8; ++k) put_i16(40 + 2 * k, 1);
        put_i16(70, datatype);
        put_i16(72, bitpix);
        put_f32(80, 1.0f); // pixdim[1..3]
        put_f32(84, 1.0f);
        put_f32(88, 1.0f);
        put_f32(108, vox_offset);
        put_f32(112, slope);
        put_f32(116, inter);
        bytes[344] = 'n';
        bytes[345] = '+';
        bytes[346] = '1';
        bytes[347] = 0;
    }
};

fs::path write_raw(const std::string& name, const RawHeader& hdr,
                   const void* data, std::size_t nbytes) {
    const fs::path path = test_dir() / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(hdr.bytes.data()),
              static_cast<std::streamsize>(hdr.bytes.size()));
    float vox_offset = 0.0f;
    std::memcpy(&vox_offset, &hdr.bytes[108], 4);
    const std::size_t pad = static_cast<std::size_t>(vox_offset) - 348;
    const std::vector<char> zeros(pad, 0);
    out.write(zeros.data(), static_cast<std::streamsize>(pad));
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(nbytes));
    return path;
}

} // namespace

TEST_CASE("slice selector parsing and resolution") {
    CHECK(SliceSelector::parse("all").mode == SliceSelector::Mode::All);
    CHECK(SliceSelector::parse("4").z_start == 4);
    auto range = SliceSelector::parse("2:7");
    CHECK(range.z_start == 2);
    CHECK(range.z_end == 7);

    CHECK_THROWS_AS(SliceSelector::parse(""), InvalidConfig);
    CHECK_THROWS_AS(SliceSelector::parse("x"), InvalidConfig);
    CHECK_THROWS_AS(SliceSelector::parse("3:"), InvalidConfig);
    CHECK_THROWS_AS(SliceSelector::parse("5:2"), InvalidConfig);

    CHECK(SliceSelector::all().resolve(10) == std::pair<int, int>{0, 9});
    CHECK(SliceSelector::single(3).resolve(10) == std::pair<int, int>{3, 3});
    CHECK(SliceSelector::range(2, 5).resolve(10) == std::pair<int, int>{2, 5});
    CHECK_THROWS_AS(SliceSelector::single(10).resolve(10), IndexOutOfRange);
    CHECK_THROWS_AS(SliceSelector::single(-1).resolve(10), IndexOutOfRange);
    CHECK_THROWS_AS(SliceSelector::range(5, 12).resolve(10), IndexOutOfRange);
}

TEST_CASE("reader decodes a hand-built int16 file") {
    // 3x2x1 voxels with distinct values, including the int16 extremes.
    const std::int16_t vox[6] = {-32768, -1000, 0, 40, 1234, 32767};
    RawHeader hdr(3, 2, 1, /*datatype int16*/ 4, 16);
    hdr.put_f32(80, 0.75f);
    hdr.put_f32(84, 1.5f);
    hdr.put_f32(88, 3.0f);
    const auto path = write_raw("hand_int16.nii", hdr, vox, sizeof(vox));

    const HuVolume vol = load_volume(path);
    CHECK(vol.shape == GridShape{3, 2, 1});
    CHECK(vol.spacing.x == doctest::Approx(0.75));
    CHECK(vol.spacing.y == doctest::Approx(1.5));
    CHECK(vol.spacing.z == doctest::Approx(3.0));
    for (int i = 0; i < 6; ++i) CHECK(vol.data[i] == vox[i]);
    CHECK(vol.at(0, 0, 0) == -32768);
    CHECK(vol.at(2, 1, 0) == 32767);
}

TEST_CASE("reader honors vox_offset padding") {
    const std::int16_t vox[4] = {7, -7, 11, -11};
    RawHeader hdr(2, 2, 1, 4, 16, 1.0f, 0.0f, /*vox_offset*/ 400.0f);
    const auto path = write_raw("padded.nii", hdr, vox, sizeof(vox));
    const HuVolume vol = load_volume(path);
    CHECK(vol.data == std::vector<std::int16_t>{7, -7, 11, -11});
}

TEST_CASE("reader applies scl_slope and scl_inter") {
    const std::int16_t vox[4] = {0, 1, 2, 3};
    RawHeader hdr(2, 2, 1, 4, 16, /*slope*/ 2.0f, /*inter*/ -3.0f);
    const auto path = write_raw("scaled.nii", hdr, vox, sizeof(vox));
    const HuVolume vol = load_volume(path);
    CHECK(vol.data == std::vector<std::int16_t>{-3, -1, 1, 3});
}

TEST_CASE("reader converts integral float voxels") {
    const float vox[4] = {-1000.0f, 0.0f, 40.0f, -150.0f};
    RawHeader hdr(2, 2, 1, /*float32*/ 16, 32);
    const auto path = write_raw("float_ok.nii", hdr, vox, sizeof(vox));
    const HuVolume vol = load_volume(path);
    CHECK(vol.data == std::vector<std::int16_t>{-1000, 0, 40, -150});
}

TEST_CASE("reader rejects lossy conversions") {
    SUBCASE("fractional float voxel") {
        const float vox[1] = {100.5f};
        RawHeader hdr(1, 1, 1, 16, 32);
        const auto path = write_raw("float_frac.nii", hdr, vox, sizeof(vox));
        CHECK_THROWS_AS(load_volume(path), UnsupportedDatatype);
    }
    SUBCASE("fractional scaling of an integer voxel") {
        const std::int16_t vox[1] = {3};
        RawHeader hdr(1, 1, 1, 4, 16, 0.5f, 0.0f);
        const auto path = write_raw("half_scale.nii", hdr, vox, sizeof(vox));
        CHECK_THROWS_AS(load_volume(path), UnsupportedDatatype);
    }
    SUBCASE("uint16 voxel beyond int16 range") {
        const std::uint16_t vox[1] = {40000};
        RawHeader hdr(1, 1, 1, /*uint16*/ 512, 16);
        const auto path = write_raw("u16_overflow.nii", hdr, vox, sizeof(vox));
        CHECK_THROWS_AS(load_volume(path), UnsupportedDatatype);
    }
    SUBCASE("non-finite float voxel") {
        const float vox[1] = {std::numeric_limits<float>::quiet_NaN()};
        RawHeader hdr(1, 1, 1, 16, 32);
        const auto path = write_raw("nan.nii", hdr, vox, sizeof(vox));
        CHECK_THROWS_AS(load_volume(path), UnsupportedDatatype);
    }
    SUBCASE("unknown datatype code") {
        const std::int16_t vox[1] = {0};
        RawHeader hdr(1, 1, 1, /*complex64*/ 32, 64);
        const auto path = write_raw("complex.nii", hdr, vox, sizeof(vox));
        CHECK_THROWS_AS(load_volume(path), UnsupportedDatatype);
    }
}

TEST_CASE("reader rejects malformed headers") {
    const std::int16_t vox[1] = {0};

    SUBCASE("byte-swapped header") {
        RawHeader hdr(1, 1, 1, 4, 16);
        hdr.bytes[0] = 0;
        hdr.bytes[1] = 0;
        hdr.bytes[2] = 1;
        hdr.bytes[3] = 0x5c; // 348 big-endian
        const auto path = write_raw("bigendian.nii", hdr, vox, sizeof(vox));
        CHECK_THROWS_AS(load_volume(path), MalformedHeader);
        CHECK_THROWS_WITH_AS(load_volume(path),
                             doctest::Contains("big-endian"), MalformedHeader);
    }
    SUBCASE("wrong magic") {
        RawHeader hdr(1, 1, 1, 4, 16);
        hdr.bytes[344] = 'x';
        const auto path = write_raw("nomagic.nii", hdr, vox, sizeof(vox));
        CHECK_THROWS_AS(load_volume(path), MalformedHeader);
    }
    SUBCASE("two-file magic") {
        RawHeader hdr(1, 1, 1, 4, 16);
        hdr.bytes[344] = 'n';
        hdr.bytes[345] = 'i';
        hdr.bytes[346] = '1';
        const auto path = write_raw("pair.nii", hdr, vox, sizeof(vox));
        CHECK_THROWS_AS(load_volume(path), MalformedHeader);
    }
    SUBCASE("bitpix inconsistent with datatype") {
        RawHeader hdr(1, 1, 1, 4, 32);
        const auto path = write_raw("badbitpix.nii", hdr, vox, sizeof(vox));
        CHECK_THROWS_AS(load_volume(path), MalformedHeader);
    }
    SUBCASE("truncated voxel data") {
        RawHeader hdr(4, 4, 1, 4, 16);
        const std::int16_t few[2] = {1, 2};
        const auto path = write_raw("short.nii", hdr, few, sizeof(few));
        CHECK_THROWS_AS(load_volume(path), MalformedHeader);
    }
    SUBCASE("4th dimension present") {
        RawHeader hdr(2, 2, 1, 4, 16);
        hdr.put_i16(40, 4); // dim[0] = 4
        hdr.put_i16(48, 3); // dim[4] = 3
        const std::int16_t many[12] = {};
        const auto path = write_raw("fourd.nii", hdr, many, sizeof(many));
        CHECK_THROWS_AS(load_volume(path), MalformedHeader);
    }
}

TEST_CASE("missing file throws FileNotFound") {
    CHECK_THROWS_AS(load_volume(test_dir() / "does_not_exist.nii"), FileNotFound);
    CHECK_THROWS_AS(load_mask(test_dir() / "does_not_exist.nii"), FileNotFound);
}

TEST_CASE("volume round-trips through plain and gzip files") {
    std::mt19937 rng(20260818);
    std::uniform_int_distribution<int> dim(1, 24);
    std::uniform_int_distribution<int> val(-32768, 32767);
    std::uniform_real_distribution<float> space(0.1f, 5.0f);

    for (int trial = 0; trial < 12; ++trial) {
        HuVolume vol(GridShape{dim(rng), dim(rng), dim(rng)},
                     Spacing{space(rng), space(rng), space(rng)});
        for (auto& v : vol.data) v = static_cast<std::int16_t>(val(rng));

        for (const char* ext : {".nii", ".nii.gz"}) {
            const auto path =
                test_dir() / ("rt_" + std::to_string(trial) + ext);
            save_volume(vol, path);
            const HuVolume back = load_volume(path);
            CHECK(back.shape == vol.shape);
            CHECK(back.data == vol.data);
            // Spacing survives at 32-bit float precision.
            CHECK(static_cast<float>(back.spacing.x) ==
                  static_cast<float>(vol.spacing.x));
            CHECK(static_cast<float>(back.spacing.y) ==
                  static_cast<float>(vol.spacing.y));
            CHECK(static_cast<float>(back.spacing.z) ==
                  static_cast<float>(vol.spacing.z));
        }
    }
}

TEST_CASE("gzip output is actually gzip") {
    HuVolume vol(GridShape{64, 64, 2}, Spacing{}, -1000);
    const auto gz_path = test_dir() / "comp.nii.gz";
    const auto plain_path = test_dir() / "comp.nii";
    save_volume(vol, gz_path);
    save_volume(vol, plain_path);

    std::ifstream in(gz_path, std::ios::binary);
    unsigned char magic[2] = {0, 0};
    in.read(reinterpret_cast<char*>(magic), 2);
    CHECK(magic[0] == 0x1f);
    CHECK(magic[1] == 0x8b);
    // Constant volume compresses far below the raw payload.
    CHECK(fs::file_size(gz_path) < fs::file_size(plain_path) / 4);
}

TEST_CASE("mask round-trip and validation") {
    BinaryMask mask(GridShape{9, 7, 3}, Spacing{2, 2, 2});
    std::mt19937 rng(7);
    for (auto& v : mask.data)
        v = (rng() & 1) ? BinaryMask::kForeground : 0;

    for (const char* ext : {".nii", ".nii.gz"}) {
        const auto path = test_dir() / (std::string("mask_rt") + ext);
        save_mask(mask, path);
        const BinaryMask back = load_mask(path);
        CHECK(back.shape == mask.shape);
        CHECK(back.data == mask.data);
    }

    SUBCASE("mask with stray values is rejected") {
        const std::uint8_t bad[4] = {0, 255, 7, 0};
        RawHeader hdr(2, 2, 1, /*uint8*/ 2, 8);
        const auto path = write_raw("badmask.nii", hdr, bad, sizeof(bad));
        CHECK_THROWS_AS(load_mask(path), InvalidMaskValue);
    }
    SUBCASE("mask with wrong datatype is rejected") {
        const std::int16_t bad[1] = {255};
        RawHeader hdr(1, 1, 1, 4, 16);
        const auto path = write_raw("int16mask.nii", hdr, bad, sizeof(bad));
        CHECK_THROWS_AS(load_mask(path), UnsupportedDatatype);
    }
    SUBCASE("mask with rescaling is rejected") {
        const std::uint8_t ok[1] = {255};
        RawHeader hdr(1, 1, 1, 2, 8, 2.0f, 0.0f);
        const auto path = write_raw("scaledmask.nii", hdr, ok, sizeof(ok));
        CHECK_THROWS_AS(load_mask(path), UnsupportedDatatype);
    }
}

TEST_CASE("uint8 volume loads as HU values") {
    const std::uint8_t vox[4] = {0, 1, 128, 255};
    RawHeader hdr(2, 2, 1, 2, 8);
    const auto path = write_raw("u8vol.nii", hdr, vox, sizeof(vox));
    const HuVolume vol = load_volume(path);
    CHECK(vol.data == std::vector<std::int16_t>{0, 1, 128, 255});
}

TEST_CASE("save rejects unwritable destinations") {
    HuVolume vol(GridShape{2, 2, 1}, Spacing{});
    CHECK_THROWS_AS(save_volume(vol, test_dir() / "no_dir" / "x.nii"), IoError);
    BinaryMask mask(GridShape{2, 2, 1}, Spacing{});
    CHECK_THROWS_AS(save_mask(mask, test_dir() / "no_dir" / "m.nii"), IoError);
}

TEST_CASE("extract_slices copies the selected range") {
    HuVolume vol(GridShape{4, 3, 5}, Spacing{1, 1, 2});
    for (int z = 0; z < 5; ++z)
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 4; ++x)
                vol.at(x, y, z) = static_cast<std::int16_t>(100 * z + 10 * y + x);

    const HuVolume one = extract_slices(vol, SliceSelector::single(2));
    CHECK(one.shape == GridShape{4, 3, 1});
    CHECK(one.at(3, 2, 0) == 223);
    CHECK(one.spacing == vol.spacing);

    const HuVolume mid = extract_slices(vol, SliceSelector::range(1, 3));
    CHECK(mid.shape.nz == 3);
    CHECK(mid.at(0, 0, 0) == 100);
    CHECK(mid.at(0, 0, 2) == 300);

    const HuVolume all = extract_slices(vol, SliceSelector::all());
    CHECK(all.data == vol.data);

    CHECK_THROWS_AS(extract_slices(vol, SliceSelector::single(5)), IndexOutOfRange);
}
