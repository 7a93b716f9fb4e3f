#include <png.h>

#include <cstring>

#include "doctest.h"
#include "mlbc/binio.hpp"
#include "mlbc/image_io.hpp"
#include "testutil.hpp"

using namespace mlbc;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) {
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

}  // namespace

TEST_CASE("PBM round trip across sizes") {
    std::mt19937_64 rng(21);
    for (int w : {1, 7, 8, 9, 31, 64}) {
        for (int h : {1, 2, 17}) {
            BinaryImage img = mlbc::test::random_binary_image(rng, w, h);
            BinaryImage back = decode_pbm(encode_pbm(img));
            CHECK(back == img);
        }
    }
}

TEST_CASE("PNM parsing: ASCII PBM with comments") {
    BinaryImage p1 = decode_pbm(bytes_of("P1\n# comment\n3 2\n1 0 1\n0 1 0\n"));
    CHECK(p1.width == 3);
    CHECK(p1.height == 2);
    CHECK(p1.at(0, 0) == 1);
    CHECK(p1.at(1, 0) == 0);
    CHECK(p1.at(2, 1) == 0);
}

TEST_CASE("PGM and PPM files load as gray") {
    mlbc::test::TempDir tmp("pnm");

    GrayImage g;
    g.width = 5;
    g.height = 3;
    g.pixels = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120, 130, 140};
    write_pgm(tmp.path() / "a.pgm", g);
    auto loaded = load_image(tmp.path() / "a.pgm");
    CHECK(std::get<GrayImage>(loaded).pixels == g.pixels);

    // P2 with maxval 100 scales to 0..255.
    std::string p2 = "P2\n2 1\n100\n0 100\n";
    write_file(tmp.path() / "b.pgm", bytes_of(p2));
    GrayImage b = std::get<GrayImage>(load_image(tmp.path() / "b.pgm"));
    CHECK(b.pixels[0] == 0);
    CHECK(b.pixels[1] == 255);

    // P3 color goes through luma.
    std::string p3 = "P3\n1 1\n255\n255 0 0\n";
    write_file(tmp.path() / "c.ppm", bytes_of(p3));
    GrayImage c = std::get<GrayImage>(load_image(tmp.path() / "c.ppm"));
    CHECK(c.pixels[0] == 76);

    std::string p6 = "P6\n2 1\n255\n";
    p6 += '\0';
    p6 += '\0';
    p6 += '\0';
    p6 += static_cast<char>(255);
    p6 += static_cast<char>(255);
    p6 += static_cast<char>(255);
    write_file(tmp.path() / "d.ppm", bytes_of(p6));
    GrayImage d = std::get<GrayImage>(load_image(tmp.path() / "d.ppm"));
    CHECK(d.pixels[0] == 0);
    CHECK(d.pixels[1] == 255);
}

TEST_CASE("PNM error paths") {
    CHECK_THROWS_AS(decode_pbm(bytes_of("P4\n8 4\n")), TruncationError);
    CHECK_THROWS_AS(decode_pbm(bytes_of("P7\n1 1\n")), FormatError);
    CHECK_THROWS_AS(decode_pbm(bytes_of("garbage")), FormatError);
    CHECK_THROWS_AS(decode_pbm(bytes_of("P5\n2 2\n70000\n....")), FormatError);

    // Dimension bombs must fail before allocating the pixel buffer.
    CHECK_THROWS_AS(decode_pbm(bytes_of("P4\n999999999 999999999\n")), TruncationError);
    CHECK_THROWS_AS(decode_pbm(bytes_of("P1\n999999999 999999999\n1")), TruncationError);
    CHECK_THROWS_AS(decode_pbm(bytes_of("P5\n999999999 999999999\n255\nxx")), TruncationError);

    // Exactly one byte short of the declared payload.
    std::string p5 = "P5\n4 2\n255\n1234567";
    CHECK_THROWS_AS(decode_pbm(bytes_of(p5)), TruncationError);
}

TEST_CASE("PNG files load through the gray path") {
    mlbc::test::TempDir tmp("png");
    std::filesystem::path path = tmp.path() / "img.png";

    const int w = 9, h = 5;
    std::vector<std::uint8_t> rgb(3 * w * h);
    std::mt19937_64 rng(5);
    for (auto& v : rgb) v = static_cast<std::uint8_t>(rng() % 256);

    png_image out;
    std::memset(&out, 0, sizeof(out));
    out.version = PNG_IMAGE_VERSION;
    out.width = w;
    out.height = h;
    out.format = PNG_FORMAT_RGB;
    REQUIRE(png_image_write_to_file(&out, path.string().c_str(), 0, rgb.data(), 0, nullptr) != 0);

    GrayImage loaded = std::get<GrayImage>(load_image(path));
    GrayImage expected = to_gray(rgb, w, h);
    CHECK(loaded.pixels == expected.pixels);
    CHECK(loaded.width == w);
    CHECK(loaded.height == h);

    BinaryImage bin = load_binary(path);
    CHECK(bin == binarize(expected));
}
