#include "mlbc/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <string>

#include "mlbc/binio.hpp"

namespace mlbc {

namespace {

// --- PNM parsing ----------------------------------------------------------

struct PnmCursor {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0;

    bool eof() const { return pos >= data.size(); }
    int peek() const { return eof() ? -1 : data[pos]; }
    int get() { return eof() ? -1 : data[pos++]; }

    // Skips whitespace and '#' comments between header tokens.
    void skip_separators() {
        while (!eof()) {
            int c = peek();
            if (std::isspace(c)) {
                ++pos;
            } else if (c == '#') {
                while (!eof() && get() != '\n') {
                }
            } else {
                break;
            }
        }
    }

    int read_int() {
        skip_separators();
        if (eof() || !std::isdigit(peek())) throw FormatError("PNM: expected integer in header");
        long v = 0;
        while (!eof() && std::isdigit(peek())) {
            v = v * 10 + (get() - '0');
            if (v > 1'000'000'000L) throw FormatError("PNM: header value out of range");
        }
        return static_cast<int>(v);
    }
};

BinaryImage parse_pbm(PnmCursor& cur, bool ascii) {
    int w = cur.read_int();
    int h = cur.read_int();
    if (w < 1 || h < 1) throw FormatError("PBM: invalid dimensions");
    std::size_t pixels = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    std::size_t remaining = cur.data.size() - cur.pos;

    BinaryImage img;
    img.width = w;
    img.height = h;
    if (ascii) {
        // Each pixel needs at least one character; bound before allocating.
        if (pixels > remaining) throw TruncationError("PBM: pixel data truncated");
        img.bits.resize(pixels);
        for (std::size_t i = 0; i < img.bits.size(); ++i) {
            cur.skip_separators();
            int c = cur.get();
            if (c != '0' && c != '1') throw TruncationError("PBM: missing pixel data");
            img.bits[i] = static_cast<std::uint8_t>(c - '0');
        }
    } else {
        int c = cur.get();
        if (c < 0 || !std::isspace(c)) throw FormatError("PBM: bad header terminator");
        std::size_t row_bytes = (static_cast<std::size_t>(w) + 7) / 8;
        if ((cur.data.size() - cur.pos) / row_bytes < static_cast<std::size_t>(h))
            throw TruncationError("PBM: pixel data truncated");
        img.bits.resize(pixels);
        for (int y = 0; y < h; ++y) {
            const std::uint8_t* row = cur.data.data() + cur.pos + static_cast<std::size_t>(y) * row_bytes;
            for (int x = 0; x < w; ++x) img.set(x, y, (row[x / 8] >> (7 - x % 8)) & 1u);
        }
        cur.pos += row_bytes * h;
    }
    return img;
}

GrayImage parse_pgm_ppm(PnmCursor& cur, bool color, bool ascii) {
    int w = cur.read_int();
    int h = cur.read_int();
    int maxval = cur.read_int();
    if (w < 1 || h < 1) throw FormatError("PNM: invalid dimensions");
    if (maxval < 1 || maxval > 255) throw FormatError("PNM: unsupported maxval (must be 1..255)");

    std::size_t samples =
        static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * (color ? 3 : 1);
    // Each sample needs at least one byte; bound before allocating.
    if (samples > cur.data.size() - cur.pos) throw TruncationError("PNM: pixel data truncated");
    std::vector<std::uint8_t> raw(samples);
    if (ascii) {
        for (std::size_t i = 0; i < samples; ++i) {
            int v = cur.read_int();
            if (v > maxval) throw FormatError("PNM: sample exceeds maxval");
            raw[i] = static_cast<std::uint8_t>(v * 255 / maxval);
        }
    } else {
        int c = cur.get();
        if (c < 0 || !std::isspace(c)) throw FormatError("PNM: bad header terminator");
        if (cur.data.size() - cur.pos < samples) throw TruncationError("PNM: pixel data truncated");
        for (std::size_t i = 0; i < samples; ++i) {
            std::uint8_t v = cur.data[cur.pos + i];
            raw[i] = maxval == 255 ? v : static_cast<std::uint8_t>(v * 255 / maxval);
        }
        cur.pos += samples;
    }

    if (color) return to_gray(raw, w, h);
    GrayImage img;
    img.width = w;
    img.height = h;
    img.pixels = std::move(raw);
    return img;
}

LoadedImage parse_pnm(std::span<const std::uint8_t> data) {
    PnmCursor cur{data};
    if (data.size() < 2 || cur.get() != 'P') throw FormatError("PNM: missing magic");
    int kind = cur.get();
    switch (kind) {
        case '1': return parse_pbm(cur, /*ascii=*/true);
        case '4': return parse_pbm(cur, /*ascii=*/false);
        case '2': return parse_pgm_ppm(cur, /*color=*/false, /*ascii=*/true);
        case '5': return parse_pgm_ppm(cur, /*color=*/false, /*ascii=*/false);
        case '3': return parse_pgm_ppm(cur, /*color=*/true, /*ascii=*/true);
        case '6': return parse_pgm_ppm(cur, /*color=*/true, /*ascii=*/false);
        default: throw FormatError("PNM: unsupported magic");
    }
}

// --- PNG via libpng's simplified read API ---------------------------------

GrayImage read_png(const std::filesystem::path& path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.string().c_str()))
        throw FormatError("PNG: " + std::string(png.message));
    png.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, rgb.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw FormatError("PNG: " + msg);
    }
    return to_gray(rgb, static_cast<int>(png.width), static_cast<int>(png.height));
}

bool has_png_signature(std::span<const std::uint8_t> data) {
    static const std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    return data.size() >= 8 && std::memcmp(data.data(), kSig, 8) == 0;
}

}  // namespace

LoadedImage load_image(const std::filesystem::path& path) {
    std::vector<std::uint8_t> data = read_file(path);
    if (has_png_signature(data)) return read_png(path);
    return parse_pnm(data);
}

BinaryImage load_binary(const std::filesystem::path& path) {
    LoadedImage img = load_image(path);
    if (auto* bin = std::get_if<BinaryImage>(&img)) return std::move(*bin);
    return binarize(std::get<GrayImage>(img));
}

std::vector<std::uint8_t> encode_pbm(const BinaryImage& img) {
    std::string header = "P4\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n";
    std::size_t row_bytes = (static_cast<std::size_t>(img.width) + 7) / 8;
    std::vector<std::uint8_t> out(header.size() + row_bytes * img.height, 0);
    std::memcpy(out.data(), header.data(), header.size());
    for (int y = 0; y < img.height; ++y) {
        std::uint8_t* row = out.data() + header.size() + static_cast<std::size_t>(y) * row_bytes;
        for (int x = 0; x < img.width; ++x)
            if (img.at(x, y)) row[x / 8] |= static_cast<std::uint8_t>(0x80u >> (x % 8));
    }
    return out;
}

BinaryImage decode_pbm(std::span<const std::uint8_t> data) {
    LoadedImage img = parse_pnm(data);
    if (auto* bin = std::get_if<BinaryImage>(&img)) return std::move(*bin);
    throw FormatError("expected a PBM bilevel image");
}

void write_pbm(const std::filesystem::path& path, const BinaryImage& img) {
    write_file(path, encode_pbm(img));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.size() + img.pixels.size());
    std::memcpy(out.data(), header.data(), header.size());
    std::memcpy(out.data() + header.size(), img.pixels.data(), img.pixels.size());
    write_file(path, out);
}

}  // namespace mlbc
