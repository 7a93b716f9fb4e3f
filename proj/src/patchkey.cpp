#include "mlbc/patchkey.hpp"

#include <charconv>

namespace mlbc {

namespace {

const char* kHexDigits = "0123456789ABCDEF";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

void append_digits(const BinaryImage& img, int x0, int y0, int n, std::string& out) {
    if (n == 2) {
        int v = (img.at(x0, y0) << 3) | (img.at(x0 + 1, y0) << 2) | (img.at(x0, y0 + 1) << 1) |
                img.at(x0 + 1, y0 + 1);
        out.push_back(kHexDigits[v]);
        return;
    }
    int h = n / 2;
    append_digits(img, x0, y0, h, out);          // top-left
    append_digits(img, x0 + h, y0, h, out);      // top-right
    append_digits(img, x0, y0 + h, h, out);      // bottom-left
    append_digits(img, x0 + h, y0 + h, h, out);  // bottom-right
}

void paste_digits(BinaryImage& img, int x0, int y0, int n, const char*& digit) {
    if (n == 2) {
        int v = hex_value(*digit++);
        img.set(x0, y0, static_cast<std::uint8_t>((v >> 3) & 1));
        img.set(x0 + 1, y0, static_cast<std::uint8_t>((v >> 2) & 1));
        img.set(x0, y0 + 1, static_cast<std::uint8_t>((v >> 1) & 1));
        img.set(x0 + 1, y0 + 1, static_cast<std::uint8_t>(v & 1));
        return;
    }
    int h = n / 2;
    paste_digits(img, x0, y0, h, digit);
    paste_digits(img, x0 + h, y0, h, digit);
    paste_digits(img, x0, y0 + h, h, digit);
    paste_digits(img, x0 + h, y0 + h, h, digit);
}

}  // namespace

Level level_from_side(int n) {
    switch (n) {
        case 2: return Level::L2;
        case 4: return Level::L4;
        case 8: return Level::L8;
        case 16: return Level::L16;
        default: throw InputError("block side must be one of 2, 4, 8, 16");
    }
}

void validate_key(const PatchKey& key) {
    if (key.digits.size() != level_digits(key.level))
        throw FormatError("patch key has wrong digit count for its level");
    for (char c : key.digits)
        if (hex_value(c) < 0) throw FormatError("patch key contains a non-hex digit");
}

PatchKey block_to_key(const BinaryImage& img, int x0, int y0, Level level) {
    int n = level_side(level);
    if (x0 < 0 || y0 < 0 || x0 + n > img.width || y0 + n > img.height)
        throw InputError("block_to_key: block exceeds image bounds");
    PatchKey key;
    key.level = level;
    key.digits.reserve(level_digits(level));
    append_digits(img, x0, y0, n, key.digits);
    return key;
}

PatchKey block_to_key(const std::vector<std::uint8_t>& block, int n) {
    Level level = level_from_side(n);
    if (block.size() != static_cast<std::size_t>(n) * n)
        throw InputError("block_to_key: matrix size != n*n");
    for (std::uint8_t b : block)
        if (b > 1) throw InputError("block_to_key: entries must be 0 or 1");
    BinaryImage img;
    img.width = n;
    img.height = n;
    img.bits = block;
    return block_to_key(img, 0, 0, level);
}

std::vector<std::uint8_t> key_to_block(const PatchKey& key) {
    validate_key(key);
    int n = level_side(key.level);
    BinaryImage img;
    img.width = n;
    img.height = n;
    img.bits.assign(static_cast<std::size_t>(n) * n, 0);
    const char* digit = key.digits.data();
    paste_digits(img, 0, 0, n, digit);
    return std::move(img.bits);
}

void paste_block(BinaryImage& img, int x0, int y0, const PatchKey& key) {
    validate_key(key);
    int n = level_side(key.level);
    if (x0 < 0 || y0 < 0 || x0 + n > img.width || y0 + n > img.height)
        throw InputError("paste_block: block exceeds image bounds");
    const char* digit = key.digits.data();
    paste_digits(img, x0, y0, n, digit);
}

std::array<PatchKey, 4> split_key(const PatchKey& key) {
    if (key.level == Level::L2) throw InputError("split_key: level-2 keys are atomic");
    validate_key(key);
    Level child = level_from_side(level_side(key.level) / 2);
    std::size_t len = level_digits(child);
    std::array<PatchKey, 4> out;
    for (int i = 0; i < 4; ++i) {
        out[i].level = child;
        out[i].digits = key.digits.substr(static_cast<std::size_t>(i) * len, len);
    }
    return out;
}

std::vector<PatchKey> tile_keys(const PaddedImage& img, Level level) {
    int n = level_side(level);
    if (img.image.width % n != 0 || img.image.height % n != 0)
        throw InputError("tile_keys: image dimensions not divisible by block size");
    std::vector<PatchKey> keys;
    keys.reserve(static_cast<std::size_t>(img.image.width / n) * (img.image.height / n));
    for (int y = 0; y < img.image.height; y += n)
        for (int x = 0; x < img.image.width; x += n) keys.push_back(block_to_key(img.image, x, y, level));
    return keys;
}

std::string to_string(const PatchKey& key) {
    return "L" + std::to_string(level_side(key.level)) + ":" + key.digits;
}

PatchKey patchkey_from_string(const std::string& text) {
    auto colon = text.find(':');
    if (text.empty() || text[0] != 'L' || colon == std::string::npos)
        throw FormatError("patch key text must look like L<side>:<hex digits>");
    int side = 0;
    auto [ptr, ec] = std::from_chars(text.data() + 1, text.data() + colon, side);
    if (ec != std::errc() || ptr != text.data() + colon)
        throw FormatError("patch key text has a malformed level");
    PatchKey key;
    key.level = level_from_side(side);
    key.digits = text.substr(colon + 1);
    validate_key(key);
    return key;
}

}  // namespace mlbc
