#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mlbc/image.hpp"

namespace mlbc {

// Block side length. The codec descends 16 -> 8 -> 4 -> 2.
enum class Level : int { L2 = 2, L4 = 4, L8 = 8, L16 = 16 };

constexpr std::array<Level, 4> kLevels = {Level::L2, Level::L4, Level::L8, Level::L16};

constexpr int level_side(Level lv) { return static_cast<int>(lv); }

// Hex digits per key: n^2 / 4.
constexpr std::size_t level_digits(Level lv) {
    int n = level_side(lv);
    return static_cast<std::size_t>(n) * n / 4;
}

Level level_from_side(int n);

// Canonical serialization of an n x n binary block.
//
// A 2x2 block maps to one uppercase hex digit Hex(b1 b2 b3 b4), bits in
// raster order (top-left, top-right, bottom-left, bottom-right), b1 most
// significant. Larger blocks concatenate the keys of their four
// quadrants in the same raster order, recursively. Consequently a key
// at level n splits into four level-n/2 keys by plain substring.
struct PatchKey {
    Level level = Level::L2;
    std::string digits;  // uppercase hex, length level_digits(level)

    bool operator==(const PatchKey&) const = default;
    auto operator<=>(const PatchKey&) const = default;
};

// Serializes the n x n block at (x0, y0) of img.
PatchKey block_to_key(const BinaryImage& img, int x0, int y0, Level level);

// Standalone n x n row-major bit matrix variant.
PatchKey block_to_key(const std::vector<std::uint8_t>& block, int n);

// Inverse: n x n row-major bit matrix.
std::vector<std::uint8_t> key_to_block(const PatchKey& key);

// Writes key's block into img at (x0, y0).
void paste_block(BinaryImage& img, int x0, int y0, const PatchKey& key);

// Quadrant keys in raster order; concatenating their digits gives back
// the parent's digits. Contract violation at level 2.
std::array<PatchKey, 4> split_key(const PatchKey& key);

// Non-overlapping tiling in raster block order.
std::vector<PatchKey> tile_keys(const PaddedImage& img, Level level);

// Text form used by `inspect` and the convergence CSV headers: "L4:F000".
std::string to_string(const PatchKey& key);
PatchKey patchkey_from_string(const std::string& text);

// Validates digit count and hex charset.
void validate_key(const PatchKey& key);

}  // namespace mlbc
