#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "mlbc/dictionary.hpp"
#include "mlbc/huffman.hpp"
#include "mlbc/image.hpp"
#include "mlbc/patchkey.hpp"

namespace mlbc {

// Coding levels in container order: largest block first.
constexpr std::array<Level, 4> kCodingLevels = {Level::L16, Level::L8, Level::L4, Level::L2};

// Quadtree coding decision for one 16x16 block. A node either codes its
// block with a dictionary key or splits into four children; level-2
// nodes always code (the completed level-2 dictionary covers all 16
// patterns).
struct BlockPlan {
    struct Node {
        Level level = Level::L16;
        bool coded = true;
        std::string digits;                  // set when coded
        std::array<std::uint32_t, 4> child{};  // indices into nodes when split
    };
    std::vector<Node> nodes;  // nodes[0] is the 16x16 root

    const Node& root() const { return nodes[0]; }
};

// Greedy top-down: code at the largest level whose dictionary contains
// the block, else split. One plan per 16x16 block, raster order.
std::vector<BlockPlan> plan(const PaddedImage& img, const DictionarySet& dicts);

// Per-image, per-level canonical Huffman codebook. Symbol 0 is ESCAPE
// at levels 16/8/4; key symbols follow in ascending dictionary rank.
struct ImageCodeBook {
    Level level = Level::L16;
    bool has_escape = false;
    std::vector<std::string> keys;        // digits by symbol index minus has_escape
    std::vector<std::uint64_t> ranks;     // dictionary ranks aligned with keys
    CodeBook book;                        // over keys.size() + has_escape symbols
    std::unordered_map<std::string, std::uint32_t> symbol_of;

    bool present() const { return has_escape || !keys.empty(); }
    std::size_t symbol_count() const { return keys.size() + (has_escape ? 1 : 0); }
};

// Key symbols weigh their global dictionary frequency; ESCAPE weighs the
// number of split decisions at its level (at least 1). Levels absent
// from every plan get an absent codebook.
std::array<ImageCodeBook, 4> build_image_codebooks(const std::vector<BlockPlan>& plans,
                                                   const DictionarySet& dicts);

// Container layout (little-endian, normative):
//   magic "MLBC", version u16, flags u16 (zero),
//   orig_width u32, orig_height u32,
//   dictionary manifest SHA-256 (32 bytes),
//   four symbol tables in level order 16, 8, 4, 2:
//     symbol count u32 (0 = level unused); at levels 16/8/4 the first
//     symbol is ESCAPE, stored as its code length u8 only; remaining
//     symbols are (dictionary rank varint, code length u8) in ascending
//     rank order,
//   payload bit length u64, payload bytes,
//   CRC32 u32 over every preceding byte.
std::vector<std::uint8_t> encode(const BinaryImage& img, const DictionarySet& dicts);
BinaryImage decode(std::span<const std::uint8_t> container, const DictionarySet& dicts);

// Uncompressed baseline is 1 bit per pixel.
double compression_ratio(const BinaryImage& original, std::size_t container_bytes);

// Header fields, readable without dictionaries (stops before payload).
struct ContainerInfo {
    std::uint16_t version = 0;
    std::uint32_t orig_width = 0;
    std::uint32_t orig_height = 0;
    std::array<std::uint8_t, 32> manifest_hash{};
    std::array<std::uint32_t, 4> symbol_counts{};  // level order 16, 8, 4, 2
    std::uint64_t payload_bits = 0;
    std::size_t container_bytes = 0;
};
ContainerInfo inspect_container(std::span<const std::uint8_t> container);

}  // namespace mlbc
