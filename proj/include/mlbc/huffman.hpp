#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mlbc/bitstream.hpp"

namespace mlbc {

// Code lengths are capped; with desk-scale counts and capped alphabets
// real inputs never get near this.
constexpr unsigned kMaxCodeLength = 32;

// Optimal prefix-code lengths for positive weights, index-aligned with
// the input. Deterministic: merge ties pop the earliest-created node
// first. A single-symbol alphabet gets length 1.
std::vector<std::uint8_t> build_code_lengths(std::span<const std::uint64_t> weights);

struct CodeWord {
    std::uint32_t bits = 0;
    std::uint8_t length = 0;
};

// Canonical Huffman codebook. Symbol ids are dense indices 0..n-1; the
// index order *is* the canonical symbol order (the codec puts ESCAPE at
// index 0 and dictionary keys after it in dictionary rank order), so a
// codebook is fully determined by its length vector.
class CodeBook {
public:
    // Validates lengths in [1, 32] with Kraft sum <= 1 and assigns
    // canonical codes: sorted by (length, symbol index), numerically
    // increasing.
    static CodeBook from_lengths(std::vector<std::uint8_t> lengths);

    static CodeBook from_weights(std::span<const std::uint64_t> weights) {
        return from_lengths(build_code_lengths(weights));
    }

    std::size_t size() const { return codes_.size(); }
    CodeWord code(std::uint32_t symbol) const;
    const std::vector<std::uint8_t>& lengths() const { return lengths_; }

    void encode_symbol(BitWriter& out, std::uint32_t symbol) const;
    std::uint32_t decode_symbol(BitReader& in) const;

    // Kraft sum in units of 2^-32; 1.0 is represented as 2^32.
    std::uint64_t kraft_sum_q32() const;

private:
    std::vector<std::uint8_t> lengths_;
    std::vector<CodeWord> codes_;  // per symbol
    // Canonical decode tables indexed by code length.
    std::vector<std::uint32_t> first_code_;
    std::vector<std::uint32_t> count_;
    std::vector<std::uint32_t> offset_;
    std::vector<std::uint32_t> canon_symbols_;  // symbols sorted by (length, index)
    unsigned max_length_ = 0;
};

}  // namespace mlbc
