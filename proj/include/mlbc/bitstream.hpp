#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mlbc/errors.hpp"

namespace mlbc {

// Appends bits MSB-first: the first bit written lands in bit 7 of byte 0.
// This order makes canonical Huffman codes numerically comparable in hex
// dumps and is part of the container format contract.
class BitWriter {
public:
    void write_bits(std::uint64_t value, unsigned count) {
        if (count > 64) throw InputError("BitWriter: count > 64");
        if (count < 64 && (value >> count) != 0)
            throw InputError("BitWriter: value does not fit in count bits");
        for (unsigned i = count; i-- > 0;) write_bit((value >> i) & 1u);
    }

    void write_bit(std::uint64_t bit) {
        if ((bit_length_ & 7u) == 0) bytes_.push_back(0);
        if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bit_length_ & 7u));
        ++bit_length_;
    }

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::uint64_t bit_length() const { return bit_length_; }

private:
    std::vector<std::uint8_t> bytes_;
    std::uint64_t bit_length_ = 0;
};

class BitReader {
public:
    BitReader(std::span<const std::uint8_t> bytes, std::uint64_t bit_length)
        : bytes_(bytes), bit_length_(bit_length) {
        if (bit_length_ > 8 * static_cast<std::uint64_t>(bytes_.size()))
            throw TruncationError("BitReader: bit length exceeds buffer");
    }

    std::uint64_t read_bits(unsigned count) {
        if (count > 64) throw InputError("BitReader: count > 64");
        std::uint64_t v = 0;
        for (unsigned i = 0; i < count; ++i) v = (v << 1) | read_bit();
        return v;
    }

    std::uint64_t read_bit() {
        if (pos_ >= bit_length_) throw TruncationError("BitReader: read past end of stream");
        std::uint64_t bit = (bytes_[pos_ >> 3] >> (7 - (pos_ & 7u))) & 1u;
        ++pos_;
        return bit;
    }

    std::uint64_t position() const { return pos_; }
    std::uint64_t remaining() const { return bit_length_ - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::uint64_t bit_length_;
    std::uint64_t pos_ = 0;
};

}  // namespace mlbc
