#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mlbc/errors.hpp"

namespace mlbc {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, width*height

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// One byte per pixel holding 0 or 1. Packed storage is left to the PBM
// writer and the container payload.
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // row-major, each element 0 or 1

    std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, std::uint8_t v) { bits[static_cast<std::size_t>(y) * width + x] = v; }

    bool operator==(const BinaryImage&) const = default;
};

struct PaddedImage {
    BinaryImage image;  // dimensions are multiples of 16, padded region all-zero
    int orig_width = 0;
    int orig_height = 0;
};

using Histogram = std::array<std::uint64_t, 256>;

// BT.601 luma, rounded to nearest. raster is interleaved 8-bit RGB.
GrayImage to_gray(std::span<const std::uint8_t> rgb, int width, int height);

Histogram histogram_of(const GrayImage& img);

// Threshold maximizing between-class variance of (<= t) vs (> t).
// Ties pick the smallest t; a single-class histogram returns that intensity.
int otsu_threshold(const Histogram& hist);

// bit = 1 iff pixel > otsu_threshold(histogram_of(img))
BinaryImage binarize(const GrayImage& img);

PaddedImage pad_to_16(const BinaryImage& img);
BinaryImage crop(const PaddedImage& padded);

}  // namespace mlbc
