#pragma once

#include <filesystem>
#include <variant>

#include "mlbc/image.hpp"

namespace mlbc {

// PBM files load as BinaryImage (bit 1 = PBM black); everything else
// loads as GrayImage (color inputs go through BT.601 luma).
using LoadedImage = std::variant<GrayImage, BinaryImage>;

// Dispatches on content: PNG signature, else PNM magic P1..P6.
LoadedImage load_image(const std::filesystem::path& path);

// Convenience for ingestion pipelines: load, then binarize unless the
// file was already bilevel.
BinaryImage load_binary(const std::filesystem::path& path);

void write_pbm(const std::filesystem::path& path, const BinaryImage& img);  // P4
void write_pgm(const std::filesystem::path& path, const GrayImage& img);    // P5

BinaryImage decode_pbm(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> encode_pbm(const BinaryImage& img);

}  // namespace mlbc
