#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mlbc/codec.hpp"

namespace mlbc {

// External codec invoked through a shell command template; "{in}" is
// replaced by the PBM input path and "{out}" by the output path.
struct ExternalCodec {
    std::string name;
    std::string command_template;
};

struct CodecCell {
    std::uint64_t bytes = 0;
    double ratio = 0.0;
};

struct BenchRow {
    std::string image;
    std::uint64_t pixels = 0;
    std::uint64_t proposed_bytes = 0;
    double proposed_ratio = 0.0;
    std::vector<std::optional<CodecCell>> external;  // aligned with options.codecs
    std::string best;                                // column name with the highest ratio
};

struct BenchResult {
    std::vector<std::string> codec_names;  // external codec names
    std::vector<BenchRow> rows;
    double proposed_mean = 0.0;
    std::vector<std::optional<double>> external_means;  // over rows with output
    std::size_t warnings = 0;
};

struct BenchOptions {
    std::vector<ExternalCodec> codecs;
    std::filesystem::path work_dir;  // scratch space for PBM inputs and codec outputs
    // Applied to each container before round-trip verification; lets the
    // fault-injection tests prove that a bad container aborts the run.
    std::function<void(std::vector<std::uint8_t>&)> post_encode_hook;
};

// Encodes every image in the directory (filename order) and verifies the
// decode bit-exactly before emitting its row; a failed round trip aborts
// the whole run. Unreadable images are skipped with a warning; external
// codec failures leave empty cells.
BenchResult run_corpus(const std::filesystem::path& dir, const DictionarySet& dicts,
                       const BenchOptions& options);

// image,pixels,proposed_bytes,proposed_ratio[,<codec>_bytes,<codec>_ratio]...,best
std::string bench_csv(const BenchResult& result);
std::string bench_table(const BenchResult& result);  // aligned text

}  // namespace mlbc
