#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mlbc/patchkey.hpp"

namespace mlbc {

struct DictionaryMeta {
    std::vector<std::string> corpus_tags;
    std::uint64_t patches_ingested = 0;
    std::int64_t created_unix = 0;

    bool operator==(const DictionaryMeta&) const = default;
};

struct DictEntry {
    std::string digits;
    std::uint64_t count = 0;

    bool operator==(const DictEntry&) const = default;
};

// Per-level frequency table over patch keys. Entries are addressed by
// their digit strings; the level is a property of the whole table.
//
// Canonical order (descending count, ties by ascending digits) is the
// order used for serialization, ranks, and codebook symbol numbering.
class Dictionary {
public:
    explicit Dictionary(Level level) : level_(level) {}

    Level level() const { return level_; }
    std::uint64_t total() const { return total_; }
    std::size_t size() const { return counts_.size(); }
    bool empty() const { return counts_.empty(); }

    void add(const std::string& digits, std::uint64_t count = 1);
    std::uint64_t count_of(const std::string& digits) const;
    bool contains(const std::string& digits) const { return counts_.contains(digits); }

    const std::unordered_map<std::string, std::uint64_t>& counts() const { return counts_; }

    DictionaryMeta& meta() { return meta_; }
    const DictionaryMeta& meta() const { return meta_; }

    // Sorted by (count desc, digits asc); cached until the next mutation.
    const std::vector<DictEntry>& canonical_entries() const;
    std::optional<std::size_t> rank_of(const std::string& digits) const;
    std::optional<std::pair<std::size_t, double>> rank_and_probability(const std::string& digits) const;
    const DictEntry& entry_at_rank(std::size_t rank) const;

    bool operator==(const Dictionary& other) const {
        return level_ == other.level_ && counts_ == other.counts_ && meta_ == other.meta_;
    }

private:
    Level level_;
    std::unordered_map<std::string, std::uint64_t> counts_;
    std::uint64_t total_ = 0;
    DictionaryMeta meta_;
    mutable std::vector<DictEntry> canonical_cache_;
    mutable std::unordered_map<std::string, std::size_t> rank_cache_;
    mutable bool cache_valid_ = false;
};

// Pointwise count addition; levels must match. Meta merges as
// sorted tag union, summed patch counts, max creation time.
Dictionary merge(const Dictionary& a, const Dictionary& b);

struct PrunePolicy {
    // Retain the smallest canonical prefix reaching this cumulative mass
    // (levels 8 and 16 only); disabled when unset.
    std::optional<double> mass_fraction;
    std::uint64_t max_entries = 1ull << 20;
    // Levels 8/16 always drop unit-frequency entries; level 4 only when
    // asked. Level 2 is never pruned.
    bool unit_frequency_level4 = false;
};

// The all-zero and all-one keys survive every policy when present.
Dictionary prune(const Dictionary& d, const PrunePolicy& policy);

// File format (little-endian):
//   magic "MLDICT", version u16, level u8,
//   meta: tag count u16 + (u16 length, bytes) each, patches u64, created i64,
//   entry count u64, total u64,
//   entries in canonical order: packed key nibbles (high nibble first,
//   odd digit counts zero-padded), count varint,
//   CRC32 u32 over everything before it.
std::vector<std::uint8_t> serialize(const Dictionary& d);
Dictionary deserialize_dictionary(std::span<const std::uint8_t> data);
void save_dictionary(const Dictionary& d, const std::filesystem::path& path);
Dictionary load_dictionary(const std::filesystem::path& path);

// Chunk-wise probability estimates for the highest-frequency symbols.
// One sample per symbol is appended after each processed chunk; the
// tracked set grows as symbols enter the current top-K (earlier samples
// of late joiners are backfilled with zero so all series share length).
class ConvergenceMonitor {
public:
    static constexpr std::array<std::size_t, 4> kLags = {1, 10, 100, 1000};

    ConvergenceMonitor(Level level, double epsilon, std::size_t track_top_k = 100);

    void note_chunk(const Dictionary& dict);

    struct Status {
        bool determinate = false;  // false until history exceeds the largest lag
        bool converged = false;
        std::vector<std::pair<std::string, bool>> per_symbol;  // digits, converged
    };
    Status check() const;

    Level level() const { return level_; }
    double epsilon() const { return epsilon_; }
    std::size_t chunk_count() const { return chunk_count_; }
    // Keyed by digits, ordered lexicographically; each series has
    // chunk_count() samples.
    const std::map<std::string, std::vector<double>>& history() const { return history_; }

private:
    Level level_;
    double epsilon_;
    std::size_t track_top_k_;
    std::size_t chunk_count_ = 0;
    std::map<std::string, std::vector<double>> history_;
};

struct TrainerConfig {
    std::size_t chunk_size = 1000;
    std::size_t track_top_k = 100;
    double epsilon_level2 = 1e-5;
    double epsilon_level4 = 1e-5;
    double epsilon_level8 = 1e-6;
    double epsilon_level16 = 1e-6;

    double epsilon_for(Level lv) const;
};

// Accumulates patch statistics for all four levels. Images are tiled
// non-overlapping (matching encoder statistics); keys buffer up until a
// flush shuffles them and drains full chunks into the dictionaries.
class TrainerState {
public:
    explicit TrainerState(TrainerConfig config = {});

    void ingest(const BinaryImage& img);

    // Seeded Fisher-Yates shuffle of each buffer, then drains chunks of
    // chunk_size; the sub-chunk remainder stays buffered.
    void flush_chunks(std::uint64_t seed);

    // flush_chunks, then drains the final partial chunk per level.
    void finalize(std::uint64_t seed);

    const Dictionary& dictionary(Level lv) const { return dict(lv); }
    Dictionary take_dictionary(Level lv);
    const ConvergenceMonitor& monitor(Level lv) const;
    std::size_t buffered(Level lv) const;
    void add_corpus_tag(const std::string& tag);

    const TrainerConfig& config() const { return config_; }

private:
    static std::size_t idx(Level lv);
    Dictionary& dict(Level lv) { return dicts_[idx(lv)]; }
    const Dictionary& dict(Level lv) const { return dicts_[idx(lv)]; }
    void drain(Level lv, std::size_t chunk, bool allow_partial);

    TrainerConfig config_;
    std::array<Dictionary, 4> dicts_;
    std::array<std::vector<std::string>, 4> buffers_;  // pending key digits per level
    std::array<ConvergenceMonitor, 4> monitors_;
};

// The four dictionaries the codec works against, plus the identity hash
// embedded in containers. The hash covers the serialized (pre-completion)
// dictionaries: sha256 of the four per-level sha256 digests concatenated
// in level order 2, 4, 8, 16.
//
// Sets built by make_dictionary_set/load_dictionary_set have their rank
// caches pre-built and may be shared across threads for concurrent
// encode/decode; do not mutate a shared set.
struct DictionarySet {
    std::array<Dictionary, 4> dicts;  // level order 2, 4, 8, 16; level 2 force-completed
    std::array<std::uint8_t, 32> manifest_hash{};

    const Dictionary& at(Level lv) const;
};

// Builds a set from trained dictionaries (hashes their canonical
// serialization, then completes level 2 with count-1 entries for any of
// the 16 keys not observed).
DictionarySet make_dictionary_set(std::array<Dictionary, 4> dicts);

// manifest.json + four .mldict files. save writes the set exactly as
// given (call with pre-completion dictionaries); load verifies per-file
// hashes and force-completes level 2.
void save_dictionary_set(const std::filesystem::path& dir, const std::array<Dictionary, 4>& dicts);
DictionarySet load_dictionary_set(const std::filesystem::path& dir);

extern const char* const kManifestFileName;
std::string dictionary_file_name(Level lv);

}  // namespace mlbc
