#include "mlbc/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "json.hpp"
#include "mlbc/binio.hpp"

namespace mlbc {

namespace {

constexpr char kDictMagic[6] = {'M', 'L', 'D', 'I', 'C', 'T'};
constexpr std::uint16_t kDictVersion = 1;

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

bool canonical_less(const DictEntry& a, const DictEntry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.digits < b.digits;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Uniform draw in [0, bound) by rejection; mt19937_64 output is pinned
// by the standard, so shuffles reproduce across platforms.
std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

void fisher_yates(std::vector<std::string>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[bounded_rand(rng, i)]);
}

std::string all_zero_digits(Level lv) { return std::string(level_digits(lv), '0'); }
std::string all_one_digits(Level lv) { return std::string(level_digits(lv), 'F'); }

}  // namespace

void Dictionary::add(const std::string& digits, std::uint64_t count) {
    if (digits.size() != level_digits(level_))
        throw InputError("Dictionary::add: key digit count does not match level");
    for (char c : digits)
        if (hex_value(c) < 0) throw InputError("Dictionary::add: key contains a non-hex digit");
    if (count == 0) throw InputError("Dictionary::add: count must be positive");
    std::uint64_t new_total;
    if (__builtin_add_overflow(total_, count, &new_total))
        throw InputError("Dictionary::add: total overflows");
    counts_[digits] += count;
    total_ = new_total;
    cache_valid_ = false;
}

std::uint64_t Dictionary::count_of(const std::string& digits) const {
    auto it = counts_.find(digits);
    return it == counts_.end() ? 0 : it->second;
}

const std::vector<DictEntry>& Dictionary::canonical_entries() const {
    if (!cache_valid_) {
        canonical_cache_.clear();
        canonical_cache_.reserve(counts_.size());
        for (const auto& [digits, count] : counts_) canonical_cache_.push_back({digits, count});
        std::sort(canonical_cache_.begin(), canonical_cache_.end(), canonical_less);
        rank_cache_.clear();
        rank_cache_.reserve(canonical_cache_.size());
        for (std::size_t i = 0; i < canonical_cache_.size(); ++i)
            rank_cache_.emplace(canonical_cache_[i].digits, i);
        cache_valid_ = true;
    }
    return canonical_cache_;
}

std::optional<std::size_t> Dictionary::rank_of(const std::string& digits) const {
    canonical_entries();
    auto it = rank_cache_.find(digits);
    if (it == rank_cache_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::pair<std::size_t, double>> Dictionary::rank_and_probability(
    const std::string& digits) const {
    auto rank = rank_of(digits);
    if (!rank) return std::nullopt;
    double p = static_cast<double>(count_of(digits)) / static_cast<double>(total_);
    return std::make_pair(*rank, p);
}

const DictEntry& Dictionary::entry_at_rank(std::size_t rank) const {
    const auto& entries = canonical_entries();
    if (rank >= entries.size()) throw InputError("Dictionary: rank out of range");
    return entries[rank];
}

Dictionary merge(const Dictionary& a, const Dictionary& b) {
    if (a.level() != b.level()) throw InputError("merge: dictionary levels differ");
    Dictionary out(a.level());
    for (const auto& [digits, count] : a.counts()) out.add(digits, count);
    for (const auto& [digits, count] : b.counts()) out.add(digits, count);

    std::vector<std::string> tags = a.meta().corpus_tags;
    tags.insert(tags.end(), b.meta().corpus_tags.begin(), b.meta().corpus_tags.end());
    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
    out.meta().corpus_tags = std::move(tags);
    out.meta().patches_ingested = a.meta().patches_ingested + b.meta().patches_ingested;
    out.meta().created_unix = std::max(a.meta().created_unix, b.meta().created_unix);
    return out;
}

Dictionary prune(const Dictionary& d, const PrunePolicy& policy) {
    if (policy.mass_fraction && (*policy.mass_fraction <= 0.0 || *policy.mass_fraction > 1.0))
        throw InputError("prune: mass_fraction must lie in (0, 1]");

    Level lv = d.level();
    Dictionary out(lv);
    out.meta() = d.meta();
    if (lv == Level::L2) {
        for (const auto& [digits, count] : d.counts()) out.add(digits, count);
        return out;
    }

    bool drop_units = lv == Level::L8 || lv == Level::L16 ||
                      (lv == Level::L4 && policy.unit_frequency_level4);
    bool mass_and_cap = lv == Level::L8 || lv == Level::L16;

    std::vector<DictEntry> kept;
    kept.reserve(d.size());
    for (const DictEntry& e : d.canonical_entries())
        if (!drop_units || e.count > 1) kept.push_back(e);

    if (mass_and_cap) {
        if (policy.mass_fraction) {
            std::uint64_t stage_total = 0;
            for (const DictEntry& e : kept) stage_total += e.count;
            long double threshold = *policy.mass_fraction * static_cast<long double>(stage_total);
            std::uint64_t cum = 0;
            std::size_t keep_n = kept.size();
            for (std::size_t i = 0; i < kept.size(); ++i) {
                cum += kept[i].count;
                if (static_cast<long double>(cum) >= threshold) {
                    keep_n = i + 1;
                    break;
                }
            }
            kept.resize(keep_n);
        }
        if (kept.size() > policy.max_entries) kept.resize(policy.max_entries);
    }

    for (const DictEntry& e : kept) out.add(e.digits, e.count);

    // Blank and solid blocks carry the bulk of the mass; no policy may
    // drop them while the source dictionary has them.
    for (const std::string& digits : {all_zero_digits(lv), all_one_digits(lv)})
        if (d.contains(digits) && !out.contains(digits)) out.add(digits, d.count_of(digits));
    return out;
}

std::vector<std::uint8_t> serialize(const Dictionary& d) {
    ByteWriter w;
    w.raw({reinterpret_cast<const std::uint8_t*>(kDictMagic), sizeof(kDictMagic)});
    w.u16(kDictVersion);
    w.u8(static_cast<std::uint8_t>(level_side(d.level())));

    const DictionaryMeta& meta = d.meta();
    if (meta.corpus_tags.size() > 0xFFFF) throw InputError("serialize: too many corpus tags");
    w.u16(static_cast<std::uint16_t>(meta.corpus_tags.size()));
    for (const std::string& tag : meta.corpus_tags) w.str(tag);
    w.u64(meta.patches_ingested);
    w.i64(meta.created_unix);

    w.u64(d.size());
    w.u64(d.total());
    for (const DictEntry& e : d.canonical_entries()) {
        const std::string& digits = e.digits;
        for (std::size_t i = 0; i < digits.size(); i += 2) {
            int hi = hex_value(digits[i]);
            int lo = i + 1 < digits.size() ? hex_value(digits[i + 1]) : 0;
            w.u8(static_cast<std::uint8_t>((hi << 4) | lo));
        }
        w.varint(e.count);
    }
    w.u32(crc32_of(w.bytes()));
    return w.take();
}

Dictionary deserialize_dictionary(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    std::vector<std::uint8_t> magic = r.raw(sizeof(kDictMagic));
    if (std::memcmp(magic.data(), kDictMagic, sizeof(kDictMagic)) != 0)
        throw FormatError("dictionary file: bad magic");
    std::uint16_t version = r.u16();
    if (version != kDictVersion)
        throw VersionError("dictionary file: unsupported version " + std::to_string(version));
    int side = r.u8();
    if (side != 2 && side != 4 && side != 8 && side != 16)
        throw FormatError("dictionary file: invalid level");
    Dictionary d(level_from_side(side));

    std::uint16_t tag_count = r.u16();
    for (std::uint16_t i = 0; i < tag_count; ++i) d.meta().corpus_tags.push_back(r.str());
    d.meta().patches_ingested = r.u64();
    d.meta().created_unix = r.i64();

    std::uint64_t entry_count = r.u64();
    std::uint64_t declared_total = r.u64();
    std::size_t digit_count = level_digits(d.level());
    std::size_t key_bytes = (digit_count + 1) / 2;

    static const char* kHexDigits = "0123456789ABCDEF";
    DictEntry prev;
    for (std::uint64_t i = 0; i < entry_count; ++i) {
        std::vector<std::uint8_t> packed = r.raw(key_bytes);
        std::string digits;
        digits.reserve(digit_count);
        for (std::size_t b = 0; b < key_bytes; ++b) {
            digits.push_back(kHexDigits[packed[b] >> 4]);
            if (digits.size() < digit_count) digits.push_back(kHexDigits[packed[b] & 0xF]);
        }
        if (digit_count % 2 == 1 && (packed.back() & 0xF) != 0)
            throw FormatError("dictionary file: nonzero padding nibble");
        std::uint64_t count = r.varint();
        if (count == 0) throw FormatError("dictionary file: zero-frequency entry");
        DictEntry cur{digits, count};
        if (i > 0 && !canonical_less(prev, cur))
            throw FormatError("dictionary file: entries not in canonical order");
        d.add(digits, count);
        prev = std::move(cur);
    }
    if (d.total() != declared_total) throw FormatError("dictionary file: total does not match entries");

    std::size_t crc_pos = r.position();
    std::uint32_t stored_crc = r.u32();
    if (r.remaining() != 0) throw FormatError("dictionary file: trailing data");
    if (crc32_of(data.subspan(0, crc_pos)) != stored_crc)
        throw ChecksumError("dictionary file: CRC32 mismatch");
    return d;
}

void save_dictionary(const Dictionary& d, const std::filesystem::path& path) {
    write_file(path, serialize(d));
}

Dictionary load_dictionary(const std::filesystem::path& path) {
    return deserialize_dictionary(read_file(path));
}

// --- ConvergenceMonitor ----------------------------------------------------

ConvergenceMonitor::ConvergenceMonitor(Level level, double epsilon, std::size_t track_top_k)
    : level_(level), epsilon_(epsilon), track_top_k_(track_top_k) {
    if (epsilon <= 0) throw InputError("ConvergenceMonitor: epsilon must be positive");
}

void ConvergenceMonitor::note_chunk(const Dictionary& dict) {
    if (dict.level() != level_) throw InputError("ConvergenceMonitor: dictionary level mismatch");
    ++chunk_count_;

    // Current top-K by (count desc, digits asc).
    std::vector<std::pair<std::uint64_t, const std::string*>> order;
    order.reserve(dict.size());
    for (const auto& [digits, count] : dict.counts()) order.emplace_back(count, &digits);
    auto cmp = [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return *a.second < *b.second;
    };
    std::size_t k = std::min(track_top_k_, order.size());
    std::partial_sort(order.begin(), order.begin() + k, order.end(), cmp);
    order.resize(k);

    for (const auto& [count, digits] : order) {
        auto [it, inserted] = history_.try_emplace(*digits);
        if (inserted) it->second.assign(chunk_count_ - 1, 0.0);
    }
    double total = static_cast<double>(dict.total());
    for (auto& [digits, series] : history_)
        series.push_back(static_cast<double>(dict.count_of(digits)) / total);
}

ConvergenceMonitor::Status ConvergenceMonitor::check() const {
    Status st;
    st.determinate = chunk_count_ > kLags.back();
    bool all = true;
    for (const auto& [digits, series] : history_) {
        bool converged = st.determinate;
        if (st.determinate) {
            std::size_t n = series.size() - 1;
            for (std::size_t lag : kLags)
                if (std::abs(series[n] - series[n - lag]) >= epsilon_) {
                    converged = false;
                    break;
                }
        }
        st.per_symbol.emplace_back(digits, converged);
        all = all && converged;
    }
    st.converged = st.determinate && all && !history_.empty();
    return st;
}

// --- TrainerState -----------------------------------------------------------

double TrainerConfig::epsilon_for(Level lv) const {
    switch (lv) {
        case Level::L2: return epsilon_level2;
        case Level::L4: return epsilon_level4;
        case Level::L8: return epsilon_level8;
        case Level::L16: return epsilon_level16;
    }
    throw InputError("epsilon_for: invalid level");
}

std::size_t TrainerState::idx(Level lv) {
    switch (lv) {
        case Level::L2: return 0;
        case Level::L4: return 1;
        case Level::L8: return 2;
        case Level::L16: return 3;
    }
    throw InputError("TrainerState: invalid level");
}

TrainerState::TrainerState(TrainerConfig config)
    : config_(config),
      dicts_{Dictionary(Level::L2), Dictionary(Level::L4), Dictionary(Level::L8),
             Dictionary(Level::L16)},
      monitors_{ConvergenceMonitor(Level::L2, config.epsilon_level2, config.track_top_k),
                ConvergenceMonitor(Level::L4, config.epsilon_level4, config.track_top_k),
                ConvergenceMonitor(Level::L8, config.epsilon_level8, config.track_top_k),
                ConvergenceMonitor(Level::L16, config.epsilon_level16, config.track_top_k)} {
    if (config_.chunk_size < 1) throw InputError("TrainerState: chunk_size must be >= 1");
}

void TrainerState::ingest(const BinaryImage& img) {
    PaddedImage padded = pad_to_16(img);
    for (Level lv : kLevels) {
        std::vector<std::string>& buf = buffers_[idx(lv)];
        for (PatchKey& key : tile_keys(padded, lv)) buf.push_back(std::move(key.digits));
    }
}

void TrainerState::drain(Level lv, std::size_t end, bool note_chunks) {
    std::vector<std::string>& buf = buffers_[idx(lv)];
    Dictionary& d = dict(lv);
    std::size_t i = 0;
    while (i < end) {
        std::size_t chunk_end = std::min(i + config_.chunk_size, end);
        for (; i < chunk_end; ++i) {
            d.add(buf[i]);
            ++d.meta().patches_ingested;
        }
        if (note_chunks) monitors_[idx(lv)].note_chunk(d);
    }
    buf.erase(buf.begin(), buf.begin() + end);
}

void TrainerState::flush_chunks(std::uint64_t seed) {
    for (Level lv : kLevels) {
        std::vector<std::string>& buf = buffers_[idx(lv)];
        std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(level_side(lv))));
        fisher_yates(buf, rng);
        drain(lv, buf.size() / config_.chunk_size * config_.chunk_size, true);
    }
}

void TrainerState::finalize(std::uint64_t seed) {
    flush_chunks(seed);
    // Remaining sub-chunk keys were already shuffled by the flush above.
    for (Level lv : kLevels) drain(lv, buffers_[idx(lv)].size(), true);
}

Dictionary TrainerState::take_dictionary(Level lv) {
    Dictionary out = std::move(dict(lv));
    dict(lv) = Dictionary(lv);
    return out;
}

const ConvergenceMonitor& TrainerState::monitor(Level lv) const { return monitors_[idx(lv)]; }

std::size_t TrainerState::buffered(Level lv) const { return buffers_[idx(lv)].size(); }

void TrainerState::add_corpus_tag(const std::string& tag) {
    for (Dictionary& d : dicts_) {
        auto& tags = d.meta().corpus_tags;
        if (std::find(tags.begin(), tags.end(), tag) == tags.end()) tags.push_back(tag);
    }
}

// --- DictionarySet ----------------------------------------------------------

const char* const kManifestFileName = "manifest.json";

std::string dictionary_file_name(Level lv) {
    return "dict-l" + std::to_string(level_side(lv)) + ".mldict";
}

namespace {

std::size_t set_idx(Level lv) {
    switch (lv) {
        case Level::L2: return 0;
        case Level::L4: return 1;
        case Level::L8: return 2;
        case Level::L16: return 3;
    }
    throw InputError("invalid level");
}

void complete_level2(Dictionary& d2) {
    static const char* kHexDigits = "0123456789ABCDEF";
    for (int v = 0; v < 16; ++v) {
        std::string digits(1, kHexDigits[v]);
        if (!d2.contains(digits)) d2.add(digits, 1);
    }
}

std::array<std::uint8_t, 32> combine_hashes(
    const std::array<std::array<std::uint8_t, 32>, 4>& file_hashes) {
    std::vector<std::uint8_t> cat;
    cat.reserve(4 * 32);
    for (const auto& h : file_hashes) cat.insert(cat.end(), h.begin(), h.end());
    return sha256_of(cat);
}

void check_set_levels(const std::array<Dictionary, 4>& dicts) {
    for (std::size_t i = 0; i < 4; ++i)
        if (set_idx(dicts[i].level()) != i)
            throw InputError("dictionary set must hold levels 2, 4, 8, 16 in order");
}

}  // namespace

const Dictionary& DictionarySet::at(Level lv) const { return dicts[set_idx(lv)]; }

// Sharing across threads relies on the rank caches being built before
// the set is handed out; after this, lookups are pure reads.
void warm_rank_caches(DictionarySet& set) {
    for (const Dictionary& d : set.dicts) d.canonical_entries();
}

DictionarySet make_dictionary_set(std::array<Dictionary, 4> dicts) {
    check_set_levels(dicts);
    std::array<std::array<std::uint8_t, 32>, 4> file_hashes;
    for (std::size_t i = 0; i < 4; ++i) file_hashes[i] = sha256_of(serialize(dicts[i]));
    DictionarySet set{std::move(dicts), combine_hashes(file_hashes)};
    complete_level2(set.dicts[0]);
    warm_rank_caches(set);
    return set;
}

void save_dictionary_set(const std::filesystem::path& dir, const std::array<Dictionary, 4>& dicts) {
    check_set_levels(dicts);
    std::filesystem::create_directories(dir);

    nlohmann::json manifest;
    manifest["format"] = 1;
    std::array<std::array<std::uint8_t, 32>, 4> file_hashes;
    nlohmann::json levels = nlohmann::json::array();
    for (std::size_t i = 0; i < 4; ++i) {
        std::vector<std::uint8_t> bytes = serialize(dicts[i]);
        std::string name = dictionary_file_name(dicts[i].level());
        write_file(dir / name, bytes);
        file_hashes[i] = sha256_of(bytes);
        levels.push_back({{"level", level_side(dicts[i].level())},
                          {"file", name},
                          {"sha256", hex_string(file_hashes[i])}});
    }
    manifest["levels"] = levels;
    manifest["combined_sha256"] = hex_string(combine_hashes(file_hashes));

    std::string text = manifest.dump(2);
    text.push_back('\n');
    write_file(dir / kManifestFileName,
               {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

DictionarySet load_dictionary_set(const std::filesystem::path& dir) {
    std::filesystem::path manifest_path = dir / kManifestFileName;
    std::vector<std::uint8_t> manifest_bytes = read_file(manifest_path);
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(manifest_bytes.begin(), manifest_bytes.end());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest: invalid JSON: " + std::string(e.what()));
    }
    if (!manifest.contains("levels") || !manifest["levels"].is_array() ||
        manifest["levels"].size() != 4)
        throw FormatError("manifest: expected four level entries");

    std::array<bool, 4> seen{};
    std::array<std::string, 4> files;
    std::array<std::string, 4> declared_hashes;
    for (const auto& entry : manifest["levels"]) {
        int side = entry.at("level").get<int>();
        std::size_t i = set_idx(level_from_side(side));
        seen[i] = true;
        files[i] = entry.at("file").get<std::string>();
        declared_hashes[i] = entry.at("sha256").get<std::string>();
    }
    for (bool s : seen)
        if (!s) throw FormatError("manifest: a level entry is missing");

    std::array<std::array<std::uint8_t, 32>, 4> file_hashes;
    std::array<Dictionary, 4> dicts{Dictionary(Level::L2), Dictionary(Level::L4),
                                    Dictionary(Level::L8), Dictionary(Level::L16)};
    for (std::size_t i = 0; i < 4; ++i) {
        std::vector<std::uint8_t> bytes = read_file(dir / files[i]);
        file_hashes[i] = sha256_of(bytes);
        if (hex_string(file_hashes[i]) != declared_hashes[i])
            throw ChecksumError("dictionary file " + files[i] + " does not match manifest hash");
        dicts[i] = deserialize_dictionary(bytes);
        if (set_idx(dicts[i].level()) != i)
            throw FormatError("dictionary file " + files[i] + " holds the wrong level");
    }

    if (manifest.contains("combined_sha256") &&
        manifest["combined_sha256"].get<std::string>() != hex_string(combine_hashes(file_hashes)))
        throw ChecksumError("manifest combined hash does not match dictionary files");

    DictionarySet set{std::move(dicts), combine_hashes(file_hashes)};
    complete_level2(set.dicts[0]);
    warm_rank_caches(set);
    return set;
}

}  // namespace mlbc
