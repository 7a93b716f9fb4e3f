#include "mlbc/codec.hpp"

#include <algorithm>
#include <cstring>

#include "mlbc/binio.hpp"
#include "mlbc/bitstream.hpp"

namespace mlbc {

namespace {

constexpr char kMagic[4] = {'M', 'L', 'B', 'C'};
constexpr std::uint16_t kVersion = 1;

std::size_t coding_idx(Level lv) {
    switch (lv) {
        case Level::L16: return 0;
        case Level::L8: return 1;
        case Level::L4: return 2;
        case Level::L2: return 3;
    }
    throw InputError("invalid level");
}

Level child_level(Level lv) { return level_from_side(level_side(lv) / 2); }

// Builds the quadtree for one block given its level-16 digits; children
// reuse digit substrings instead of re-reading pixels.
std::uint32_t plan_node(BlockPlan& out, const DictionarySet& dicts, Level level,
                        std::string digits) {
    auto index = static_cast<std::uint32_t>(out.nodes.size());
    out.nodes.push_back({level, true, {}, {}});
    if (level == Level::L2 || dicts.at(level).contains(digits)) {
        out.nodes[index].digits = std::move(digits);
        return index;
    }
    out.nodes[index].coded = false;
    std::size_t quarter = level_digits(level) / 4;
    for (int q = 0; q < 4; ++q) {
        std::uint32_t child = plan_node(out, dicts, child_level(level),
                                        digits.substr(static_cast<std::size_t>(q) * quarter, quarter));
        out.nodes[index].child[static_cast<std::size_t>(q)] = child;
    }
    return index;
}

}  // namespace

std::vector<BlockPlan> plan(const PaddedImage& img, const DictionarySet& dicts) {
    std::vector<BlockPlan> plans;
    plans.reserve(static_cast<std::size_t>(img.image.width / 16) * (img.image.height / 16));
    for (int y = 0; y < img.image.height; y += 16)
        for (int x = 0; x < img.image.width; x += 16) {
            BlockPlan p;
            plan_node(p, dicts, Level::L16, block_to_key(img.image, x, y, Level::L16).digits);
            plans.push_back(std::move(p));
        }
    return plans;
}

std::array<ImageCodeBook, 4> build_image_codebooks(const std::vector<BlockPlan>& plans,
                                                   const DictionarySet& dicts) {
    std::array<std::unordered_map<std::string, bool>, 4> used;  // digits -> (unused value)
    std::array<std::uint64_t, 4> splits{};
    std::array<bool, 4> level_present{};

    for (const BlockPlan& p : plans)
        for (const BlockPlan::Node& node : p.nodes) {
            std::size_t i = coding_idx(node.level);
            level_present[i] = true;
            if (node.coded)
                used[i].emplace(node.digits, true);
            else
                ++splits[i];
        }

    std::array<ImageCodeBook, 4> books;
    for (Level lv : kCodingLevels) {
        std::size_t i = coding_idx(lv);
        ImageCodeBook& icb = books[i];
        icb.level = lv;
        if (!level_present[i]) continue;
        icb.has_escape = lv != Level::L2;

        const Dictionary& dict = dicts.at(lv);
        std::vector<std::pair<std::uint64_t, std::string>> by_rank;  // (rank, digits)
        by_rank.reserve(used[i].size());
        for (const auto& [digits, unused] : used[i])
            by_rank.emplace_back(dict.rank_of(digits).value(), digits);
        std::sort(by_rank.begin(), by_rank.end());

        std::vector<std::uint64_t> weights;
        weights.reserve(by_rank.size() + 1);
        if (icb.has_escape) weights.push_back(std::max<std::uint64_t>(splits[i], 1));
        for (auto& [rank, digits] : by_rank) {
            icb.ranks.push_back(rank);
            weights.push_back(dict.count_of(digits));
            icb.symbol_of.emplace(digits,
                                  static_cast<std::uint32_t>(icb.keys.size() + (icb.has_escape ? 1 : 0)));
            icb.keys.push_back(std::move(digits));
        }
        icb.book = CodeBook::from_weights(weights);
    }
    return books;
}

namespace {

void write_symbol_tables(ByteWriter& w, const std::array<ImageCodeBook, 4>& books) {
    for (Level lv : kCodingLevels) {
        const ImageCodeBook& icb = books[coding_idx(lv)];
        if (!icb.present()) {
            w.u32(0);
            continue;
        }
        w.u32(static_cast<std::uint32_t>(icb.symbol_count()));
        const auto& lengths = icb.book.lengths();
        std::size_t sym = 0;
        if (icb.has_escape) w.u8(lengths[sym++]);
        for (std::size_t k = 0; k < icb.keys.size(); ++k, ++sym) {
            w.varint(icb.ranks[k]);
            w.u8(lengths[sym]);
        }
    }
}

void emit_node(const BlockPlan& p, std::uint32_t index, const std::array<ImageCodeBook, 4>& books,
               BitWriter& bits) {
    const BlockPlan::Node& node = p.nodes[index];
    const ImageCodeBook& icb = books[coding_idx(node.level)];
    if (node.coded) {
        icb.book.encode_symbol(bits, icb.symbol_of.at(node.digits));
    } else {
        icb.book.encode_symbol(bits, 0);  // ESCAPE
        for (std::uint32_t child : node.child) emit_node(p, child, books, bits);
    }
}

struct DecodedBook {
    bool present = false;
    bool has_escape = false;
    std::vector<std::string> keys;  // symbol index minus has_escape -> digits
    CodeBook book;
};

DecodedBook read_symbol_table(ByteReader& r, Level lv, const Dictionary& dict) {
    DecodedBook out;
    std::uint32_t count = r.u32();
    if (count == 0) return out;
    out.present = true;
    out.has_escape = lv != Level::L2;
    if (count > dict.size() + (out.has_escape ? 1 : 0))
        throw CorruptionError("container: symbol table larger than dictionary");

    std::vector<std::uint8_t> lengths;
    lengths.reserve(count);
    if (out.has_escape) lengths.push_back(r.u8());
    std::uint64_t prev_rank = 0;
    bool first = true;
    for (std::uint32_t k = out.has_escape ? 1 : 0; k < count; ++k) {
        std::uint64_t rank = r.varint();
        if (!first && rank <= prev_rank)
            throw CorruptionError("container: symbol ranks not strictly increasing");
        if (rank >= dict.size()) throw CorruptionError("container: symbol rank out of range");
        out.keys.push_back(dict.entry_at_rank(static_cast<std::size_t>(rank)).digits);
        lengths.push_back(r.u8());
        prev_rank = rank;
        first = false;
    }
    try {
        out.book = CodeBook::from_lengths(std::move(lengths));
    } catch (const InputError& e) {
        throw CorruptionError(std::string("container: invalid code lengths: ") + e.what());
    }
    return out;
}

void decode_node(BinaryImage& img, int x0, int y0, Level level,
                 const std::array<DecodedBook, 4>& books, BitReader& bits) {
    const DecodedBook& db = books[coding_idx(level)];
    if (!db.present) throw CorruptionError("container: payload uses a level with no symbol table");
    std::uint32_t symbol = db.book.decode_symbol(bits);
    if (db.has_escape && symbol == 0) {
        int h = level_side(level) / 2;
        Level child = child_level(level);
        decode_node(img, x0, y0, child, books, bits);
        decode_node(img, x0 + h, y0, child, books, bits);
        decode_node(img, x0, y0 + h, child, books, bits);
        decode_node(img, x0 + h, y0 + h, child, books, bits);
        return;
    }
    const std::string& digits = db.keys[symbol - (db.has_escape ? 1 : 0)];
    paste_block(img, x0, y0, PatchKey{level, digits});
}

}  // namespace

std::vector<std::uint8_t> encode(const BinaryImage& img, const DictionarySet& dicts) {
    PaddedImage padded = pad_to_16(img);
    std::vector<BlockPlan> plans = plan(padded, dicts);
    std::array<ImageCodeBook, 4> books = build_image_codebooks(plans, dicts);

    BitWriter bits;
    for (const BlockPlan& p : plans) emit_node(p, 0, books, bits);

    ByteWriter w;
    w.raw({reinterpret_cast<const std::uint8_t*>(kMagic), sizeof(kMagic)});
    w.u16(kVersion);
    w.u16(0);  // flags
    w.u32(static_cast<std::uint32_t>(img.width));
    w.u32(static_cast<std::uint32_t>(img.height));
    w.raw(dicts.manifest_hash);
    write_symbol_tables(w, books);
    w.u64(bits.bit_length());
    w.raw(bits.bytes());
    w.u32(crc32_of(w.bytes()));
    return w.take();
}

BinaryImage decode(std::span<const std::uint8_t> container, const DictionarySet& dicts) {
    if (container.size() < 8) throw TruncationError("container: too short");
    if (std::memcmp(container.data(), kMagic, sizeof(kMagic)) != 0)
        throw FormatError("container: bad magic");

    ByteReader r(container);
    r.raw(sizeof(kMagic));
    std::uint16_t version = r.u16();
    if (version != kVersion)
        throw VersionError("container: unsupported version " + std::to_string(version));
    std::uint16_t flags = r.u16();
    if (flags != 0) throw FormatError("container: unknown flags");

    if (crc32_of(container.subspan(0, container.size() - 4)) !=
        (static_cast<std::uint32_t>(container[container.size() - 4]) |
         (static_cast<std::uint32_t>(container[container.size() - 3]) << 8) |
         (static_cast<std::uint32_t>(container[container.size() - 2]) << 16) |
         (static_cast<std::uint32_t>(container[container.size() - 1]) << 24)))
        throw CorruptionError("container: CRC32 mismatch");

    try {
        std::uint32_t orig_width = r.u32();
        std::uint32_t orig_height = r.u32();
        if (orig_width < 1 || orig_height < 1 || orig_width > (1u << 24) ||
            orig_height > (1u << 24) ||
            static_cast<std::uint64_t>(orig_width) * orig_height > (1ull << 31))
            throw CorruptionError("container: implausible dimensions");

        std::vector<std::uint8_t> hash = r.raw(32);
        if (!std::equal(hash.begin(), hash.end(), dicts.manifest_hash.begin()))
            throw WrongDictionaryError(
                "container was encoded against a different dictionary set");

        std::array<DecodedBook, 4> books;
        for (Level lv : kCodingLevels) books[coding_idx(lv)] = read_symbol_table(r, lv, dicts.at(lv));

        std::uint64_t payload_bits = r.u64();
        std::size_t payload_bytes = static_cast<std::size_t>((payload_bits + 7) / 8);
        if (r.remaining() < payload_bytes + 4) throw TruncationError("container: payload truncated");
        std::span<const std::uint8_t> payload = container.subspan(r.position(), payload_bytes);

        BinaryImage padded;
        padded.width = static_cast<int>((orig_width + 15) / 16 * 16);
        padded.height = static_cast<int>((orig_height + 15) / 16 * 16);
        padded.bits.assign(static_cast<std::size_t>(padded.width) * padded.height, 0);

        BitReader bits(payload, payload_bits);
        for (int y = 0; y < padded.height; y += 16)
            for (int x = 0; x < padded.width; x += 16)
                decode_node(padded, x, y, Level::L16, books, bits);
        if (bits.position() != payload_bits)
            throw CorruptionError("container: payload bit count does not match content");

        PaddedImage p{std::move(padded), static_cast<int>(orig_width),
                      static_cast<int>(orig_height)};
        return crop(p);
    } catch (const TruncationError& e) {
        throw CorruptionError(std::string("container: ") + e.what());
    }
}

double compression_ratio(const BinaryImage& original, std::size_t container_bytes) {
    double pixels = static_cast<double>(original.width) * static_cast<double>(original.height);
    return pixels / (8.0 * static_cast<double>(container_bytes));
}

ContainerInfo inspect_container(std::span<const std::uint8_t> container) {
    if (container.size() < 8) throw TruncationError("container: too short");
    if (std::memcmp(container.data(), kMagic, sizeof(kMagic)) != 0)
        throw FormatError("container: bad magic");

    ByteReader r(container);
    r.raw(sizeof(kMagic));
    ContainerInfo info;
    info.container_bytes = container.size();
    info.version = r.u16();
    if (info.version != kVersion)
        throw VersionError("container: unsupported version " + std::to_string(info.version));
    r.u16();  // flags
    info.orig_width = r.u32();
    info.orig_height = r.u32();
    std::vector<std::uint8_t> hash = r.raw(32);
    std::copy(hash.begin(), hash.end(), info.manifest_hash.begin());
    for (Level lv : kCodingLevels) {
        std::uint32_t count = r.u32();
        info.symbol_counts[coding_idx(lv)] = count;
        if (count == 0) continue;
        bool has_escape = lv != Level::L2;
        if (has_escape) r.u8();
        for (std::uint32_t k = has_escape ? 1 : 0; k < count; ++k) {
            r.varint();
            r.u8();
        }
    }
    info.payload_bits = r.u64();
    return info;
}

}  // namespace mlbc
