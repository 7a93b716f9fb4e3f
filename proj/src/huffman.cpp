#include "mlbc/huffman.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>

#include "mlbc/errors.hpp"

namespace mlbc {

std::vector<std::uint8_t> build_code_lengths(std::span<const std::uint64_t> weights) {
    if (weights.empty()) throw InputError("build_code_lengths: empty alphabet");
    for (std::uint64_t w : weights)
        if (w == 0) throw InputError("build_code_lengths: weights must be positive");
    std::size_t n = weights.size();
    if (n == 1) return {1};

    struct Node {
        std::uint64_t weight;
        std::uint32_t parent;  // UINT32_MAX for the root
    };
    std::vector<Node> nodes;
    nodes.reserve(2 * n - 1);
    for (std::uint64_t w : weights) nodes.push_back({w, UINT32_MAX});

    // Min-heap over (weight, creation id); the id tie-break pins the
    // tree shape for equal-weight distributions.
    using Entry = std::pair<std::uint64_t, std::uint32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    for (std::uint32_t i = 0; i < n; ++i) heap.push({nodes[i].weight, i});

    while (heap.size() > 1) {
        auto [wa, a] = heap.top();
        heap.pop();
        auto [wb, b] = heap.top();
        heap.pop();
        std::uint64_t sum;
        if (__builtin_add_overflow(wa, wb, &sum))
            throw InputError("build_code_lengths: weight sum overflows");
        auto id = static_cast<std::uint32_t>(nodes.size());
        nodes.push_back({sum, UINT32_MAX});
        nodes[a].parent = id;
        nodes[b].parent = id;
        heap.push({sum, id});
    }

    std::vector<std::uint8_t> lengths(n);
    for (std::size_t i = 0; i < n; ++i) {
        unsigned depth = 0;
        for (std::uint32_t p = nodes[i].parent; p != UINT32_MAX; p = nodes[p].parent) ++depth;
        if (depth > kMaxCodeLength)
            throw InputError("build_code_lengths: optimal code exceeds 32 bits");
        lengths[i] = static_cast<std::uint8_t>(depth);
    }
    return lengths;
}

CodeBook CodeBook::from_lengths(std::vector<std::uint8_t> lengths) {
    if (lengths.empty()) throw InputError("CodeBook: empty length vector");

    CodeBook book;
    book.lengths_ = std::move(lengths);
    std::uint64_t kraft = 0;
    for (std::uint8_t len : book.lengths_) {
        if (len == 0 || len > kMaxCodeLength) throw InputError("CodeBook: length out of range [1,32]");
        kraft += 1ull << (kMaxCodeLength - len);
        if (kraft > (1ull << kMaxCodeLength)) throw InputError("CodeBook: Kraft inequality violated");
        book.max_length_ = std::max<unsigned>(book.max_length_, len);
    }

    std::size_t n = book.lengths_.size();
    book.canon_symbols_.resize(n);
    std::iota(book.canon_symbols_.begin(), book.canon_symbols_.end(), 0u);
    std::stable_sort(book.canon_symbols_.begin(), book.canon_symbols_.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return book.lengths_[a] < book.lengths_[b]; });

    book.codes_.resize(n);
    book.first_code_.assign(book.max_length_ + 1, 0);
    book.count_.assign(book.max_length_ + 1, 0);
    book.offset_.assign(book.max_length_ + 1, 0);

    std::uint32_t code = 0;
    unsigned prev_len = book.lengths_[book.canon_symbols_[0]];
    code = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t sym = book.canon_symbols_[i];
        unsigned len = book.lengths_[sym];
        if (i > 0) code = (code + 1) << (len - prev_len);
        if (book.count_[len] == 0) {
            book.first_code_[len] = code;
            book.offset_[len] = static_cast<std::uint32_t>(i);
        }
        ++book.count_[len];
        book.codes_[sym] = {code, static_cast<std::uint8_t>(len)};
        prev_len = len;
    }
    return book;
}

CodeWord CodeBook::code(std::uint32_t symbol) const {
    if (symbol >= codes_.size()) throw InputError("CodeBook: unknown symbol");
    return codes_[symbol];
}

void CodeBook::encode_symbol(BitWriter& out, std::uint32_t symbol) const {
    CodeWord cw = code(symbol);
    out.write_bits(cw.bits, cw.length);
}

std::uint32_t CodeBook::decode_symbol(BitReader& in) const {
    std::uint32_t code = 0;
    for (unsigned len = 1; len <= max_length_; ++len) {
        code = static_cast<std::uint32_t>((code << 1) | in.read_bit());
        if (count_[len] != 0 && code >= first_code_[len] && code - first_code_[len] < count_[len])
            return canon_symbols_[offset_[len] + (code - first_code_[len])];
    }
    throw CorruptionError("CodeBook: bit pattern matches no codeword");
}

std::uint64_t CodeBook::kraft_sum_q32() const {
    std::uint64_t kraft = 0;
    for (std::uint8_t len : lengths_) kraft += 1ull << (kMaxCodeLength - len);
    return kraft;
}

}  // namespace mlbc
