#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pgddm {

// Token alphabet. Real tokens are 0..size-1; mask_id is the reserved
// absorbing symbol and must lie outside that range.
struct Vocab {
    int32_t size = 0;
    int32_t mask_id = -1;

    Vocab() = default;
    Vocab(int32_t size_, int32_t mask_id_) : size(size_), mask_id(mask_id_) {
        if (size < 2) throw std::invalid_argument("vocab size must be >= 2");
        if (mask_id >= 0 && mask_id < size)
            throw std::invalid_argument("mask_id must not collide with a real token");
    }
    // Conventional layout: mask is the extra category after the real tokens.
    explicit Vocab(int32_t size_) : Vocab(size_, size_) {}

    bool is_mask(int32_t tok) const { return tok == mask_id; }
    bool is_real(int32_t tok) const { return tok >= 0 && tok < size; }
};

// Fixed-length token sequence; entries are real token ids or the mask id.
struct SequenceState {
    std::vector<int32_t> tokens;

    SequenceState() = default;
    explicit SequenceState(std::vector<int32_t> toks) : tokens(std::move(toks)) {}
    SequenceState(std::initializer_list<int32_t> toks) : tokens(toks) {}

    int length() const { return static_cast<int>(tokens.size()); }
    bool operator==(const SequenceState&) const = default;
};

inline SequenceState all_mask_state(const Vocab& v, int length) {
    return SequenceState(std::vector<int32_t>(static_cast<size_t>(length), v.mask_id));
}

inline bool fully_unmasked(const Vocab& v, const SequenceState& s) {
    for (int32_t t : s.tokens)
        if (v.is_mask(t)) return false;
    return true;
}

inline int masked_count(const Vocab& v, const SequenceState& s) {
    int n = 0;
    for (int32_t t : s.tokens) n += v.is_mask(t) ? 1 : 0;
    return n;
}

inline void check_state(const Vocab& v, const SequenceState& s) {
    for (int32_t t : s.tokens)
        if (!v.is_real(t) && !v.is_mask(t))
            throw std::invalid_argument("token id " + std::to_string(t) + " outside vocab");
}

// Lexicographic rank of a fully unmasked sequence (position 0 is the most
// significant digit). This is the row-major order used for tables and CSVs.
inline uint64_t sequence_rank(const Vocab& v, const SequenceState& s) {
    uint64_t r = 0;
    for (int32_t t : s.tokens) {
        if (!v.is_real(t)) throw std::invalid_argument("sequence_rank needs a fully unmasked state");
        r = r * static_cast<uint64_t>(v.size) + static_cast<uint64_t>(t);
    }
    return r;
}

inline SequenceState sequence_from_rank(const Vocab& v, int length, uint64_t rank) {
    SequenceState s(std::vector<int32_t>(static_cast<size_t>(length), 0));
    for (int i = length - 1; i >= 0; --i) {
        s.tokens[static_cast<size_t>(i)] = static_cast<int32_t>(rank % static_cast<uint64_t>(v.size));
        rank /= static_cast<uint64_t>(v.size);
    }
    return s;
}

// Rank over the extended alphabet (mask encoded as digit V); used to index
// dense tables over partially masked states.
inline uint64_t masked_rank(const Vocab& v, const SequenceState& s) {
    const uint64_t base = static_cast<uint64_t>(v.size) + 1;
    uint64_t r = 0;
    for (int32_t t : s.tokens) {
        const uint64_t digit = v.is_mask(t) ? static_cast<uint64_t>(v.size) : static_cast<uint64_t>(t);
        r = r * base + digit;
    }
    return r;
}

// Renders tokens as letters for small vocabularies ("abca"), otherwise as
// dash-separated ids. Mask renders as '_'.
inline std::string sequence_string(const Vocab& v, const SequenceState& s) {
    std::string out;
    const bool lettered = v.size <= 26;
    for (size_t i = 0; i < s.tokens.size(); ++i) {
        const int32_t t = s.tokens[i];
        if (lettered) {
            out.push_back(v.is_mask(t) ? '_' : static_cast<char>('a' + t));
        } else {
            if (i) out.push_back('-');
            out += v.is_mask(t) ? "_" : std::to_string(t);
        }
    }
    return out;
}

inline uint64_t pow_u64(uint64_t base, int exp) {
    uint64_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

}  // namespace pgddm
