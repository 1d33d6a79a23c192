#pragma once

// Rate-1/2 convolutional code with soft-input Viterbi decoding and a block
// interleaver. Bits are 0/1 bytes; soft values are LLRs where a positive
// value favours bit 0.

#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hybridlink/errors.hpp"

namespace hybridlink {

using Bits = std::vector<std::uint8_t>;

struct CodeConfig {
    static constexpr unsigned constraint_len = 7;
    static constexpr unsigned memory = constraint_len - 1;
    static constexpr unsigned states = 1u << memory;
    unsigned g0 = 0133;
    unsigned g1 = 0171;

    std::size_t coded_len(std::size_t info_bits) const { return 2 * (info_bits + memory); }
    // Largest info block whose zero-tailed codeword fits into `coded_bits`.
    std::size_t info_len_for(std::size_t coded_bits) const {
        return coded_bits / 2 > memory ? coded_bits / 2 - memory : 0;
    }
};

namespace detail {
// Register holds the newest input at bit (K-1), oldest at bit 0.
inline std::array<std::uint8_t, 2> conv_output(unsigned reg, const CodeConfig& cfg) {
    return {static_cast<std::uint8_t>(std::popcount(reg & cfg.g0) & 1),
            static_cast<std::uint8_t>(std::popcount(reg & cfg.g1) & 1)};
}
}  // namespace detail

inline Bits conv_encode(std::span<const std::uint8_t> bits, const CodeConfig& cfg = {}) {
    Bits out;
    out.reserve(cfg.coded_len(bits.size()));
    unsigned state = 0;  // previous `memory` inputs, newest at bit memory-1
    auto push = [&](unsigned b) {
        const unsigned reg = (b << CodeConfig::memory) | state;
        const auto o = detail::conv_output(reg, cfg);
        out.push_back(o[0]);
        out.push_back(o[1]);
        state = reg >> 1;
    };
    for (auto b : bits) push(b & 1u);
    for (unsigned i = 0; i < CodeConfig::memory; ++i) push(0);
    return out;
}

/// Maximum-likelihood sequence decoding of a zero-tailed codeword: returns the
/// information bits maximising sum_i llr_i * (1 - 2 c_i). On equal metrics the
/// survivor whose dropped bit is zero wins.
inline Bits viterbi_decode(std::span<const double> llrs, const CodeConfig& cfg = {}) {
    if (llrs.size() % 2 != 0 || llrs.size() < 2 * CodeConfig::memory)
        throw FramingError("LLR count is not a valid zero-tailed codeword length");
    const std::size_t steps = llrs.size() / 2;
    const std::size_t info = steps - CodeConfig::memory;
    constexpr unsigned S = CodeConfig::states;
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();

    // Branch outputs for each (state, input) as +-1 symbols.
    std::array<std::array<std::array<double, 2>, 2>, S> branch{};
    for (unsigned s = 0; s < S; ++s)
        for (unsigned b = 0; b < 2; ++b) {
            const auto o = detail::conv_output((b << CodeConfig::memory) | s, cfg);
            branch[s][b] = {1.0 - 2.0 * o[0], 1.0 - 2.0 * o[1]};
        }

    std::array<double, S> metric;
    metric.fill(neg_inf);
    metric[0] = 0.0;
    std::array<double, S> next{};
    // decision[t][s] = dropped (oldest) bit of the surviving predecessor.
    std::vector<std::array<std::uint8_t, S>> decision(steps);

    for (std::size_t t = 0; t < steps; ++t) {
        const double l0 = llrs[2 * t];
        const double l1 = llrs[2 * t + 1];
        for (unsigned ns = 0; ns < S; ++ns) {
            // ns = (b << (m-1)) | (prev >> 1); prev = ((ns << 1) & mask) | dropped
            const unsigned b = ns >> (CodeConfig::memory - 1);
            const unsigned base = (ns << 1) & (S - 1);
            const unsigned p0 = base;
            const unsigned p1 = base | 1u;
            const double m0 = metric[p0] + l0 * branch[p0][b][0] + l1 * branch[p0][b][1];
            const double m1 = metric[p1] + l0 * branch[p1][b][0] + l1 * branch[p1][b][1];
            if (m1 > m0) {
                next[ns] = m1;
                decision[t][ns] = 1;
            } else {
                next[ns] = m0;
                decision[t][ns] = 0;
            }
        }
        metric = next;
    }

    Bits out(steps);
    unsigned state = 0;  // zero tail
    for (std::size_t t = steps; t-- > 0;) {
        out[t] = static_cast<std::uint8_t>(state >> (CodeConfig::memory - 1));
        state = ((state << 1) & (S - 1)) | decision[t][state];
    }
    out.resize(info);
    return out;
}

/// Row-in/column-out block permutation over exactly rows*cols elements.
class BlockInterleaver {
public:
    BlockInterleaver(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
        if (rows == 0 || cols == 0) throw ConfigError("interleaver dimensions must be positive");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return rows_ * cols_; }

    // Position in the interleaved stream of input element i.
    std::size_t map(std::size_t i) const { return (i % cols_) * rows_ + i / cols_; }

    template <class T>
    std::vector<T> interleave(std::span<const T> in) const {
        check(in.size());
        std::vector<T> out(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) out[map(i)] = in[i];
        return out;
    }

    template <class T>
    std::vector<T> deinterleave(std::span<const T> in) const {
        check(in.size());
        std::vector<T> out(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[map(i)];
        return out;
    }

    template <class T>
    std::vector<T> interleave(const std::vector<T>& in) const { return interleave(std::span<const T>(in)); }
    template <class T>
    std::vector<T> deinterleave(const std::vector<T>& in) const { return deinterleave(std::span<const T>(in)); }

private:
    void check(std::size_t n) const {
        if (n != size()) throw FramingError("sequence length does not match interleaver block");
    }

    std::size_t rows_;
    std::size_t cols_;
};

}  // namespace hybridlink
