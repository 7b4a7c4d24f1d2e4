#pragma once

// Fixed-weight bit strings m(s, pi) and the transposition pairing that maps
// one weight-s string onto another.
//
// Positions are 1-based and counted from the right: position p is bit p-1 of
// the string's binary value. The index pi into a weight class is 1-based.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qvote/errors.hpp"

namespace qvote {

inline constexpr int kMaxStringLength = 24;

/// An n-bit string stored as its binary value.
class BitString {
  public:
    BitString(int length, std::uint32_t value) : length_(length), value_(value) {
        if (length_ < 0 || length_ > 32) {
            throw std::invalid_argument("bit string length out of range");
        }
        if (length_ < 32 && (value_ >> length_) != 0) {
            throw std::invalid_argument("value does not fit in " + std::to_string(length_) +
                                        " bits");
        }
    }

    /// Parses "b_n ... b_1"; the leftmost character is position n.
    static BitString parse(std::string_view text) {
        if (text.size() > 32) {
            throw std::invalid_argument("bit string longer than 32 characters");
        }
        std::uint32_t value = 0;
        for (char c : text) {
            if (c != '0' && c != '1') {
                throw std::invalid_argument("bit string may only contain '0' and '1': \"" +
                                            std::string(text) + "\"");
            }
            value = (value << 1) | static_cast<std::uint32_t>(c - '0');
        }
        return BitString(static_cast<int>(text.size()), value);
    }

    int length() const { return length_; }
    std::uint32_t value() const { return value_; }
    int weight() const { return std::popcount(value_); }

    int bit(int position) const {
        check_position(position);
        return static_cast<int>((value_ >> (position - 1)) & 1U);
    }

    BitString with_bit(int position, int b) const {
        check_position(position);
        const std::uint32_t m = std::uint32_t{1} << (position - 1);
        return BitString(length_, b ? (value_ | m) : (value_ & ~m));
    }

    std::string str() const {
        std::string out(static_cast<std::size_t>(length_), '0');
        for (int p = 1; p <= length_; ++p) {
            if (bit(p)) {
                out[static_cast<std::size_t>(length_ - p)] = '1';
            }
        }
        return out;
    }

    friend bool operator==(const BitString &, const BitString &) = default;
    friend auto operator<=>(const BitString &a, const BitString &b) {
        if (auto c = a.length_ <=> b.length_; c != 0) {
            return c;
        }
        return a.value_ <=> b.value_;
    }

  private:
    void check_position(int position) const {
        if (position < 1 || position > length_) {
            throw std::invalid_argument("position " + std::to_string(position) +
                                        " outside 1.." + std::to_string(length_));
        }
    }

    int length_;
    std::uint32_t value_;
};

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return r;
}

/// All n-bit strings of Hamming weight s in increasing binary order.
class WeightClass {
  public:
    WeightClass(int n, int s) : n_(n), s_(s) {
        if (n < 0 || n > kMaxStringLength) {
            throw ResourceLimit("string length " + std::to_string(n) + " outside 0.." +
                                std::to_string(kMaxStringLength));
        }
        if (s < 0 || s > n) {
            throw std::invalid_argument("weight " + std::to_string(s) + " outside 0.." +
                                        std::to_string(n));
        }
        values_.reserve(binomial(n, s));
        if (s == 0) {
            values_.push_back(0);
            return;
        }
        // Gosper's hack: next larger integer with the same popcount.
        const std::uint64_t limit = std::uint64_t{1} << n;
        std::uint64_t v = (std::uint64_t{1} << s) - 1;
        while (v < limit) {
            values_.push_back(static_cast<std::uint32_t>(v));
            const std::uint64_t c = v & (~v + 1);
            const std::uint64_t r = v + c;
            v = (((r ^ v) >> 2) / c) | r;
        }
    }

    int n() const { return n_; }
    int s() const { return s_; }
    /// d_s = binomial(n, s)
    std::size_t dim() const { return values_.size(); }

    /// m(s, pi) for 1 <= pi <= d_s.
    BitString at(std::size_t pi) const {
        if (pi < 1 || pi > values_.size()) {
            throw std::invalid_argument("index " + std::to_string(pi) + " outside 1.." +
                                        std::to_string(values_.size()));
        }
        return BitString(n_, values_[pi - 1]);
    }

    std::vector<BitString> strings() const {
        std::vector<BitString> out;
        out.reserve(values_.size());
        for (auto v : values_) {
            out.emplace_back(n_, v);
        }
        return out;
    }

    /// Raw binary values, which are also the basis indices of V_s.
    const std::vector<std::uint32_t> &values() const { return values_; }

    std::size_t index_of(const BitString &m) const {
        if (m.length() != n_) {
            throw std::invalid_argument("string length " + std::to_string(m.length()) +
                                        " does not match " + std::to_string(n_));
        }
        if (m.weight() != s_) {
            throw std::invalid_argument("string " + m.str() + " has weight " +
                                        std::to_string(m.weight()) + ", expected " +
                                        std::to_string(s_));
        }
        const auto it = std::lower_bound(values_.begin(), values_.end(), m.value());
        return static_cast<std::size_t>(it - values_.begin()) + 1;
    }

  private:
    int n_;
    int s_;
    std::vector<std::uint32_t> values_;
};

inline WeightClass enumerate_weight_class(int n, int s) { return WeightClass(n, s); }

inline std::size_t index_of(const WeightClass &cls, const BitString &m) {
    return cls.index_of(m);
}

/// Differing positions between two equal-weight strings, ascending:
/// w0 where m has 0 (and m' has 1), w1 where m has 1 (and m' has 0).
struct DiffSets {
    std::vector<int> w0;
    std::vector<int> w1;
};

inline DiffSets diff_sets(const BitString &m, const BitString &m_prime) {
    if (m.length() != m_prime.length()) {
        throw std::invalid_argument("strings differ in length");
    }
    if (m.weight() != m_prime.weight()) {
        throw std::invalid_argument("strings " + m.str() + " and " + m_prime.str() +
                                    " differ in weight");
    }
    DiffSets d;
    for (int p = 1; p <= m.length(); ++p) {
        const int a = m.bit(p);
        if (a == m_prime.bit(p)) {
            continue;
        }
        (a == 0 ? d.w0 : d.w1).push_back(p);
    }
    return d;
}

/// Disjoint position pairs; each pair is (position from w0, position from w1).
struct SwapPairing {
    std::vector<std::pair<int, int>> pairs;

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }
};

/// k-th smallest of w0 paired with the k-th smallest of w1.
inline SwapPairing swap_pairing(const BitString &m, const BitString &m_prime) {
    const DiffSets d = diff_sets(m, m_prime);
    SwapPairing out;
    for (std::size_t k = 0; k < d.w0.size(); ++k) {
        out.pairs.emplace_back(d.w0[k], d.w1[k]);
    }
    return out;
}

inline BitString apply_swaps(const BitString &m, const SwapPairing &pairing) {
    std::uint64_t used = 0;
    auto claim = [&](int p) {
        if (p < 1 || p > m.length()) {
            throw std::invalid_argument("swap position " + std::to_string(p) +
                                        " outside 1.." + std::to_string(m.length()));
        }
        const std::uint64_t bit = std::uint64_t{1} << (p - 1);
        if (used & bit) {
            throw std::invalid_argument("swap position " + std::to_string(p) +
                                        " appears in more than one pair");
        }
        used |= bit;
    };
    BitString out = m;
    for (const auto &[a, b] : pairing.pairs) {
        claim(a);
        claim(b);
        const int bit_a = out.bit(a);
        out = out.with_bit(a, out.bit(b)).with_bit(b, bit_a);
    }
    return out;
}

} // namespace qvote
