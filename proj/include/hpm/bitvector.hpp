#pragma once

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace hpm {

// Fixed-width bitset over dataset rows. Unused tail bits are kept zero, so
// word-wise counting never needs masking as long as at least one operand of
// every AND chain is a stored vector.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t bits)
      : bits_(bits), words_((bits + 63) / 64, 0) {}

  std::size_t size() const { return bits_; }
  std::size_t word_count() const { return words_.size(); }

  bool test(std::size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  void clear() { std::fill(words_.begin(), words_.end(), 0); }

  std::size_t count() const {
    std::size_t c = 0;
    for (std::uint64_t w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  void or_with(const BitVector& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
  }
  void and_with(const BitVector& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
  }
  void assign_and(const BitVector& a, const BitVector& b) {
    bits_ = a.bits_;
    words_.resize(a.words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i)
      words_[i] = a.words_[i] & b.words_[i];
  }

  std::size_t count_and(const BitVector& o) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i)
      c += static_cast<std::size_t>(std::popcount(words_[i] & o.words_[i]));
    return c;
  }
  std::size_t count_or(const BitVector& o) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i)
      c += static_cast<std::size_t>(std::popcount(words_[i] | o.words_[i]));
    return c;
  }

  // Position of the k-th set bit (0-based). Caller guarantees k < count().
  std::size_t select(std::size_t k) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      std::uint64_t w = words_[wi];
      auto pop = static_cast<std::size_t>(std::popcount(w));
      if (k >= pop) {
        k -= pop;
        continue;
      }
      while (true) {
        std::size_t bit = static_cast<std::size_t>(std::countr_zero(w));
        if (k == 0) return wi * 64 + bit;
        --k;
        w &= w - 1;
      }
    }
    assert(false && "select out of range");
    return bits_;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::size_t bits_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace hpm
