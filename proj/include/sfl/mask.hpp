#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <vector>

#include "sfl/errors.hpp"

namespace sfl {

// Fixed-width dynamic bitset. Used both for label sets (width = number of
// labels) and hypothesis version spaces (width = number of hypotheses).
class Mask {
 public:
  Mask() : size_(0) {}
  explicit Mask(int size) : size_(size), words_((size + 63) / 64, 0) {
    if (size < 0) throw ConfigError("Mask: negative size");
  }

  static Mask full(int size) {
    Mask m(size);
    for (int i = 0; i < size; ++i) m.set(i);
    return m;
  }

  int size() const { return size_; }

  void set(int i) { words_[word(i)] |= bit(i); }
  void reset(int i) { words_[word(i)] &= ~bit(i); }
  bool test(int i) const { return (words_[word(i)] & bit(i)) != 0; }

  bool none() const {
    for (uint64_t w : words_)
      if (w != 0) return false;
    return true;
  }
  bool any() const { return !none(); }

  int count() const {
    int c = 0;
    for (uint64_t w : words_) c += std::popcount(w);
    return c;
  }

  // Index of the lowest set bit, or -1 when empty.
  int first() const {
    for (size_t k = 0; k < words_.size(); ++k)
      if (words_[k] != 0) return static_cast<int>(k * 64 + std::countr_zero(words_[k]));
    return -1;
  }

  Mask operator&(const Mask& o) const {
    Mask r(size_);
    for (size_t k = 0; k < words_.size(); ++k) r.words_[k] = words_[k] & o.words_[k];
    return r;
  }
  Mask operator|(const Mask& o) const {
    Mask r(size_);
    for (size_t k = 0; k < words_.size(); ++k) r.words_[k] = words_[k] | o.words_[k];
    return r;
  }
  // Bits present in *this and absent from o.
  Mask and_not(const Mask& o) const {
    Mask r(size_);
    for (size_t k = 0; k < words_.size(); ++k) r.words_[k] = words_[k] & ~o.words_[k];
    return r;
  }
  // Complement within the fixed width.
  Mask complement() const {
    Mask r = full(size_);
    for (size_t k = 0; k < words_.size(); ++k) r.words_[k] &= ~words_[k];
    return r;
  }

  bool intersects(const Mask& o) const {
    for (size_t k = 0; k < words_.size(); ++k)
      if ((words_[k] & o.words_[k]) != 0) return true;
    return false;
  }
  bool is_subset_of(const Mask& o) const {
    for (size_t k = 0; k < words_.size(); ++k)
      if ((words_[k] & ~o.words_[k]) != 0) return false;
    return true;
  }

  bool operator==(const Mask& o) const { return size_ == o.size_ && words_ == o.words_; }

  // Orders masks by their value as a little-endian binary number (bit i is
  // the membership of element i). This is the canonical set order.
  std::strong_ordering operator<=>(const Mask& o) const {
    if (size_ != o.size_) return size_ <=> o.size_;
    for (size_t k = words_.size(); k-- > 0;)
      if (words_[k] != o.words_[k]) return words_[k] <=> o.words_[k];
    return std::strong_ordering::equal;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (size_t k = 0; k < words_.size(); ++k) {
      uint64_t w = words_[k];
      while (w != 0) {
        int b = std::countr_zero(w);
        fn(static_cast<int>(k * 64 + b));
        w &= w - 1;
      }
    }
  }

  std::vector<int> to_indices() const {
    std::vector<int> out;
    out.reserve(count());
    for_each([&](int i) { out.push_back(i); });
    return out;
  }

  size_t hash() const {
    uint64_t h = 1469598103934665603ull;
    for (uint64_t w : words_) {
      h ^= w;
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h ^ static_cast<uint64_t>(size_));
  }

 private:
  static size_t word(int i) { return static_cast<size_t>(i) / 64; }
  static uint64_t bit(int i) { return uint64_t{1} << (i % 64); }

  int size_;
  std::vector<uint64_t> words_;
};

struct MaskHash {
  size_t operator()(const Mask& m) const { return m.hash(); }
};

}  // namespace sfl
