#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace hap {

// Fixed-width bitset sized at runtime; used for task states and edit masks.
class Bits {
 public:
  Bits() = default;
  explicit Bits(size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  size_t size() const { return n_; }

  void set(size_t i) { w_[i >> 6] |= (uint64_t{1} << (i & 63)); }
  void reset(size_t i) { w_[i >> 6] &= ~(uint64_t{1} << (i & 63)); }
  void assign(size_t i, bool v) { v ? set(i) : reset(i); }
  bool test(size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }

  bool any() const {
    for (auto x : w_)
      if (x) return true;
    return false;
  }

  size_t count() const {
    size_t c = 0;
    for (auto x : w_) c += static_cast<size_t>(std::popcount(x));
    return c;
  }

  // True iff every bit of `sub` is also set here.
  bool contains(const Bits& sub) const {
    for (size_t i = 0; i < w_.size(); ++i)
      if ((sub.w_[i] & ~w_[i]) != 0) return false;
    return true;
  }

  bool intersects(const Bits& o) const {
    for (size_t i = 0; i < w_.size(); ++i)
      if (o.w_[i] & w_[i]) return true;
    return false;
  }

  Bits& operator|=(const Bits& o) {
    for (size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
    return *this;
  }
  Bits& operator&=(const Bits& o) {
    for (size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
    return *this;
  }
  Bits& subtract(const Bits& o) {
    for (size_t i = 0; i < w_.size(); ++i) w_[i] &= ~o.w_[i];
    return *this;
  }

  friend Bits operator|(Bits a, const Bits& b) { return a |= b; }
  friend Bits operator&(Bits a, const Bits& b) { return a &= b; }

  std::vector<size_t> indices() const {
    std::vector<size_t> out;
    for (size_t i = 0; i < w_.size(); ++i) {
      uint64_t x = w_[i];
      while (x) {
        int b = std::countr_zero(x);
        out.push_back(i * 64 + static_cast<size_t>(b));
        x &= x - 1;
      }
    }
    return out;
  }

  friend bool operator==(const Bits& a, const Bits& b) { return a.w_ == b.w_; }
  friend bool operator!=(const Bits& a, const Bits& b) { return !(a == b); }
  friend bool operator<(const Bits& a, const Bits& b) { return a.w_ < b.w_; }

  size_t hash() const {
    size_t h = 1469598103934665603ull;
    for (auto x : w_) {
      h ^= std::hash<uint64_t>{}(x);
      h *= 1099511628211ull;
    }
    return h;
  }

 private:
  size_t n_ = 0;
  std::vector<uint64_t> w_;
};

struct BitsHash {
  size_t operator()(const Bits& b) const { return b.hash(); }
};

}  // namespace hap
