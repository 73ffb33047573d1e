#pragma once

#include <cstddef>
#include <vector>

namespace hap {

// Calls fn(idx) for every k-subset of {0..n-1} in lexicographic order; stops early when fn returns true.
// Returns true iff fn stopped the enumeration.
template <class Fn>
bool for_each_combination(size_t n, size_t k, Fn&& fn) {
  if (k > n) return false;
  std::vector<size_t> idx(k);
  for (size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (fn(static_cast<const std::vector<size_t>&>(idx))) return true;
    size_t j = k;
    while (j > 0 && idx[j - 1] == n - k + j - 1) --j;
    if (j == 0) return false;
    ++idx[j - 1];
    for (size_t m = j; m < k; ++m) idx[m] = idx[m - 1] + 1;
  }
}

}  // namespace hap
