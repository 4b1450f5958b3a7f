#pragma once

#include <cassert>
#include <utility>

namespace lipcert {

// Upper-triangular, row-major enumeration of the entries of a symmetric
// s x s matrix: (0,0), (0,1), ..., (0,s-1), (1,1), ...

constexpr int sym_entry_count(int s) { return s * (s + 1) / 2; }

constexpr int sym_entry_index(int i, int j, int s) {
  if (i > j) std::swap(i, j);
  return i * s - i * (i - 1) / 2 + (j - i);
}

inline std::pair<int, int> sym_entry_pair(int index, int s) {
  assert(index >= 0 && index < sym_entry_count(s));
  int i = 0;
  while (index >= s - i) {
    index -= s - i;
    ++i;
  }
  return {i, i + index};
}

}  // namespace lipcert
