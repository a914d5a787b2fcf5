#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vsp/errors.hpp"

namespace vsp {

using Vector = std::vector<double>;
using ConstVectorView = std::span<const double>;

inline void require_dim(ConstVectorView v, std::size_t expected, const char* what) {
  if (v.size() != expected) throw DimensionMismatch(expected, v.size(), what);
}

// Squared Euclidean distance. Every module uses this exact summation order so
// that equal distances compare equal regardless of the call site.
inline double squared_distance(ConstVectorView a, ConstVectorView b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

double distance(ConstVectorView a, ConstVectorView b) noexcept;

}  // namespace vsp
