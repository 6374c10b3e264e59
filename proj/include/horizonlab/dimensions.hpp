#pragma once

#include <string>

#include "horizonlab/errors.hpp"

namespace horizonlab {

/// Ambient dimension n and submanifold dimension m.
///
/// The whole construction requires codimension n - m >= 3; every module
/// takes its dimensions from here so the constraint is checked once.
struct Dimensions {
  int n = 0;  // ambient dimension, n >= 3
  int m = 0;  // submanifold dimension, m >= 0

  constexpr int codimension() const { return n - m; }
  // Decay exponent of the flat model, gamma = n - m - 2 >= 1.
  constexpr int decay_exponent() const { return n - m - 2; }
  constexpr int fiber_dimension() const { return n - m - 1; }

  bool valid() const { return n >= 3 && m >= 0 && n - m >= 3; }

  void validate() const {
    if (!valid()) {
      throw DimensionError("need n >= 3, m >= 0 and codimension n - m >= 3 (got n=" +
                           std::to_string(n) + ", m=" + std::to_string(m) + ")");
    }
  }

  friend bool operator==(const Dimensions&, const Dimensions&) = default;
};

inline Dimensions make_dimensions(int n, int m) {
  Dimensions d{n, m};
  d.validate();
  return d;
}

}  // namespace horizonlab
