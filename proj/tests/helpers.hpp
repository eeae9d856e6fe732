#pragma once

#include <cmath>
#include <random>

#include "qgebm/fpu.hpp"
#include "qgebm/grid.hpp"
#include "qgebm/operators.hpp"

namespace qgebm::testing {

namespace detail {
struct FpuInit {
  FpuInit() { enable_flush_to_zero(); }
};
inline const FpuInit fpu_init{};
}  // namespace detail

// smooth random band-limited field: Gaussian amplitudes with exponential
// decay up to per-axis mode `cutoff`
inline Field random_field(const Grid& g, Bc bc, int cutoff, unsigned seed, double decay = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Field f(g, bc, Rep::Spectral);
  const int mx0 = bc.x == Parity::Cos ? 0 : 1;
  const int my0 = bc.y == Parity::Cos ? 0 : 1;
  for (int mx = mx0; mx <= cutoff; ++mx)
    for (int my = my0; my <= cutoff; ++my) f.amp(mx, my) = dist(rng) * std::exp(-decay * (mx + my));
  return f;
}

inline double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

inline double max_abs(const Field& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace qgebm::testing
