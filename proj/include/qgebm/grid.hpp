#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

// Square domain [0,l]^2 discretized on N x N cell-centered nodes
// x_i = (i + 1/2) l/N. The same physical nodes carry both expansions:
//
//   cos basis (zero-flux walls):   phi_m(x) = cos(m pi x / l),  m = 0..N-1
//   sin basis (zero-value walls):  phi_m(x) = sin(m pi x / l),  m = 1..N
//
// Each family is a complete orthogonal basis of R^N on these nodes, so a
// field is equivalently N^2 node values or N^2 basis amplitudes.

namespace qgebm {

inline constexpr double kPi = 3.14159265358979323846;

enum class Parity { Cos, Sin };

// Per-axis parity pair. Dirichlet fields are (Sin,Sin), Neumann (Cos,Cos);
// single-axis derivatives produce the mixed pairs.
struct Bc {
  Parity x;
  Parity y;
  friend bool operator==(const Bc&, const Bc&) = default;
};

inline constexpr Bc kDirichlet{Parity::Sin, Parity::Sin};
inline constexpr Bc kNeumann{Parity::Cos, Parity::Cos};

struct Grid {
  double l = 1.0;  // side length
  int n = 0;       // nodes per side

  double spacing() const { return l / n; }
  double node(int i) const { return (i + 0.5) * l / n; }
  // weight of the midpoint-rule inner product <f,g> = w * sum f_ij g_ij
  double cell_area() const { return (l / n) * (l / n); }
  std::size_t size() const { return static_cast<std::size_t>(n) * n; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

inline Grid make_grid(double l, int n) {
  if (l <= 0.0) throw std::invalid_argument("make_grid: domain length must be positive");
  if (n % 2 != 0) throw std::invalid_argument("make_grid: N must be even");
  if (n < 8) throw std::invalid_argument("make_grid: N must be at least 8");
  return Grid{l, n};
}

enum class Rep { Physical, Spectral };

// Scalar field on a Grid. Stores either node values or basis amplitudes,
// flat index (ix, iy) -> ix*n + iy.
class Field {
 public:
  Field() = default;
  Field(const Grid& g, Bc bc, Rep rep = Rep::Physical)
      : grid_(g), bc_(bc), rep_(rep), v_(g.size(), 0.0) {}

  static Field sample(const Grid& g, Bc bc, const std::function<double(double, double)>& f) {
    Field out(g, bc, Rep::Physical);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) out(i, j) = f(g.node(i), g.node(j));
    return out;
  }

  const Grid& grid() const { return grid_; }
  Bc bc() const { return bc_; }
  Rep rep() const { return rep_; }

  double& operator()(int i, int j) { return v_[static_cast<std::size_t>(i) * grid_.n + j]; }
  double operator()(int i, int j) const { return v_[static_cast<std::size_t>(i) * grid_.n + j]; }

  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  // slot of mode (mx,my); throws if the mode is not representable
  std::size_t mode_slot(int mx, int my) const {
    return static_cast<std::size_t>(axis_slot(mx, bc_.x)) * grid_.n + axis_slot(my, bc_.y);
  }

  // amplitude of basis mode (mx,my); field must be spectral
  double amp(int mx, int my) const {
    if (rep_ != Rep::Spectral) throw std::logic_error("Field::amp: field is not spectral");
    return v_[mode_slot(mx, my)];
  }
  double& amp(int mx, int my) {
    if (rep_ != Rep::Spectral) throw std::logic_error("Field::amp: field is not spectral");
    return v_[mode_slot(mx, my)];
  }

 private:
  int axis_slot(int m, Parity p) const {
    if (p == Parity::Cos) {
      if (m < 0 || m >= grid_.n) throw std::out_of_range("Field: cos mode out of range");
      return m;
    }
    if (m < 1 || m > grid_.n) throw std::out_of_range("Field: sin mode out of range");
    return m - 1;
  }

  Grid grid_;
  Bc bc_{Parity::Cos, Parity::Cos};
  Rep rep_ = Rep::Physical;
  std::vector<double> v_;
};

}  // namespace qgebm
