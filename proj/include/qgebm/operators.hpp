#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qgebm/fft.hpp"
#include "qgebm/grid.hpp"

// Spectral differential operators on [0,l]^2. All derivatives act on
// amplitudes; products happen on a 3N/2 zero-padded physical grid (2/3
// dealiasing), then the result is truncated back and projected onto its
// declared basis.

namespace qgebm {

inline Field to_spectral(const Field& f) {
  if (f.rep() != Rep::Physical) throw std::invalid_argument("to_spectral: field is already spectral");
  Field out(f.grid(), f.bc(), Rep::Spectral);
  fft::forward(f.grid().n, f.bc(), f.data(), out.data());
  return out;
}

inline Field to_physical(const Field& f) {
  if (f.rep() != Rep::Spectral) throw std::invalid_argument("to_physical: field is already physical");
  Field out(f.grid(), f.bc(), Rep::Physical);
  fft::backward(f.grid().n, f.bc(), f.data(), out.data());
  return out;
}

inline Field as_spectral(const Field& f) { return f.rep() == Rep::Spectral ? f : to_spectral(f); }
inline Field as_physical(const Field& f) { return f.rep() == Rep::Physical ? f : to_physical(f); }

// pi^2 (mx^2 + my^2) / l^2 for the mode in slot (kx,ky)
inline double slot_lambda(const Grid& g, Bc bc, int kx, int ky) {
  const double mx = fft::slot_mode(bc.x, kx);
  const double my = fft::slot_mode(bc.y, ky);
  return kPi * kPi * (mx * mx + my * my) / (g.l * g.l);
}

namespace detail {

// raw amplitude kernels shared with the time stepper

inline void laplacian_amps(const Grid& g, Bc bc, const double* in, double* out) {
  const int n = g.n;
  for (int kx = 0; kx < n; ++kx)
    for (int ky = 0; ky < n; ++ky)
      out[static_cast<std::size_t>(kx) * n + ky] =
          -slot_lambda(g, bc, kx, ky) * in[static_cast<std::size_t>(kx) * n + ky];
}

// d/dx: parity of the x axis flips, the top mode of the source axis drops
// when its image is not representable
inline void deriv_x_amps(const Grid& g, Bc bc, const double* in, double* out) {
  const int n = g.n;
  const double f = kPi / g.l;
  std::fill(out, out + g.size(), 0.0);
  if (bc.x == Parity::Cos) {
    // cos m -> -m sin m, slot m-1
    for (int kx = 1; kx < n; ++kx)
      for (int ky = 0; ky < n; ++ky)
        out[static_cast<std::size_t>(kx - 1) * n + ky] = -f * kx * in[static_cast<std::size_t>(kx) * n + ky];
  } else {
    // sin m -> m cos m, slot m; mode n drops (cos n vanishes on the nodes)
    for (int kx = 0; kx < n - 1; ++kx)
      for (int ky = 0; ky < n; ++ky)
        out[static_cast<std::size_t>(kx + 1) * n + ky] = f * (kx + 1) * in[static_cast<std::size_t>(kx) * n + ky];
  }
}

inline void deriv_y_amps(const Grid& g, Bc bc, const double* in, double* out) {
  const int n = g.n;
  const double f = kPi / g.l;
  std::fill(out, out + g.size(), 0.0);
  if (bc.y == Parity::Cos) {
    for (int kx = 0; kx < n; ++kx)
      for (int ky = 1; ky < n; ++ky)
        out[static_cast<std::size_t>(kx) * n + ky - 1] = -f * ky * in[static_cast<std::size_t>(kx) * n + ky];
  } else {
    for (int kx = 0; kx < n; ++kx)
      for (int ky = 0; ky < n - 1; ++ky)
        out[static_cast<std::size_t>(kx) * n + ky + 1] = f * (ky + 1) * in[static_cast<std::size_t>(kx) * n + ky];
  }
}

inline Parity toggle(Parity p) { return p == Parity::Cos ? Parity::Sin : Parity::Cos; }

// Multiplication by a short cosine series in y, carried out directly on
// cos-cos amplitudes. cos(jy)cos(ky) = (cos((k+j)y) + cos(|k-j|y))/2 with the
// grid's aliasing (mode n invisible, modes above n fold back negated), so the
// result matches the physical-space product to machine precision.
struct CosSeriesY {
  bool usable = false;
  std::vector<double> beta;  // beta[j], j = 0..J

  static CosSeriesY analyze(const Field& b_physical, int max_j = 8, double tol = 1e-13) {
    const Grid& g = b_physical.grid();
    Field s(g, kNeumann, Rep::Spectral);
    Field p = as_physical(b_physical);
    fft::forward(g.n, kNeumann, p.data(), s.data());
    double scale = 0.0;
    for (double v : s.values()) scale = std::max(scale, std::abs(v));
    CosSeriesY out;
    if (scale == 0.0) {
      out.usable = true;
      out.beta = {0.0};
      return out;
    }
    for (int kx = 1; kx < g.n; ++kx)
      for (int ky = 0; ky < g.n; ++ky)
        if (std::abs(s(kx, ky)) > tol * scale) return out;  // depends on x
    int top = 0;
    for (int ky = 0; ky < g.n; ++ky)
      if (std::abs(s(0, ky)) > tol * scale) top = ky;
    if (top > max_j) return out;
    out.usable = true;
    out.beta.assign(s.values().begin(), s.values().begin() + top + 1);
    return out;
  }

  // out = (b * f) amplitudes; f and out are n x n cos-cos amplitude arrays
  void apply(int n, const double* f, double* out) const {
    const int J = static_cast<int>(beta.size()) - 1;
    for (int kx = 0; kx < n; ++kx) {
      const double* fr = f + static_cast<std::size_t>(kx) * n;
      double* orow = out + static_cast<std::size_t>(kx) * n;
      for (int k = 0; k < n; ++k) orow[k] = beta[0] * fr[k];
      for (int j = 1; j <= J; ++j) {
        const double c = 0.5 * beta[j];
        if (c == 0.0) continue;
        for (int k = 0; k < n; ++k) {
          double acc = 0.0;
          if (k >= j) acc += fr[k - j];
          if (k + j <= n - 1) acc += fr[k + j];
          if (k > 0 && k <= j) acc += fr[j - k];
          const int alias = 2 * n - k - j;  // from the folded k+j > n images
          if (k >= n + 1 - j && alias <= n - 1) acc -= fr[alias];
          orow[k] += c * acc;
        }
      }
    }
  }
};

// J(g,h) has a definite parity: the product of the input parities, toggled
// once per axis (each term differentiates exactly one factor per axis).
inline Bc jacobian_bc(Bc a, Bc b) {
  auto mul = [](Parity p, Parity q) { return p == q ? Parity::Cos : Parity::Sin; };
  return Bc{toggle(mul(a.x, b.x)), toggle(mul(a.y, b.y))};
}

}  // namespace detail

enum class Axis { X, Y };

inline Field gradient(const Field& f, Axis axis) {
  Field s = as_spectral(f);
  Bc out_bc = s.bc();
  if (axis == Axis::X)
    out_bc.x = detail::toggle(out_bc.x);
  else
    out_bc.y = detail::toggle(out_bc.y);
  Field out(s.grid(), out_bc, Rep::Spectral);
  if (axis == Axis::X)
    detail::deriv_x_amps(s.grid(), s.bc(), s.data(), out.data());
  else
    detail::deriv_y_amps(s.grid(), s.bc(), s.data(), out.data());
  return out;
}

inline Field laplacian(const Field& f) {
  Field s = as_spectral(f);
  Field out(s.grid(), s.bc(), Rep::Spectral);
  detail::laplacian_amps(s.grid(), s.bc(), s.data(), out.data());
  return out;
}

// psi with Delta psi = q; every dirichlet mode has lambda > 0
inline Field invert_vorticity(const Field& q) {
  if (q.bc() != kDirichlet) throw std::invalid_argument("invert_vorticity: q must be a dirichlet field");
  Field s = as_spectral(q);
  Field psi(s.grid(), kDirichlet, Rep::Spectral);
  const int n = s.grid().n;
  for (int kx = 0; kx < n; ++kx)
    for (int ky = 0; ky < n; ++ky)
      psi(kx, ky) = -s(kx, ky) / slot_lambda(s.grid(), kDirichlet, kx, ky);
  return psi;
}

// discrete L2 projection onto a declared basis: same node values, new tag
inline Field project(const Field& f, Bc bc) {
  Field p = as_physical(f);
  Field out(f.grid(), bc, Rep::Spectral);
  fft::forward(f.grid().n, bc, p.data(), out.data());
  return out;
}

// smallest admissible Laplacian eigenvalue for the Poincare inequality
enum class PoincareBc { Dirichlet, NeumannZeroMean };

inline double poincare_lambda0(const Grid& g, PoincareBc bc) {
  const double base = kPi * kPi / (g.l * g.l);
  return bc == PoincareBc::Dirichlet ? 2.0 * base : base;
}

// ---- inner products, norms, integrals ------------------------------------

inline double norm_l2(const Field& f) {
  const Grid& g = f.grid();
  double s = 0.0;
  if (f.rep() == Rep::Physical) {
    for (double v : f.values()) s += v * v;
    return std::sqrt(g.cell_area() * s);
  }
  const int n = g.n;
  for (int kx = 0; kx < n; ++kx) {
    const double wx = (f.bc().x == Parity::Cos ? (kx == 0 ? n : n / 2.0) : (kx == n - 1 ? n : n / 2.0));
    for (int ky = 0; ky < n; ++ky) {
      const double wy = (f.bc().y == Parity::Cos ? (ky == 0 ? n : n / 2.0) : (ky == n - 1 ? n : n / 2.0));
      s += wx * wy * f(kx, ky) * f(kx, ky);
    }
  }
  return std::sqrt(g.cell_area() * s);
}

// midpoint-rule inner product; parities may differ
inline double inner(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("inner: grid mismatch");
  Field pa = as_physical(a), pb = as_physical(b);
  double s = 0.0;
  for (std::size_t i = 0; i < pa.values().size(); ++i) s += pa.values()[i] * pb.values()[i];
  return a.grid().cell_area() * s;
}

// integral over D by the midpoint rule (exact for cos-parity content)
inline double integral(const Field& f) {
  Field p = as_physical(f);
  double s = std::accumulate(p.values().begin(), p.values().end(), 0.0);
  return f.grid().cell_area() * s;
}

inline double grad_sq_norm(const Field& f) {
  Field s = as_spectral(f);
  double acc = 0.0;
  const int n = s.grid().n;
  for (int kx = 0; kx < n; ++kx) {
    const double wx = (s.bc().x == Parity::Cos ? (kx == 0 ? n : n / 2.0) : (kx == n - 1 ? n : n / 2.0));
    for (int ky = 0; ky < n; ++ky) {
      const double wy = (s.bc().y == Parity::Cos ? (ky == 0 ? n : n / 2.0) : (ky == n - 1 ? n : n / 2.0));
      acc += wx * wy * slot_lambda(s.grid(), s.bc(), kx, ky) * s(kx, ky) * s(kx, ky);
    }
  }
  return s.grid().cell_area() * acc;
}

// ---- dealiased Jacobian ----------------------------------------------------

namespace detail {

// workspace for J(g,h) on the 3N/2 grid; reusable across calls
struct JacobianWork {
  int n = 0, m = 0;
  std::vector<double> pad;                          // padded amplitudes
  std::vector<double> gx, gy, hx, hy, prod;          // padded node values
  std::vector<double> damp;                          // derivative amplitudes (n)

  void resize(int n_) {
    n = n_;
    m = 3 * n_ / 2;
    const std::size_t mm = static_cast<std::size_t>(m) * m;
    pad.resize(mm);
    gx.resize(mm);
    gy.resize(mm);
    hx.resize(mm);
    hy.resize(mm);
    prod.resize(mm);
    damp.resize(static_cast<std::size_t>(n_) * n_);
  }
};

// derivative of `amps` (parity bc) along `axis`, evaluated on the padded grid
inline void padded_deriv(JacobianWork& w, const Grid& g, Bc bc, const double* amps, Axis axis, double* nodes_out) {
  Bc dbc = bc;
  if (axis == Axis::X) {
    deriv_x_amps(g, bc, amps, w.damp.data());
    dbc.x = toggle(dbc.x);
  } else {
    deriv_y_amps(g, bc, amps, w.damp.data());
    dbc.y = toggle(dbc.y);
  }
  fft::pad_amps(w.n, w.damp.data(), w.m, w.pad.data());
  fft::backward(w.m, dbc, w.pad.data(), nodes_out);
}

// g_x h_y - g_y h_x, dealiased; result amplitudes (size n^2) in `out` with
// parity jacobian_bc(bcg,bch)
inline void jacobian_amps(JacobianWork& w, const Grid& g, Bc bcg, const double* ga, Bc bch, const double* ha,
                          double* out) {
  w.resize(g.n);
  padded_deriv(w, g, bcg, ga, Axis::X, w.gx.data());
  padded_deriv(w, g, bcg, ga, Axis::Y, w.gy.data());
  padded_deriv(w, g, bch, ha, Axis::X, w.hx.data());
  padded_deriv(w, g, bch, ha, Axis::Y, w.hy.data());
  const std::size_t mm = static_cast<std::size_t>(w.m) * w.m;
  for (std::size_t i = 0; i < mm; ++i) w.prod[i] = w.gx[i] * w.hy[i] - w.gy[i] * w.hx[i];
  fft::forward(w.m, jacobian_bc(bcg, bch), w.prod.data(), w.pad.data());
  fft::truncate_amps(w.m, w.pad.data(), w.n, out);
}

}  // namespace detail

inline Field jacobian(const Field& g, const Field& h) {
  if (!(g.grid() == h.grid())) throw std::invalid_argument("jacobian: grid mismatch");
  Field gs = as_spectral(g), hs = as_spectral(h);
  Field out(g.grid(), detail::jacobian_bc(g.bc(), h.bc()), Rep::Spectral);
  detail::JacobianWork w;
  detail::jacobian_amps(w, g.grid(), gs.bc(), gs.data(), hs.bc(), hs.data(), out.data());
  return out;
}

}  // namespace qgebm
