#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qgebm/fft.hpp"
#include "qgebm/grid.hpp"
#include "qgebm/noise.hpp"
#include "qgebm/operators.hpp"

// Stationary Ornstein-Uhlenbeck field z solving dz/dt + A1 z = dW/dt with
// A1 = -Delta + (1 + b(y)), zero-flux walls. One IMEX Euler step:
//
//   z_{n+1} = (I + dt(-Delta + 1))^{-1} (z_n - dt b z_n + dW_n)
//
// (-Delta + 1) is diagonal in the cosine basis; the b(y) z product is formed
// in physical space (or spectrally when b is constant).

namespace qgebm {

struct OUState {
  Field z;  // spectral, Neumann
  double time = 0.0;
};

class OuIntegrator {
 public:
  OuIntegrator(const Grid& g, const Field& b_profile, double dt)
      : grid_(g), dt_(dt), z_(g.size(), 0.0), bz_(g.size(), 0.0), phys_(g.size(), 0.0) {
    Field b = as_physical(b_profile);
    b_nodes_ = b.values();
    b_mean_ = integral(b) / (g.l * g.l);
    bstencil_ = detail::CosSeriesY::analyze(b);
    implicit_.resize(g.size());
    for (int kx = 0; kx < g.n; ++kx)
      for (int ky = 0; ky < g.n; ++ky)
        implicit_[static_cast<std::size_t>(kx) * g.n + ky] =
            1.0 / (1.0 + dt * (slot_lambda(g, kNeumann, kx, ky) + 1.0));
  }

  const Grid& grid() const { return grid_; }
  double dt() const { return dt_; }
  double b_mean() const { return b_mean_; }
  std::vector<double>& z_amps() { return z_; }
  const std::vector<double>& z_amps() const { return z_; }

  // dW has (cutoff+1)^2 entries in the covariance mode layout; pass nullptr
  // for an unforced step
  void step(const double* dW, int cutoff) {
    if (bstencil_.usable) {
      bstencil_.apply(grid_.n, z_.data(), bz_.data());
    } else {
      fft::backward(grid_.n, kNeumann, z_.data(), phys_.data());
      for (std::size_t i = 0; i < phys_.size(); ++i) phys_[i] *= b_nodes_[i];
      fft::forward(grid_.n, kNeumann, phys_.data(), bz_.data());
    }
    for (std::size_t i = 0; i < z_.size(); ++i) z_[i] -= dt_ * bz_[i];
    if (dW) {
      const int w = cutoff + 1;
      for (int m = 0; m < w; ++m)
        for (int n = 0; n < w; ++n)
          z_[static_cast<std::size_t>(m) * grid_.n + n] += dW[static_cast<std::size_t>(m) * w + n];
    }
    for (std::size_t i = 0; i < z_.size(); ++i) z_[i] *= implicit_[i];
  }

 private:
  Grid grid_;
  double dt_;
  std::vector<double> b_nodes_;
  double b_mean_ = 0.0;
  detail::CosSeriesY bstencil_;
  std::vector<double> implicit_;
  std::vector<double> z_, bz_, phys_;
};

// single spec-level step, for tests and small experiments
inline OUState ou_step(const OUState& z, const std::vector<double>& dW, double dt, const Field& b_profile) {
  OuIntegrator integ(z.z.grid(), b_profile, dt);
  integ.z_amps() = z.z.values();
  const int w = static_cast<int>(std::llround(std::sqrt(static_cast<double>(dW.size()))));
  if (static_cast<std::size_t>(w) * w != dW.size())
    throw std::invalid_argument("ou_step: increment vector is not square");
  integ.step(dW.empty() ? nullptr : dW.data(), w - 1);
  OUState out{Field(z.z.grid(), kNeumann, Rep::Spectral), z.time + dt};
  out.z.values() = integ.z_amps();
  return out;
}

inline double default_spin_up() { return 10.0; }

// z(theta_t omega) along a path. Initialization happens at the path's window
// start from the constant-coefficient stationary Gaussian, keyed by the
// absolute step index, so that regenerating along a shifted path re-produces
// the same values at equal absolute times bit for bit.
class StationaryOu {
 public:
  // `stationary_by`: local step by which the spin-up must have completed
  StationaryOu(const NoisePath& path, const Field& b_profile, double spin_up = default_spin_up(),
               std::int64_t stationary_by = 0)
      : path_(path), integ_(path.covariance().grid(), b_profile, path.dt()), dw_(path.covariance().n_modes()) {
    const std::int64_t spin_steps = detail::time_to_step(spin_up, path.dt(), "spin_up");
    if (path.step_min() > stationary_by - spin_steps)
      throw std::invalid_argument("ou_stationary: path window does not cover [-spin_up, t_max]");
    cursor_ = path.step_min();
    const Grid& g = integ_.grid();
    const auto& cov = path.covariance();
    const auto ctr0 = static_cast<std::uint64_t>(cursor_ + path.origin_offset());
    const int w = cov.cutoff() + 1;
    for (int m = 0; m < w; ++m)
      for (int n = 0; n < w; ++n) {
        const double q = cov.mode_variance(m, n);
        if (q == 0.0) continue;
        const double lam = slot_lambda(g, kNeumann, m, n);
        const double var = q / (2.0 * (lam + 1.0 + integ_.b_mean()));
        integ_.z_amps()[static_cast<std::size_t>(m) * g.n + n] =
            std::sqrt(var) * rng::gaussian(path.seed(), rng::kStreamOuInit, ctr0,
                                           static_cast<std::uint64_t>(m * w + n));
      }
  }

  std::int64_t cursor() const { return cursor_; }
  double time() const { return static_cast<double>(cursor_) * path_.dt(); }
  const std::vector<double>& z_amps() const { return integ_.z_amps(); }

  OUState state() const {
    OUState s{Field(integ_.grid(), kNeumann, Rep::Spectral), time()};
    s.z.values() = integ_.z_amps();
    return s;
  }

  void advance_to(std::int64_t step) {
    if (step > path_.step_max()) throw std::invalid_argument("ou_stationary: step beyond path window");
    while (cursor_ < step) {
      path_.fill_increments(cursor_, dw_.data());
      integ_.step(dw_.data(), path_.covariance().cutoff());
      ++cursor_;
    }
  }

 private:
  NoisePath path_;
  OuIntegrator integ_;
  std::vector<double> dw_;
  std::int64_t cursor_ = 0;
};

// samples of z(theta_t omega) on [t_from, t_to] at `stride` steps
inline std::vector<OUState> ou_stationary(const NoisePath& path, const Field& b_profile, double spin_up,
                                          double t_from, double t_to, std::int64_t stride = 1) {
  StationaryOu ou(path, b_profile, spin_up);
  const std::int64_t i0 = detail::time_to_step(t_from, path.dt(), "t_from");
  const std::int64_t i1 = detail::time_to_step(t_to, path.dt(), "t_to");
  std::vector<OUState> out;
  ou.advance_to(i0);
  out.push_back(ou.state());
  for (std::int64_t i = i0 + stride; i <= i1; i += stride) {
    ou.advance_to(i);
    out.push_back(ou.state());
  }
  return out;
}

}  // namespace qgebm
