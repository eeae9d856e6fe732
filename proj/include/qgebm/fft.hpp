#pragma once

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

#include "qgebm/grid.hpp"

// FFTW r2r transforms between node values and basis amplitudes.
//
// Normalization (fixed): amplitudes are true basis coefficients, i.e.
// f(x_i, y_j) = sum_{m,n} a_{mn} phi_m(x_i) phi_n(y_j). With FFTW's
// REDFT10/RODFT10 (forward) and REDFT01/RODFT01 (backward) on cell-centered
// nodes this means per-axis scales
//   forward:  cos slot 0 and sin slot n-1 divide by 2n, all others by n
//   backward: cos slot 0 and sin slot n-1 pass through, all others halve
// backward(forward(f)) == f to machine precision.
//
// Parseval: with the midpoint inner product <f,f> = (l/n)^2 sum f_ij^2,
//   <f,f> = (l/n)^2 sum_{kx,ky} w(kx) w(ky) a^2,  w = n at the doubled slots
//   (cos 0, sin n-1) and n/2 elsewhere.
//
// Plans are cached per thread; FFTW's planner itself is guarded by a global
// mutex. Each plan owns its buffers, so concurrent execution across threads
// is safe.

namespace qgebm::fft {

inline double axis_forward_scale(Parity p, int n, int k) {
  if (p == Parity::Cos) return k == 0 ? 2.0 * n : 1.0 * n;
  return k == n - 1 ? 2.0 * n : 1.0 * n;
}

inline double axis_backward_prescale(Parity p, int n, int k) {
  if (p == Parity::Cos) return k == 0 ? 1.0 : 0.5;
  return k == n - 1 ? 1.0 : 0.5;
}

// per-axis mode number of a slot
inline int slot_mode(Parity p, int k) { return p == Parity::Cos ? k : k + 1; }

// RAII buffer with FFTW's alignment, so plans made on one buffer can run on
// another via the new-array interface
class AlignedBuf {
 public:
  AlignedBuf() = default;
  explicit AlignedBuf(std::size_t n) : n_(n), p_(static_cast<double*>(fftw_malloc(sizeof(double) * n))) {
    std::memset(p_, 0, sizeof(double) * n);
  }
  AlignedBuf(AlignedBuf&& o) noexcept : n_(o.n_), p_(o.p_) { o.p_ = nullptr; }
  AlignedBuf& operator=(AlignedBuf&& o) noexcept {
    if (this != &o) {
      if (p_) fftw_free(p_);
      p_ = o.p_;
      n_ = o.n_;
      o.p_ = nullptr;
    }
    return *this;
  }
  AlignedBuf(const AlignedBuf&) = delete;
  AlignedBuf& operator=(const AlignedBuf&) = delete;
  ~AlignedBuf() {
    if (p_) fftw_free(p_);
  }
  double* data() { return p_; }
  const double* data() const { return p_; }
  double& operator[](std::size_t i) { return p_[i]; }
  double operator[](std::size_t i) const { return p_[i]; }
  std::size_t size() const { return n_; }
  void zero() { std::memset(p_, 0, sizeof(double) * n_); }

 private:
  std::size_t n_ = 0;
  double* p_ = nullptr;
};

namespace detail {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanKey {
  int n;
  fftw_r2r_kind kx, ky;
  auto operator<=>(const PlanKey&) const = default;
};

struct PlanEntry {
  fftw_plan plan = nullptr;
  double* in = nullptr;
  double* out = nullptr;
  std::size_t size = 0;
};

class PlanCache {
 public:
  ~PlanCache() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    for (auto& [key, e] : plans_) {
      fftw_destroy_plan(e.plan);
      fftw_free(e.in);
      fftw_free(e.out);
    }
  }

  PlanEntry& get(int n, fftw_r2r_kind kx, fftw_r2r_kind ky) {
    PlanKey key{n, kx, ky};
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::lock_guard<std::mutex> lock(planner_mutex());
    PlanEntry e;
    e.size = static_cast<std::size_t>(n) * n;
    e.in = static_cast<double*>(fftw_malloc(sizeof(double) * e.size));
    e.out = static_cast<double*>(fftw_malloc(sizeof(double) * e.size));
    // FFTW_ESTIMATE: deterministic plan selection, so repeated runs of one
    // binary produce byte-identical trajectories (FFTW_MEASURE picks
    // algorithms by timing and may change between runs)
    e.plan = fftw_plan_r2r_2d(n, n, e.in, e.out, kx, ky, FFTW_ESTIMATE);
    return plans_.emplace(key, e).first->second;
  }

 private:
  std::map<PlanKey, PlanEntry> plans_;
};

inline PlanCache& cache() {
  thread_local PlanCache c;
  return c;
}

inline fftw_r2r_kind forward_kind(Parity p) { return p == Parity::Cos ? FFTW_REDFT10 : FFTW_RODFT10; }
inline fftw_r2r_kind backward_kind(Parity p) { return p == Parity::Cos ? FFTW_REDFT01 : FFTW_RODFT01; }

}  // namespace detail

// new-array transforms on caller-owned AlignedBufs (raw kinds, no scaling);
// in and out must be distinct
inline void exec_forward(int n, Bc bc, const AlignedBuf& in, AlignedBuf& out) {
  auto& e = detail::cache().get(n, detail::forward_kind(bc.x), detail::forward_kind(bc.y));
  fftw_execute_r2r(e.plan, const_cast<double*>(in.data()), out.data());
}

inline void exec_backward(int n, Bc bc, const AlignedBuf& in, AlignedBuf& out) {
  auto& e = detail::cache().get(n, detail::backward_kind(bc.x), detail::backward_kind(bc.y));
  fftw_execute_r2r(e.plan, const_cast<double*>(in.data()), out.data());
}

// node values -> amplitudes (separate in/out allowed, in == out allowed)
inline void forward(int n, Bc bc, const double* nodes, double* amps) {
  auto& e = detail::cache().get(n, detail::forward_kind(bc.x), detail::forward_kind(bc.y));
  std::memcpy(e.in, nodes, sizeof(double) * e.size);
  fftw_execute(e.plan);
  for (int kx = 0; kx < n; ++kx) {
    const double sx = axis_forward_scale(bc.x, n, kx);
    for (int ky = 0; ky < n; ++ky)
      amps[static_cast<std::size_t>(kx) * n + ky] =
          e.out[static_cast<std::size_t>(kx) * n + ky] / (sx * axis_forward_scale(bc.y, n, ky));
  }
}

// amplitudes -> node values
inline void backward(int n, Bc bc, const double* amps, double* nodes) {
  auto& e = detail::cache().get(n, detail::backward_kind(bc.x), detail::backward_kind(bc.y));
  for (int kx = 0; kx < n; ++kx) {
    const double px = axis_backward_prescale(bc.x, n, kx);
    for (int ky = 0; ky < n; ++ky)
      e.in[static_cast<std::size_t>(kx) * n + ky] =
          amps[static_cast<std::size_t>(kx) * n + ky] * px * axis_backward_prescale(bc.y, n, ky);
  }
  fftw_execute(e.plan);
  std::memcpy(nodes, e.out, sizeof(double) * e.size);
}

// amplitude embedding between grid sizes; slots keep their mode numbers for
// both parities, so zero-padding is a plain block copy
inline void pad_amps(int n_src, const double* src, int n_dst, double* dst) {
  std::memset(dst, 0, sizeof(double) * static_cast<std::size_t>(n_dst) * n_dst);
  for (int kx = 0; kx < n_src; ++kx)
    std::memcpy(dst + static_cast<std::size_t>(kx) * n_dst, src + static_cast<std::size_t>(kx) * n_src,
                sizeof(double) * n_src);
}

inline void truncate_amps(int n_src, const double* src, int n_dst, double* dst) {
  for (int kx = 0; kx < n_dst; ++kx)
    std::memcpy(dst + static_cast<std::size_t>(kx) * n_dst, src + static_cast<std::size_t>(kx) * n_src,
                sizeof(double) * n_dst);
}

}  // namespace qgebm::fft
