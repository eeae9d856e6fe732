#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qgebm/grid.hpp"
#include "qgebm/operators.hpp"
#include "qgebm/rng.hpp"

// Spatially correlated white-in-time noise on the Theta equation. The
// covariance Q is diagonal in the Neumann cosine eigenbasis with
// q_k = sigma^2 (1 + lambda_k)^(-s_q) up to per-axis mode `cutoff`, or an
// explicit table. Increments are a pure function of
// (seed, absolute step index, mode index), so the Wiener shift is exact
// re-indexing.

namespace qgebm {

struct CovarianceSpec {
  double sigma2 = 1e-3;
  double s_q = 2.0;
  int cutoff = 15;  // per-axis max mode; -1 means every grid mode
  std::optional<std::vector<double>> table;  // row-major (cutoff+1)^2 overrides the power law
};

// covariance fixed to a grid: per-mode variances over modes (m,n) in [0,K]^2
class BoundCovariance {
 public:
  BoundCovariance(const CovarianceSpec& spec, const Grid& g) : grid_(g) {
    k_ = spec.cutoff < 0 ? g.n - 1 : spec.cutoff;
    if (k_ > g.n - 1) throw std::invalid_argument("covariance: cutoff exceeds grid modes");
    if (spec.cutoff < 0 && spec.s_q <= 1.0 && !spec.table)
      throw std::invalid_argument("covariance: s_q <= 1 with unbounded cutoff (trace diverges in the continuum limit)");
    if (spec.sigma2 < 0.0) throw std::invalid_argument("covariance: sigma2 must be nonnegative");
    const int width = k_ + 1;
    if (spec.table && static_cast<int>(spec.table->size()) != width * width)
      throw std::invalid_argument("covariance: table size must be (cutoff+1)^2");
    q_.resize(static_cast<std::size_t>(width) * width);
    trace_ = 0.0;
    for (int m = 0; m <= k_; ++m)
      for (int n = 0; n <= k_; ++n) {
        const double lam = kPi * kPi * (double(m) * m + double(n) * n) / (g.l * g.l);
        double q = spec.table ? (*spec.table)[static_cast<std::size_t>(m) * width + n]
                              : spec.sigma2 * std::pow(1.0 + lam, -spec.s_q);
        if (q < 0.0) throw std::invalid_argument("covariance: negative mode variance");
        q_[static_cast<std::size_t>(m) * width + n] = q;
        trace_ += q;
      }
  }

  const Grid& grid() const { return grid_; }
  int cutoff() const { return k_; }
  int n_modes() const { return (k_ + 1) * (k_ + 1); }
  double trace() const { return trace_; }
  double mode_variance(int m, int n) const { return q_[static_cast<std::size_t>(m) * (k_ + 1) + n]; }
  const std::vector<double>& mode_variances() const { return q_; }

 private:
  Grid grid_;
  int k_ = 0;
  std::vector<double> q_;
  double trace_ = 0.0;
};

inline double trace_Q(const CovarianceSpec& spec, const Grid& g) { return BoundCovariance(spec, g).trace(); }

namespace detail {

inline std::int64_t time_to_step(double t, double dt, const char* what) {
  const double r = t / dt;
  const auto i = static_cast<std::int64_t>(std::llround(r));
  if (std::abs(r - static_cast<double>(i)) > 1e-6 * std::max(1.0, std::abs(r)))
    throw std::invalid_argument(std::string(what) + " is not an integer multiple of dt");
  return i;
}

}  // namespace detail

// Seeded, time-gridded Wiener increments in the covariance eigenbasis.
// Local step n covers [n dt, (n+1) dt]; the shift theta_tau re-indexes by
// offset without touching the underlying numbers.
class NoisePath {
 public:
  NoisePath(std::shared_ptr<const BoundCovariance> cov, std::uint64_t seed, double dt, std::int64_t i_min,
            std::int64_t i_max, std::int64_t offset = 0)
      : cov_(std::move(cov)), seed_(seed), dt_(dt), i_min_(i_min), i_max_(i_max), offset_(offset) {}

  const BoundCovariance& covariance() const { return *cov_; }
  std::shared_ptr<const BoundCovariance> covariance_ptr() const { return cov_; }
  std::uint64_t seed() const { return seed_; }
  double dt() const { return dt_; }
  double t_min() const { return static_cast<double>(i_min_) * dt_; }
  double t_max() const { return static_cast<double>(i_max_) * dt_; }
  std::int64_t step_min() const { return i_min_; }
  std::int64_t step_max() const { return i_max_; }
  std::int64_t origin_offset() const { return offset_; }

  bool covers(std::int64_t i0, std::int64_t i1) const { return i_min_ <= i0 && i1 <= i_max_; }

  // Gaussian increment of covariance mode `mode` over local step n; modes
  // are drawn in pairs from one counter evaluation
  double increment(std::int64_t n, int mode) const {
    const double q = cov_->mode_variances()[mode];
    if (q == 0.0) return 0.0;
    const auto pair = rng::gaussian_pair(seed_, rng::kStreamIncrements, static_cast<std::uint64_t>(n + offset_),
                                         static_cast<std::uint64_t>(mode / 2));
    return std::sqrt(q * dt_) * pair[mode % 2];
  }

  // all per-mode increments of local step n; out has n_modes() entries
  void fill_increments(std::int64_t n, double* out) const {
    const auto& q = cov_->mode_variances();
    const auto ctr0 = static_cast<std::uint64_t>(n + offset_);
    const int nm = cov_->n_modes();
    for (int m = 0; m < nm; m += 2) {
      const auto pair = rng::gaussian_pair(seed_, rng::kStreamIncrements, ctr0, static_cast<std::uint64_t>(m / 2));
      out[m] = q[m] == 0.0 ? 0.0 : std::sqrt(q[m] * dt_) * pair[0];
      if (m + 1 < nm) out[m + 1] = q[m + 1] == 0.0 ? 0.0 : std::sqrt(q[m + 1] * dt_) * pair[1];
    }
  }

  // cumulative path at local step i (zero at the local origin, C0 convention)
  std::vector<double> cumulative(std::int64_t i) const {
    std::vector<double> w(cov_->n_modes(), 0.0);
    std::vector<double> dW(cov_->n_modes());
    if (i >= 0) {
      for (std::int64_t n = 0; n < i; ++n) {
        fill_increments(n, dW.data());
        for (int m = 0; m < cov_->n_modes(); ++m) w[m] += dW[m];
      }
    } else {
      for (std::int64_t n = i; n < 0; ++n) {
        fill_increments(n, dW.data());
        for (int m = 0; m < cov_->n_modes(); ++m) w[m] -= dW[m];
      }
    }
    return w;
  }

 private:
  std::shared_ptr<const BoundCovariance> cov_;
  std::uint64_t seed_ = 0;
  double dt_ = 1e-3;
  std::int64_t i_min_ = 0, i_max_ = 0;
  std::int64_t offset_ = 0;
};

inline NoisePath sample_path(const CovarianceSpec& spec, const Grid& g, double t_min, double t_max, double dt,
                             std::uint64_t seed) {
  if (dt <= 0.0) throw std::invalid_argument("sample_path: dt must be positive");
  if (!(t_min < t_max)) throw std::invalid_argument("sample_path: t_min must be below t_max");
  auto cov = std::make_shared<BoundCovariance>(spec, g);
  return NoisePath(std::move(cov), seed, dt, detail::time_to_step(t_min, dt, "t_min"),
                   detail::time_to_step(t_max, dt, "t_max"));
}

// theta_tau: increment j of the shifted path is increment j + tau/dt of the
// original; the cumulative value re-zeroes at the new origin
inline NoisePath wiener_shift(const NoisePath& p, double tau) {
  const std::int64_t j = detail::time_to_step(tau, p.dt(), "shift tau");
  return NoisePath(p.covariance_ptr(), p.seed(), p.dt(), p.step_min() - j, p.step_max() - j,
                   p.origin_offset() + j);
}

}  // namespace qgebm
