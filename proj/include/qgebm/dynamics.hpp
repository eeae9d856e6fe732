#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "qgebm/fft.hpp"
#include "qgebm/grid.hpp"
#include "qgebm/noise.hpp"
#include "qgebm/operators.hpp"
#include "qgebm/ou.hpp"
#include "qgebm/params.hpp"

// The coupled system u = (Theta, q, T):
//
//   Theta_t = Delta Theta - (1+b) Theta - a + S_a - b S_o + b T   (+ noise)
//   q_t     = nu Delta q - r q + Pr Ra T_y - J(psi, q) - beta psi_x
//   T_t     = kappa Delta T - J(T, psi),          psi = Delta^{-1} q
//
// IMEX Euler: diffusion, the +1 reaction on Theta and the +r drag on q are
// implicit (diagonal per mode); b(y) products, the Jacobians, the beta term
// and the Pr Ra coupling are explicit. The T tendency's (0,0) mode is
// projected out each step, which keeps the zero-mean normalization exact.
//
// The direct stepper adds the Wiener increment after the implicit solve;
// the transformed stepper is the same map without noise (F never reads the
// Theta component, so evaluating F at v + Z equals evaluating it at v).

namespace qgebm {

struct State {
  Field theta;  // Neumann
  Field q;      // Dirichlet
  Field T;      // Neumann, zero mean
  double time = 0.0;
  bool transformed = false;  // true: this is v = u - Z (theta holds tilde-Theta)
};

inline State make_state(const Grid& g, Rep rep = Rep::Spectral) {
  return State{Field(g, kNeumann, rep), Field(g, kDirichlet, rep), Field(g, kNeumann, rep), 0.0, false};
}

struct Tendency {
  Field theta, q, T;
};

inline double norm_H(const State& u) {
  const double a = norm_l2(u.theta), b = norm_l2(u.q), c = norm_l2(u.T);
  return std::sqrt(a * a + b * b + c * c);
}

// ||Theta||_{H^1}^2 + ||grad q||^2 + ||grad T||^2 with
// ||Theta||_{H^1}^2 = ||Theta||^2 + ||grad Theta||^2
inline double norm_V(const State& u) {
  const double th = norm_l2(u.theta);
  return std::sqrt(th * th + grad_sq_norm(u.theta) + grad_sq_norm(u.q) + grad_sq_norm(u.T));
}

// (lambda0/2)||~Theta||^2 + ||T||^2 + (alpha lambda0 / 2 Pr^2 Ra^2)||q||^2
inline double lyapunov(const State& v, double alpha, double lambda0, const PhysParams& p) {
  if (alpha <= 0.0) throw std::invalid_argument("lyapunov: alpha must be positive");
  const double th = norm_l2(v.theta), t = norm_l2(v.T), q = norm_l2(v.q);
  return 0.5 * lambda0 * th * th + t * t + alpha * lambda0 / (2.0 * p.Pr * p.Pr * p.Ra * p.Ra) * q * q;
}

// A(u) = (-Delta Theta + (1+b) Theta, -nu Delta q, -kappa Delta T)
inline Tendency apply_A(const State& u, const PhysParams& p, const ForcingProfiles& prof) {
  Field th = as_spectral(u.theta);
  Field thp = as_physical(u.theta);
  Field bth(u.theta.grid(), kNeumann, Rep::Physical);
  for (std::size_t i = 0; i < bth.values().size(); ++i)
    bth.values()[i] = (1.0 + prof.b.values()[i]) * thp.values()[i];
  Field row_th = to_spectral(bth);
  Field lap = laplacian(th);
  for (std::size_t i = 0; i < row_th.values().size(); ++i) row_th.values()[i] -= lap.values()[i];

  Field row_q = laplacian(u.q);
  for (double& v : row_q.values()) v *= -p.nu;
  Field row_T = laplacian(u.T);
  for (double& v : row_T.values()) v *= -p.kappa;
  return Tendency{row_th, row_q, row_T};
}

// F(u) exactly as in the model, with the T row projected to zero mean
inline Tendency rhs_F(const State& u, const PhysParams& p, const ForcingProfiles& prof) {
  const Grid& g = u.theta.grid();
  Field psi = invert_vorticity(as_spectral(u.q));

  // Theta row: -a + S_a - b S_o + b T (pointwise on the nodes)
  Field Tp = as_physical(u.T);
  Field row_th_p(g, kNeumann, Rep::Physical);
  for (std::size_t i = 0; i < row_th_p.values().size(); ++i)
    row_th_p.values()[i] = -p.a + prof.S_a.values()[i] +
                           prof.b.values()[i] * (Tp.values()[i] - prof.S_o.values()[i]);
  Field row_th = to_spectral(row_th_p);

  // q row: -r q + projection of (Pr Ra T_y - beta psi_x) - J(psi, q)
  Field w = gradient(u.T, Axis::Y);
  Field px = gradient(psi, Axis::X);
  for (std::size_t i = 0; i < w.values().size(); ++i)
    w.values()[i] = p.Pr * p.Ra * w.values()[i] - p.beta * px.values()[i];
  Field row_q = project(w, kDirichlet);
  Field jq = jacobian(psi, as_spectral(u.q));
  Field qs = as_spectral(u.q);
  for (std::size_t i = 0; i < row_q.values().size(); ++i)
    row_q.values()[i] += -p.r * qs.values()[i] - jq.values()[i];

  // T row: -J(T, psi), zero-mean projected
  Field row_T = jacobian(as_spectral(u.T), psi);
  for (double& v : row_T.values()) v = -v;
  row_T.amp(0, 0) = 0.0;
  return Tendency{row_th, row_q, row_T};
}

// ---- time stepping ---------------------------------------------------------

namespace detail {

struct SpectralState {
  std::vector<double> th, q, T;
};

inline double weighted_sq(const Grid& g, Bc bc, const std::vector<double>& a) {
  const int n = g.n;
  double s = 0.0;
  for (int kx = 0; kx < n; ++kx) {
    const double wx = (bc.x == Parity::Cos ? (kx == 0 ? n : n / 2.0) : (kx == n - 1 ? n : n / 2.0));
    for (int ky = 0; ky < n; ++ky) {
      const double wy = (bc.y == Parity::Cos ? (ky == 0 ? n : n / 2.0) : (ky == n - 1 ? n : n / 2.0));
      const double v = a[static_cast<std::size_t>(kx) * n + ky];
      s += wx * wy * v * v;
    }
  }
  return g.cell_area() * s;
}

inline double weighted_grad_sq(const Grid& g, Bc bc, const std::vector<double>& a) {
  const int n = g.n;
  double s = 0.0;
  for (int kx = 0; kx < n; ++kx) {
    const double wx = (bc.x == Parity::Cos ? (kx == 0 ? n : n / 2.0) : (kx == n - 1 ? n : n / 2.0));
    for (int ky = 0; ky < n; ++ky) {
      const double wy = (bc.y == Parity::Cos ? (ky == 0 ? n : n / 2.0) : (ky == n - 1 ? n : n / 2.0));
      const double v = a[static_cast<std::size_t>(kx) * n + ky];
      s += wx * wy * slot_lambda(g, bc, kx, ky) * v * v;
    }
  }
  return g.cell_area() * s;
}

}  // namespace detail

struct StepperOptions {
  double dt = 1e-3;
  // guard: dt * ||explicit tendency||_H <= cfl_factor * ||state||_H + cfl_abs
  double cfl_factor = 0.5;
  double cfl_abs = 1.0;
  bool zero_explicit = false;  // test hook: forces the explicit tendency to 0
};

class Stepper {
 public:
  Stepper(const Grid& g, const PhysParams& p, const ForcingProfiles& prof, StepperOptions opt = {})
      : grid_(g), p_(p), opt_(opt), m_(3 * g.n / 2) {
    validate_params(p);
    validate_profiles(prof);
    b_ = as_physical(prof.b).values();
    bstencil_ = detail::CosSeriesY::analyze(prof.b);

    // constant source -a + S_a - b S_o, kept spectrally
    std::vector<double> src = as_physical(prof.S_a).values();
    const auto so = as_physical(prof.S_o).values();
    for (std::size_t i = 0; i < src.size(); ++i) src[i] += -p.a - b_[i] * so[i];
    src_hat_.resize(src.size());
    fft::forward(g.n, kNeumann, src.data(), src_hat_.data());

    const int n = g.n;
    const std::size_t nn = g.size();
    pth_.resize(nn);
    pq_.resize(nn);
    pT_.resize(nn);
    wN_.resize(nn);
    wD_.resize(nn);
    lamN_.resize(nn);
    invLamD_.resize(nn);
    for (int kx = 0; kx < n; ++kx)
      for (int ky = 0; ky < n; ++ky) {
        const std::size_t i = static_cast<std::size_t>(kx) * n + ky;
        const double lamN = slot_lambda(g, kNeumann, kx, ky);
        const double lamD = slot_lambda(g, kDirichlet, kx, ky);
        pth_[i] = 1.0 / (1.0 + opt.dt * (lamN + 1.0));
        pq_[i] = 1.0 / (1.0 + opt.dt * (p.nu * lamD + p.r));
        pT_[i] = 1.0 / (1.0 + opt.dt * p.kappa * lamN);
        lamN_[i] = lamN;
        invLamD_[i] = 1.0 / lamD;
        const double wx_n = kx == 0 ? n : n / 2.0;
        const double wy_n = ky == 0 ? n : n / 2.0;
        const double wx_d = kx == n - 1 ? n : n / 2.0;
        const double wy_d = ky == n - 1 ? n : n / 2.0;
        wN_[i] = g.cell_area() * wx_n * wy_n;
        wD_[i] = g.cell_area() * wx_d * wy_d;
      }
    lamD_.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) lamD_[i] = 1.0 / invLamD_[i];

    const std::size_t mm = static_cast<std::size_t>(m_) * m_;
    psi_.resize(nn);
    da_.resize(nn);
    tmp_.resize(nn);
    gth_.resize(nn);
    gq_.resize(nn);
    gT_.resize(nn);
    thp_.resize(nn);
    Tp_.resize(nn);
    wp_.resize(nn);
    pad_in_ = fft::AlignedBuf(mm);
    prod_in_ = fft::AlignedBuf(mm);
    prod_out_ = fft::AlignedBuf(mm);
    px_ = fft::AlignedBuf(mm);
    py_ = fft::AlignedBuf(mm);
    qx_ = fft::AlignedBuf(mm);
    qy_ = fft::AlignedBuf(mm);
    tx_ = fft::AlignedBuf(mm);
    ty_ = fft::AlignedBuf(mm);
    wa_ = fft::AlignedBuf(nn);
    wb_ = fft::AlignedBuf(nn);
  }

  const Grid& grid() const { return grid_; }
  double dt() const { return opt_.dt; }

  detail::SpectralState& state() { return s_; }
  const detail::SpectralState& state() const { return s_; }

  void load(const State& x) {
    s_.th = as_spectral(x.theta).values();
    s_.q = as_spectral(x.q).values();
    s_.T = as_spectral(x.T).values();
    s_.T[0] = 0.0;  // zero-mean normalization
  }

  State unload(double time, bool transformed) const {
    State out = make_state(grid_);
    out.theta.values() = s_.th;
    out.q.values() = s_.q;
    out.T.values() = s_.T;
    out.time = time;
    out.transformed = transformed;
    return out;
  }

  // one transformed step: v <- (I + dt A_impl)^{-1} (v + dt G(v))
  void step_transformed() {
    tendency();
    advance();
  }

  // one direct step: same map, then the increment lands on Theta
  void step_direct(const double* dW, int cutoff) {
    tendency();
    advance();
    if (dW) {
      const int w = cutoff + 1;
      for (int mx = 0; mx < w; ++mx)
        for (int my = 0; my < w; ++my)
          s_.th[static_cast<std::size_t>(mx) * grid_.n + my] += dW[static_cast<std::size_t>(mx) * w + my];
    }
  }

  double h_norm_sq() const {
    double s = 0.0;
    for (std::size_t i = 0; i < s_.th.size(); ++i)
      s += wN_[i] * (s_.th[i] * s_.th[i] + s_.T[i] * s_.T[i]) + wD_[i] * s_.q[i] * s_.q[i];
    return s;
  }

  double v_norm_sq() const {
    double s = 0.0;
    for (std::size_t i = 0; i < s_.th.size(); ++i)
      s += wN_[i] * ((1.0 + lamN_[i]) * s_.th[i] * s_.th[i] + lamN_[i] * s_.T[i] * s_.T[i]) +
           wD_[i] * lamD_[i] * s_.q[i] * s_.q[i];
    return s;
  }

 private:
  // derivative of `amps` along `ax`, prescaled into the shared padded input
  // block and transformed out-of-place to `out` nodes
  void padded_deriv(Bc bc, const std::vector<double>& amps, Axis ax, fft::AlignedBuf& out) {
    const int n = grid_.n;
    Bc dbc = bc;
    if (ax == Axis::X) {
      detail::deriv_x_amps(grid_, bc, amps.data(), da_.data());
      dbc.x = detail::toggle(dbc.x);
    } else {
      detail::deriv_y_amps(grid_, bc, amps.data(), da_.data());
      dbc.y = detail::toggle(dbc.y);
    }
    // block slots sit below the padded grid's doubled slots, so the
    // prescale is 1 at cos slot 0 and 1/2 everywhere else
    for (int kx = 0; kx < n; ++kx) {
      const double px = dbc.x == Parity::Cos && kx == 0 ? 1.0 : 0.5;
      double* row = pad_in_.data() + static_cast<std::size_t>(kx) * m_;
      const double* src = da_.data() + static_cast<std::size_t>(kx) * n;
      for (int ky = 0; ky < n; ++ky)
        row[ky] = src[ky] * px * (dbc.y == Parity::Cos && ky == 0 ? 1.0 : 0.5);
    }
    fft::exec_backward(m_, dbc, pad_in_, out);
  }

  void tendency() {
    const int n = grid_.n;
    const std::size_t nn = grid_.size();
    if (opt_.zero_explicit) {
      std::fill(gth_.begin(), gth_.end(), 0.0);
      std::fill(gq_.begin(), gq_.end(), 0.0);
      std::fill(gT_.begin(), gT_.end(), 0.0);
      return;
    }

    for (std::size_t i = 0; i < nn; ++i) psi_[i] = -s_.q[i] * invLamD_[i];
    padded_deriv(kDirichlet, psi_, Axis::X, px_);
    padded_deriv(kDirichlet, psi_, Axis::Y, py_);
    padded_deriv(kDirichlet, s_.q, Axis::X, qx_);
    padded_deriv(kDirichlet, s_.q, Axis::Y, qy_);
    padded_deriv(kNeumann, s_.T, Axis::X, tx_);
    padded_deriv(kNeumann, s_.T, Axis::Y, ty_);

    const std::size_t mm = static_cast<std::size_t>(m_) * m_;
    const double inv_mm = 1.0 / (static_cast<double>(m_) * m_);

    // q row: -J(psi,q) dealiased, then the projected linear terms
    for (std::size_t i = 0; i < mm; ++i) prod_in_[i] = py_[i] * qx_[i] - px_[i] * qy_[i];
    fft::exec_forward(m_, kDirichlet, prod_in_, prod_out_);
    for (int kx = 0; kx < n; ++kx) {
      const double* row = prod_out_.data() + static_cast<std::size_t>(kx) * m_;
      double* dst = gq_.data() + static_cast<std::size_t>(kx) * n;
      for (int ky = 0; ky < n; ++ky) dst[ky] = row[ky] * inv_mm;
    }

    detail::deriv_y_amps(grid_, kNeumann, s_.T.data(), da_.data());    // T_y (cos,sin)
    detail::deriv_x_amps(grid_, kDirichlet, psi_.data(), tmp_.data()); // psi_x (cos,sin)
    const Bc cossin{Parity::Cos, Parity::Sin};
    for (int kx = 0; kx < n; ++kx) {
      const double px = kx == 0 ? 1.0 : 0.5;
      for (int ky = 0; ky < n; ++ky) {
        const std::size_t i = static_cast<std::size_t>(kx) * n + ky;
        wa_[i] = (p_.Pr * p_.Ra * da_[i] - p_.beta * tmp_[i]) * px * 0.5;
      }
    }
    fft::exec_backward(n, cossin, wa_, wb_);
    fft::exec_forward(n, kDirichlet, wb_, wa_);
    for (int kx = 0; kx < n; ++kx) {
      const double fx = kx == n - 1 ? 2.0 * n : 1.0 * n;
      for (int ky = 0; ky < n; ++ky) {
        const std::size_t i = static_cast<std::size_t>(kx) * n + ky;
        gq_[i] += wa_[i] / (fx * (ky == n - 1 ? 2.0 * n : 1.0 * n));
      }
    }

    // T row: -J(T,psi) dealiased, zero-mean projected
    for (std::size_t i = 0; i < mm; ++i) prod_in_[i] = ty_[i] * px_[i] - tx_[i] * py_[i];
    fft::exec_forward(m_, kNeumann, prod_in_, prod_out_);
    for (int kx = 0; kx < n; ++kx) {
      const double fx = kx == 0 ? 2.0 : 1.0;
      const double* row = prod_out_.data() + static_cast<std::size_t>(kx) * m_;
      double* dst = gT_.data() + static_cast<std::size_t>(kx) * n;
      for (int ky = 0; ky < n; ++ky) dst[ky] = row[ky] * inv_mm / (fx * (ky == 0 ? 2.0 : 1.0));
    }
    gT_[0] = 0.0;

    // Theta row: b (T - Theta) + (-a + S_a - b S_o)
    if (bstencil_.usable) {
      for (std::size_t i = 0; i < nn; ++i) tmp_[i] = s_.T[i] - s_.th[i];
      bstencil_.apply(n, tmp_.data(), gth_.data());
      for (std::size_t i = 0; i < nn; ++i) gth_[i] += src_hat_[i];
    } else {
      fft::backward(n, kNeumann, s_.th.data(), thp_.data());
      fft::backward(n, kNeumann, s_.T.data(), Tp_.data());
      for (std::size_t i = 0; i < nn; ++i) wp_[i] = b_[i] * (Tp_[i] - thp_[i]);
      fft::forward(n, kNeumann, wp_.data(), gth_.data());
      for (std::size_t i = 0; i < nn; ++i) gth_[i] += src_hat_[i];
    }
  }

  void advance() {
    const double dt = opt_.dt;
    double gn2 = 0.0;
    for (std::size_t i = 0; i < gth_.size(); ++i)
      gn2 += wN_[i] * (gth_[i] * gth_[i] + gT_[i] * gT_[i]) + wD_[i] * gq_[i] * gq_[i];
    if (dt * std::sqrt(gn2) > opt_.cfl_factor * std::sqrt(h_norm_sq()) + opt_.cfl_abs)
      throw std::runtime_error("step too large");
    for (std::size_t i = 0; i < s_.th.size(); ++i) {
      s_.th[i] = (s_.th[i] + dt * gth_[i]) * pth_[i];
      s_.q[i] = (s_.q[i] + dt * gq_[i]) * pq_[i];
      s_.T[i] = (s_.T[i] + dt * gT_[i]) * pT_[i];
    }
  }

  Grid grid_;
  PhysParams p_;
  StepperOptions opt_;
  int m_;
  std::vector<double> b_;
  detail::CosSeriesY bstencil_;
  std::vector<double> src_hat_;
  std::vector<double> pth_, pq_, pT_, wN_, wD_, lamN_, lamD_, invLamD_;
  detail::SpectralState s_;
  // workspaces
  std::vector<double> psi_, da_, tmp_, gth_, gq_, gT_, thp_, Tp_, wp_;
  fft::AlignedBuf pad_in_, prod_in_, prod_out_, px_, py_, qx_, qy_, tx_, ty_, wa_, wb_;
};

// spec-level single steps (tests, small experiments)

inline State step_transformed(const State& v, const OUState& /*z: F never reads Theta*/, double dt,
                              const PhysParams& p, const ForcingProfiles& prof, StepperOptions opt = {}) {
  opt.dt = dt;
  Stepper st(v.theta.grid(), p, prof, opt);
  st.load(v);
  st.step_transformed();
  return st.unload(v.time + dt, true);
}

inline State step_direct(const State& u, const std::vector<double>& dW, double dt, const PhysParams& p,
                         const ForcingProfiles& prof, StepperOptions opt = {}) {
  opt.dt = dt;
  Stepper st(u.theta.grid(), p, prof, opt);
  st.load(u);
  const int w = static_cast<int>(std::llround(std::sqrt(static_cast<double>(dW.size()))));
  st.step_direct(dW.empty() ? nullptr : dW.data(), w - 1);
  return st.unload(u.time + dt, false);
}

// ---- trajectories ----------------------------------------------------------

enum class EvolveMode { Direct, Transformed };

struct EvolveOptions {
  std::int64_t stride = 0;  // sink cadence in steps; 0 = endpoints only
  bool accumulate_v_norm = false;
  // Materialize z(theta_t omega) alongside a transformed run. The v-dynamics
  // are autonomous in this model (F never reads Theta), so the OU is only
  // integrated when the caller wants Z for reconstruction or sampling; the
  // path must then cover the spin-up window ahead of t0.
  bool with_z = false;
  double spin_up = 10.0;
  StepperOptions stepper{};
  // sink(t, state, z_amps): z_amps is null unless with_z is set
  std::function<void(double, const State&, const std::vector<double>*)> sink;
};

struct EvolveResult {
  State final_state;
  std::vector<double> z_final;    // transformed mode only
  double v_norm_sq_integral = 0;  // sum dt ||u||_V^2 when requested
};

// The discrete solution map phi(t1-t0, omega, x): a pure function of the
// initial state and the path's increments by absolute index, which is what
// makes the cocycle property exact in the tests.
inline EvolveResult evolve(const State& x0, const NoisePath& path, double t0, double t1, EvolveMode mode,
                           const PhysParams& p, const ForcingProfiles& prof, EvolveOptions opt = {}) {
  const double dt = path.dt();
  const std::int64_t i0 = detail::time_to_step(t0, dt, "t0");
  const std::int64_t i1 = detail::time_to_step(t1, dt, "t1");
  if (i1 < i0) throw std::invalid_argument("evolve: t1 must not precede t0");
  if (!path.covers(i0, i1)) throw std::invalid_argument("evolve: path window does not cover [t0, t1]");

  StepperOptions sopt = opt.stepper;
  sopt.dt = dt;
  Stepper st(x0.theta.grid(), p, prof, sopt);
  st.load(x0);

  std::optional<StationaryOu> ou;
  if (mode == EvolveMode::Transformed && opt.with_z) {
    ou.emplace(path, prof.b, opt.spin_up, i0);
    ou->advance_to(i0);
  }

  EvolveResult res;
  std::vector<double> dW(path.covariance().n_modes());
  auto emit = [&](std::int64_t i) {
    if (!opt.sink) return;
    State s = st.unload(static_cast<double>(i) * dt, mode == EvolveMode::Transformed);
    opt.sink(s.time, s, ou ? &ou->z_amps() : nullptr);
  };

  emit(i0);
  for (std::int64_t i = i0; i < i1; ++i) {
    if (mode == EvolveMode::Direct) {
      path.fill_increments(i, dW.data());
      st.step_direct(dW.data(), path.covariance().cutoff());
    } else {
      st.step_transformed();
      if (ou) ou->advance_to(i + 1);
    }
    if (opt.accumulate_v_norm) res.v_norm_sq_integral += dt * st.v_norm_sq();
    if (opt.stride > 0 && (i + 1 - i0) % opt.stride == 0 && i + 1 != i1) emit(i + 1);
  }
  if (i1 > i0) emit(i1);

  res.final_state = st.unload(static_cast<double>(i1) * dt, mode == EvolveMode::Transformed);
  if (ou) res.z_final = ou->z_amps();
  return res;
}

// ---- initial-condition helpers ---------------------------------------------

inline State random_state(const Grid& g, unsigned seed, int cutoff = 8, double decay = 0.4) {
  State s = make_state(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  auto fill = [&](Field& f, Parity px, Parity py) {
    const int mx0 = px == Parity::Cos ? 0 : 1;
    const int my0 = py == Parity::Cos ? 0 : 1;
    for (int mx = mx0; mx <= cutoff; ++mx)
      for (int my = my0; my <= cutoff; ++my) f.amp(mx, my) = dist(rng) * std::exp(-decay * (mx + my));
  };
  fill(s.theta, Parity::Cos, Parity::Cos);
  fill(s.q, Parity::Sin, Parity::Sin);
  fill(s.T, Parity::Cos, Parity::Cos);
  s.T.amp(0, 0) = 0.0;
  return s;
}

inline State scaled_to_h_norm_sq(State s, double target_sq) {
  const double cur = norm_H(s);
  if (cur == 0.0) throw std::invalid_argument("scaled_to_h_norm_sq: zero state");
  const double f = std::sqrt(target_sq) / cur;
  for (Field* fl : {&s.theta, &s.q, &s.T})
    for (double& v : fl->values()) v *= f;
  return s;
}

// u = v + Z with Z = (z, 0, 0)
inline State add_z(const State& v, const std::vector<double>& z_amps) {
  State u = v;
  u.theta = as_spectral(v.theta);
  for (std::size_t i = 0; i < z_amps.size(); ++i) u.theta.values()[i] += z_amps[i];
  u.transformed = false;
  return u;
}

inline double h_distance(const State& a, const State& b) {
  auto diff_sq = [](const Field& x, const Field& y) {
    Field d = as_spectral(x);
    Field e = as_spectral(y);
    for (std::size_t i = 0; i < d.values().size(); ++i) d.values()[i] -= e.values()[i];
    const double s = norm_l2(d);
    return s * s;
  };
  return std::sqrt(diff_sq(a.theta, b.theta) + diff_sq(a.q, b.q) + diff_sq(a.T, b.T));
}

}  // namespace qgebm
