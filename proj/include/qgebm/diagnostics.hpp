#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgebm/dynamics.hpp"

// Numerical checks of the random-dynamical-systems claims: cocycle residuals,
// dissipativity fits, absorbing sets, pullback samples, contraction rates,
// random fixed points, ergodic averages, mean-square bounds and invariant
// measures. Constants are estimated by regression along trajectories; the
// verdicts assert signs, monotonicities and inequality directions.

namespace qgebm {

// ---- model bundle -----------------------------------------------------------

struct ModelSetup {
  Grid grid;
  PhysParams params;
  ForcingProfiles profiles;
  CovarianceSpec noise;
  double dt = 1e-3;
  double spin_up = 10.0;
};

inline NoisePath make_path(const ModelSetup& s, double t_min, double t_max, std::uint64_t seed) {
  return sample_path(s.noise, s.grid, t_min, t_max, s.dt, seed);
}

// ---- small statistics helpers ----------------------------------------------

namespace stats {

struct LinFit {
  double slope = 0.0, intercept = 0.0, slope_se = 0.0;
  int n = 0;
  double slope_ci95() const { return 1.96 * slope_se; }
};

inline LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  LinFit f;
  f.n = static_cast<int>(x.size());
  if (f.n < 3) throw std::invalid_argument("linear_fit: need at least 3 points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / f.n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / f.n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < f.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (int i = 0; i < f.n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  f.slope_se = f.n > 2 ? std::sqrt(ss / (f.n - 2) / sxx) : 0.0;
  return f;
}

struct MeanSe {
  double mean = 0.0, se = 0.0;
  int n = 0;
};

inline MeanSe mean_se(const std::vector<double>& x) {
  MeanSe m;
  m.n = static_cast<int>(x.size());
  if (m.n == 0) return m;
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / m.n;
  double v = 0.0;
  for (double xi : x) v += (xi - m.mean) * (xi - m.mean);
  m.se = m.n > 1 ? std::sqrt(v / (m.n - 1) / m.n) : 0.0;
  return m;
}

// standard error of a time average from correlated samples
inline MeanSe batch_means(const std::vector<double>& x, int n_batches = 20) {
  MeanSe m;
  const int n = static_cast<int>(x.size());
  if (n < 2 * n_batches) return mean_se(x);
  const int bl = n / n_batches;
  std::vector<double> bm(n_batches, 0.0);
  for (int b = 0; b < n_batches; ++b) {
    for (int i = 0; i < bl; ++i) bm[b] += x[b * bl + i];
    bm[b] /= bl;
  }
  MeanSe r = mean_se(bm);
  r.n = n;
  return r;
}

}  // namespace stats

// ---- verdicts and the report -------------------------------------------------

struct Verdict {
  std::string name;
  std::string inequality;  // which inequality the verdict checks
  double tolerance = 0.0;
  bool pass = false;
  bool applicable = true;
  std::map<std::string, double> values;
};

struct DiagnosticsReport {
  std::map<std::string, double> constants;  // fitted C2, alpha1, C3, R, mean log k, ...
  std::vector<Verdict> verdicts;

  void add(Verdict v) { verdicts.push_back(std::move(v)); }
  bool all_pass() const {
    for (const auto& v : verdicts)
      if (v.applicable && !v.pass) return false;
    return true;
  }
};

// ---- observables -------------------------------------------------------------

struct Observable {
  std::string name;
  std::function<double(const State&)> fn;
};

inline std::vector<Observable> builtin_observables(const ModelSetup& s) {
  const double alpha = std::max(dissipation_alpha(s.params), 1e-6);
  const double lam0 = poincare_lambda0(s.grid, PoincareBc::NeumannZeroMean);
  PhysParams p = s.params;
  return {
      {"u_h2", [](const State& u) { const double n = norm_H(u); return n * n; }},
      {"theta2", [](const State& u) { const double n = norm_l2(u.theta); return n * n; }},
      {"q2", [](const State& u) { const double n = norm_l2(u.q); return n * n; }},
      {"lyapunov", [alpha, lam0, p](const State& u) { return lyapunov(u, alpha, lam0, p); }},
      {"kinetic", [](const State& u) { return grad_sq_norm(invert_vorticity(as_spectral(u.q))); }},
  };
}

// ---- cocycle ------------------------------------------------------------------

// || phi(t+tau, omega, x) - phi(t, theta_tau omega, phi(tau, omega, x)) ||_H
inline double cocycle_residual(const ModelSetup& s, const NoisePath& path, const State& x, double t, double tau,
                               EvolveMode mode = EvolveMode::Direct) {
  auto full = evolve(x, path, 0.0, t + tau, mode, s.params, s.profiles);
  auto first = evolve(x, path, 0.0, tau, mode, s.params, s.profiles);
  auto second =
      evolve(first.final_state, wiener_shift(path, tau), 0.0, t, mode, s.params, s.profiles);
  return h_distance(full.final_state, second.final_state);
}

// ---- dissipativity / absorption ----------------------------------------------

struct DissipativityFit {
  double C2 = 0.0, alpha1 = 0.0, alpha1_se = 0.0, C3 = 0.0;
  bool alpha1_positive_95 = false;
  bool degenerate = false;  // every IC already inside the floor
  std::vector<std::vector<std::pair<double, double>>> histories;  // (t, |v|_H^2) per IC
};

inline DissipativityFit dissipativity_fit(const ModelSetup& s, const std::vector<State>& ic_set,
                                          const NoisePath& path, double horizon, std::int64_t stride = 50) {
  if (ic_set.size() < 2) throw std::invalid_argument("dissipativity_fit: need at least 2 initial conditions");
  double lo = 1e300, hi = 0.0;
  for (const auto& ic : ic_set) {
    const double n2 = norm_H(ic) * norm_H(ic);
    lo = std::min(lo, n2);
    hi = std::max(hi, n2);
  }
  if (hi < 1e3 * lo)
    throw std::invalid_argument("dissipativity_fit: initial norms must span at least 3 decades");

  DissipativityFit out;
  std::size_t largest = 0;
  double largest_n2 = 0.0;
  for (std::size_t i = 0; i < ic_set.size(); ++i) {
    std::vector<std::pair<double, double>> hist;
    EvolveOptions opt;
    opt.stride = stride;
    opt.sink = [&](double t, const State& v, const std::vector<double>*) {
      const double n = norm_H(v);
      hist.push_back({t, n * n});
    };
    evolve(ic_set[i], path, 0.0, horizon, EvolveMode::Transformed, s.params, s.profiles, opt);
    out.histories.push_back(std::move(hist));
    const double n2 = norm_H(ic_set[i]) * norm_H(ic_set[i]);
    if (n2 > largest_n2) {
      largest_n2 = n2;
      largest = i;
    }
  }

  // floor from the pooled tail (last quarter of every trajectory)
  double floor_sum = 0.0;
  int floor_n = 0;
  for (const auto& h : out.histories) {
    for (std::size_t i = 3 * h.size() / 4; i < h.size(); ++i) {
      floor_sum += h[i].second;
      ++floor_n;
    }
  }
  out.C3 = floor_sum / std::max(1, floor_n);

  // transient regression on the largest start: log(|v|^2 - C3) ~ -alpha1 t
  std::vector<double> ts, ys;
  for (const auto& [t, y] : out.histories[largest]) {
    const double excess = y - out.C3;
    if (excess > std::max(4.0 * out.C3, 1e-12)) {
      ts.push_back(t);
      ys.push_back(std::log(excess));
    }
  }
  if (ts.size() < 8) {
    out.degenerate = true;
    out.alpha1_positive_95 = true;  // nothing above the floor: pass trivially, flagged
    return out;
  }
  auto fit = stats::linear_fit(ts, ys);
  out.alpha1 = -fit.slope;
  out.alpha1_se = fit.slope_se;
  out.C2 = std::exp(fit.intercept) / largest_n2;
  out.alpha1_positive_95 = out.alpha1 - fit.slope_ci95() > 0.0;
  return out;
}

struct AbsorptionResult {
  struct Entry {
    double entry_time = -1.0;  // first time inside the ball; -1 if never
    bool invariant = false;    // never leaves 1.05 R afterwards
  };
  std::vector<Entry> entries;
  bool pass = false;
};

// entry into and forward invariance of {|v|_H^2 <= R}, tolerance factor 1.05
inline AbsorptionResult absorption_test(const ModelSetup& s, const std::vector<State>& ic_set,
                                        const std::vector<NoisePath>& paths, double R, double horizon,
                                        std::int64_t stride = 50) {
  AbsorptionResult out;
  out.pass = true;
  for (std::size_t i = 0; i < ic_set.size(); ++i) {
    const NoisePath& path = paths[i % paths.size()];
    AbsorptionResult::Entry e;
    bool left_after_entry = false;
    EvolveOptions opt;
    opt.stride = stride;
    opt.sink = [&](double t, const State& v, const std::vector<double>*) {
      const double n = norm_H(v);
      const double n2 = n * n;
      if (e.entry_time < 0.0 && n2 <= R) e.entry_time = t;
      if (e.entry_time >= 0.0 && n2 > 1.05 * R) left_after_entry = true;
    };
    evolve(ic_set[i], path, 0.0, horizon, EvolveMode::Transformed, s.params, s.profiles, opt);
    e.invariant = e.entry_time >= 0.0 && !left_after_entry;
    out.pass = out.pass && e.invariant;
    out.entries.push_back(e);
  }
  return out;
}

// ---- pullback -----------------------------------------------------------------

struct PullbackResult {
  std::vector<double> t_list;
  std::vector<State> states;       // phi(t, theta_{-t} omega, x) at time 0
  std::vector<double> increments;  // Cauchy distances between consecutive samples
};

inline PullbackResult pullback_sample(const ModelSetup& s, const State& x, const NoisePath& path,
                                      std::vector<double> t_list, EvolveMode mode = EvolveMode::Direct) {
  std::sort(t_list.begin(), t_list.end());
  PullbackResult out;
  out.t_list = t_list;
  for (double t : t_list) {
    if (t == 0.0) {
      State y = x;
      y.theta = as_spectral(x.theta);
      y.q = as_spectral(x.q);
      y.T = as_spectral(x.T);
      out.states.push_back(std::move(y));
      continue;
    }
    auto res = evolve(x, path, -t, 0.0, mode, s.params, s.profiles);
    out.states.push_back(res.final_state);
  }
  for (std::size_t i = 0; i + 1 < out.states.size(); ++i)
    out.increments.push_back(h_distance(out.states[i], out.states[i + 1]));
  return out;
}

// ---- contraction and the random fixed point ------------------------------------

struct ContractionResult {
  std::vector<double> log_k;  // one sample per unit window (max over pairs)
  double mean_log_k = 0.0;
  double se = 0.0;
  bool pass = false;  // mean log k < 0 at 95% confidence
  int skipped_pairs = 0;
};

// k(omega) over consecutive windows along one path. Pairs are renormalized to
// a small separation at each window start so every window samples the
// contraction factor of the tangent flow instead of the roundoff floor.
inline ContractionResult contraction_rate(const ModelSetup& s, const NoisePath& path,
                                          const std::vector<std::pair<State, State>>& pair_set, double window,
                                          int n_windows, double renorm_eps = 1e-6) {
  if (pair_set.empty()) throw std::invalid_argument("contraction_rate: empty pair set");
  ContractionResult out;
  const std::int64_t wsteps = detail::time_to_step(window, path.dt(), "window");

  StepperOptions sopt;
  sopt.dt = path.dt();
  std::vector<Stepper> st;
  st.reserve(2 * pair_set.size());
  for (const auto& [a, b] : pair_set) {
    if (h_distance(a, b) == 0.0) {
      ++out.skipped_pairs;
      continue;
    }
    st.emplace_back(s.grid, s.params, s.profiles, sopt);
    st.back().load(a);
    st.emplace_back(s.grid, s.params, s.profiles, sopt);
    st.back().load(b);
  }
  if (st.empty()) throw std::invalid_argument("contraction_rate: all pairs coincident");

  auto renormalize = [&](Stepper& base, Stepper& other) {
    // keep the separation direction, reset its magnitude
    double d2 = 0.0;
    const auto& a = base.state();
    auto& b = other.state();
    auto acc = [&](const std::vector<double>& u, const std::vector<double>& v) {
      for (std::size_t i = 0; i < u.size(); ++i) d2 += (u[i] - v[i]) * (u[i] - v[i]);
    };
    acc(a.th, b.th);
    acc(a.q, b.q);
    acc(a.T, b.T);
    const double d = std::sqrt(d2);
    if (d == 0.0) return;
    const double f = renorm_eps / d;
    for (std::size_t i = 0; i < b.th.size(); ++i) {
      b.th[i] = a.th[i] + f * (b.th[i] - a.th[i]);
      b.q[i] = a.q[i] + f * (b.q[i] - a.q[i]);
      b.T[i] = a.T[i] + f * (b.T[i] - a.T[i]);
    }
  };
  for (std::size_t p = 0; p + 1 < st.size(); p += 2) renormalize(st[p], st[p + 1]);

  std::int64_t step0 = detail::time_to_step(0.0, path.dt(), "t0");
  for (int w = 0; w < n_windows; ++w) {
    std::vector<double> d_before(st.size() / 2);
    for (std::size_t p = 0; p + 1 < st.size(); p += 2)
      d_before[p / 2] = h_distance(st[p].unload(0, true), st[p + 1].unload(0, true));
    for (std::int64_t i = 0; i < wsteps; ++i) {
      for (auto& stp : st) stp.step_transformed();
    }
    step0 += wsteps;
    double kmax = 0.0;
    for (std::size_t p = 0; p + 1 < st.size(); p += 2) {
      const double d_after = h_distance(st[p].unload(0, true), st[p + 1].unload(0, true));
      kmax = std::max(kmax, d_after / d_before[p / 2]);
    }
    out.log_k.push_back(std::log(kmax));
    for (std::size_t p = 0; p + 1 < st.size(); p += 2) renormalize(st[p], st[p + 1]);
  }

  auto m = stats::mean_se(out.log_k);
  out.mean_log_k = m.mean;
  out.se = m.se;
  out.pass = m.mean + 1.96 * m.se < 0.0;
  return out;
}

struct FixedPointResult {
  State mean_state;
  double spread = 0.0;  // max pairwise H distance at t_sync
  bool pass = false;    // spread < 1e-8 (1 + |mean|_H)
  std::vector<std::pair<double, double>> spread_history;  // (t, spread)
  double spread_slope = 0.0;                              // d log(spread)/dt over the clean range
};

// n_starts trajectories on one path synchronize onto u*(theta_{t_sync} omega)
inline FixedPointResult fixed_point_estimate(const ModelSetup& s, const NoisePath& path, int n_starts,
                                             double t_sync, EvolveMode mode = EvolveMode::Direct,
                                             double ic_norm = 1.0, std::int64_t stride = 1000) {
  if (n_starts < 2) throw std::invalid_argument("fixed_point_estimate: need at least 2 starts");
  StepperOptions sopt;
  sopt.dt = path.dt();
  std::vector<Stepper> st;
  st.reserve(n_starts);
  for (int i = 0; i < n_starts; ++i) {
    st.emplace_back(s.grid, s.params, s.profiles, sopt);
    st.back().load(scaled_to_h_norm_sq(random_state(s.grid, 7000 + 13 * i, 6), ic_norm));
  }

  const std::int64_t n_steps = detail::time_to_step(t_sync, path.dt(), "t_sync");
  std::vector<double> dW(path.covariance().n_modes());
  FixedPointResult out;
  auto spread_now = [&]() {
    double sp = 0.0;
    for (int a = 0; a < n_starts; ++a)
      for (int b = a + 1; b < n_starts; ++b)
        sp = std::max(sp, h_distance(st[a].unload(0, false), st[b].unload(0, false)));
    return sp;
  };
  for (std::int64_t i = 0; i < n_steps; ++i) {
    if (mode == EvolveMode::Direct) {
      path.fill_increments(i, dW.data());
      for (auto& stp : st) stp.step_direct(dW.data(), path.covariance().cutoff());
    } else {
      for (auto& stp : st) stp.step_transformed();
    }
    if ((i + 1) % stride == 0 || i + 1 == n_steps)
      out.spread_history.push_back({static_cast<double>(i + 1) * path.dt(), spread_now()});
  }

  out.spread = out.spread_history.back().second;
  State mean = st[0].unload(t_sync, mode == EvolveMode::Transformed);
  for (int i = 1; i < n_starts; ++i) {
    const auto& si = st[i].state();
    for (std::size_t j = 0; j < mean.theta.values().size(); ++j) {
      mean.theta.values()[j] += si.th[j];
      mean.q.values()[j] += si.q[j];
      mean.T.values()[j] += si.T[j];
    }
  }
  for (Field* f : {&mean.theta, &mean.q, &mean.T})
    for (double& v : f->values()) v /= n_starts;
  out.mean_state = mean;
  out.pass = out.spread < 1e-8 * (1.0 + norm_H(mean));

  // slope of log spread over the exponential range
  std::vector<double> ts, ls;
  const double top = out.spread_history.front().second;
  for (const auto& [t, sp] : out.spread_history)
    if (sp > 1e-11 * (1.0 + norm_H(mean)) && sp < 0.5 * top && t > 1.0) {
      ts.push_back(t);
      ls.push_back(std::log(sp));
    }
  if (ts.size() >= 3) out.spread_slope = stats::linear_fit(ts, ls).slope;
  return out;
}

// ---- ergodicity ----------------------------------------------------------------

struct ErgodicityResult {
  double time_avg = 0.0, time_se = 0.0;
  double ens_avg = 0.0, ens_se = 0.0;
  bool pass = false;  // agreement within 3 combined standard errors
};

inline ErgodicityResult ergodicity_test(const ModelSetup& s, const Observable& obs, std::uint64_t seed,
                                        double t_long, double burn_in, int ensemble_size, double t_snapshot,
                                        const State& u0, std::int64_t stride = 100) {
  ErgodicityResult out;

  // time average along one path
  {
    NoisePath path = make_path(s, 0.0, burn_in + t_long, seed);
    std::vector<double> samples;
    EvolveOptions opt;
    opt.stride = stride;
    opt.sink = [&](double t, const State& u, const std::vector<double>*) {
      if (t > burn_in) samples.push_back(obs.fn(u));
    };
    evolve(u0, path, 0.0, burn_in + t_long, EvolveMode::Direct, s.params, s.profiles, opt);
    auto m = stats::batch_means(samples);
    out.time_avg = m.mean;
    out.time_se = m.se;
  }

  // ensemble average at t_snapshot over independent seeds
  {
    std::vector<double> vals(ensemble_size);
    for (int i = 0; i < ensemble_size; ++i) {
      NoisePath path = make_path(s, 0.0, t_snapshot, seed + 1 + static_cast<std::uint64_t>(i));
      auto res = evolve(u0, path, 0.0, t_snapshot, EvolveMode::Direct, s.params, s.profiles);
      vals[i] = obs.fn(res.final_state);
    }
    auto m = stats::mean_se(vals);
    out.ens_avg = m.mean;
    out.ens_se = m.se;
  }

  const double combined = std::sqrt(out.time_se * out.time_se + out.ens_se * out.ens_se);
  out.pass = std::abs(out.time_avg - out.ens_avg) <= 3.0 * combined + 1e-14;
  return out;
}

// ---- mean-square bounds ---------------------------------------------------------

struct BoundsResult {
  // envelope pieces at the setup's own sigma^2
  std::vector<double> t_grid;
  std::vector<double> mean_u2;      // E |u(t)|_H^2
  std::vector<double> mean_int_v2;  // E int_0^t |u|_V^2
  double C_hat = 0.0;
  double C_src = 0.0;  // 6 a^2 l^2 + 6 |S_a|^2 + 6 |S_o|^2 + tr Q
  double alpha = 0.0;  // min(1, nu, kappa)
  bool envelope_pass = false;  // C_hat <= 10 C_src

  std::vector<double> sigma2_sweep;
  std::vector<double> tail_theta2;  // tail E |Theta|^2 per sweep entry
  bool monotone_pass = false;
};

inline BoundsResult mean_square_bound_check(const ModelSetup& s, const std::vector<double>& sigma2_sweep,
                                            int ensemble_size, double t_end, std::uint64_t seed,
                                            std::int64_t stride = 100) {
  BoundsResult out;
  out.alpha = std::min({1.0, s.params.nu, s.params.kappa});
  out.sigma2_sweep = sigma2_sweep;

  const double sa2 = norm_l2(s.profiles.S_a) * norm_l2(s.profiles.S_a);
  const double so2 = norm_l2(s.profiles.S_o) * norm_l2(s.profiles.S_o);
  out.C_src = 6.0 * s.params.a * s.params.a * s.grid.l * s.grid.l + 6.0 * sa2 + 6.0 * so2 +
              trace_Q(s.noise, s.grid);

  const State u0 = make_state(s.grid);
  const std::int64_t n_steps = detail::time_to_step(t_end, s.dt, "t_end");

  // one ensemble: tail E|Theta|^2, optionally the E|u(t)|^2 and
  // E int |u|_V^2 records for the envelope
  auto run_ensemble = [&](double sigma2, bool record_envelope) {
    ModelSetup ms = s;
    ms.noise.sigma2 = sigma2;
    std::vector<double> sum_u2, sum_iv2;
    double tail_sum = 0.0;
    std::int64_t tail_n = 0;
    StepperOptions sopt;
    sopt.dt = ms.dt;
    for (int e = 0; e < ensemble_size; ++e) {
      NoisePath path = sample_path(ms.noise, ms.grid, 0.0, t_end, ms.dt, seed + 17 * e + 1);
      Stepper st(ms.grid, ms.params, ms.profiles, sopt);
      st.load(u0);
      std::vector<double> dW(path.covariance().n_modes());
      double iv2 = 0.0;
      std::size_t slot = 0;
      auto record = [&](std::int64_t i) {
        if (record_envelope) {
          if (sum_u2.size() <= slot) {
            sum_u2.push_back(0.0);
            sum_iv2.push_back(0.0);
            if (e == 0) out.t_grid.push_back(static_cast<double>(i) * ms.dt);
          }
          sum_u2[slot] += st.h_norm_sq();
          sum_iv2[slot] += iv2;
          ++slot;
        }
        if (static_cast<double>(i) * ms.dt >= 0.75 * t_end) {
          State snap = st.unload(static_cast<double>(i) * ms.dt, false);
          const double nt = norm_l2(snap.theta);
          tail_sum += nt * nt;
          ++tail_n;
        }
      };
      record(0);
      for (std::int64_t i = 0; i < n_steps; ++i) {
        path.fill_increments(i, dW.data());
        st.step_direct(dW.data(), path.covariance().cutoff());
        if (record_envelope) iv2 += ms.dt * st.v_norm_sq();
        if ((i + 1) % stride == 0 || i + 1 == n_steps) record(i + 1);
      }
    }
    if (record_envelope) {
      out.mean_u2.resize(sum_u2.size());
      out.mean_int_v2.resize(sum_iv2.size());
      for (std::size_t j = 0; j < sum_u2.size(); ++j) {
        out.mean_u2[j] = sum_u2[j] / ensemble_size;
        out.mean_int_v2[j] = sum_iv2[j] / ensemble_size;
      }
    }
    return tail_sum / std::max<std::int64_t>(1, tail_n);
  };

  run_ensemble(s.noise.sigma2, true);
  const double e_u0 = out.mean_u2.empty() ? 0.0 : out.mean_u2.front();
  out.C_hat = 0.0;
  for (std::size_t j = 1; j < out.t_grid.size(); ++j) {
    const double y = out.mean_u2[j] + out.alpha * out.mean_int_v2[j] - e_u0;
    out.C_hat = std::max(out.C_hat, y / out.t_grid[j]);
  }
  out.envelope_pass = out.C_hat <= 10.0 * out.C_src;

  for (double s2 : sigma2_sweep) out.tail_theta2.push_back(run_ensemble(s2, false));
  out.monotone_pass = true;
  for (std::size_t i = 1; i < out.tail_theta2.size(); ++i)
    if (out.tail_theta2[i] < out.tail_theta2[i - 1]) out.monotone_pass = false;

  return out;
}

// ---- invariant measure ------------------------------------------------------------

struct Histogram {
  double lo = 0.0, hi = 0.0;
  std::vector<double> counts;  // normalized to sum 1
};

struct InvariantMeasureResult {
  std::vector<std::string> names;
  std::vector<double> means;
  std::vector<double> ses;  // batch-means standard errors
  std::vector<Histogram> histograms;
};

inline InvariantMeasureResult invariant_measure_estimate(const ModelSetup& s,
                                                         const std::vector<Observable>& observables,
                                                         const NoisePath& path, double t_from, double t_long,
                                                         double burn_in, const State& u0, int n_bins = 32,
                                                         std::int64_t stride = 100) {
  std::vector<std::vector<double>> samples(observables.size());
  EvolveOptions opt;
  opt.stride = stride;
  opt.sink = [&](double t, const State& u, const std::vector<double>*) {
    if (t > t_from + burn_in)
      for (std::size_t i = 0; i < observables.size(); ++i) samples[i].push_back(observables[i].fn(u));
  };
  evolve(u0, path, t_from, t_from + burn_in + t_long, EvolveMode::Direct, s.params, s.profiles, opt);

  InvariantMeasureResult out;
  for (std::size_t i = 0; i < observables.size(); ++i) {
    out.names.push_back(observables[i].name);
    auto m = stats::batch_means(samples[i]);
    out.means.push_back(m.mean);
    out.ses.push_back(m.se);
    Histogram h;
    auto [lo, hi] = std::minmax_element(samples[i].begin(), samples[i].end());
    h.lo = *lo;
    h.hi = *hi > *lo ? *hi : *lo + 1.0;
    h.counts.assign(n_bins, 0.0);
    for (double v : samples[i]) {
      int b = static_cast<int>((v - h.lo) / (h.hi - h.lo) * n_bins);
      b = std::clamp(b, 0, n_bins - 1);
      h.counts[b] += 1.0;
    }
    for (double& c : h.counts) c /= samples[i].size();
    out.histograms.push_back(std::move(h));
  }
  return out;
}

// ---- tempered growth --------------------------------------------------------------

// least-squares slope of log(running max |z|) over the second half of the run;
// subexponential growth shows up as a slope indistinguishable from zero
inline double tempered_slope(const std::vector<std::pair<double, double>>& t_and_max) {
  std::vector<double> ts, ys;
  for (std::size_t i = t_and_max.size() / 2; i < t_and_max.size(); ++i) {
    ts.push_back(t_and_max[i].first);
    ys.push_back(std::log(std::max(t_and_max[i].second, 1e-300)));
  }
  if (ts.size() < 3) throw std::invalid_argument("tempered_slope: too few samples");
  return stats::linear_fit(ts, ys).slope;
}

}  // namespace qgebm
