#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "qgebm/dynamics.hpp"

using namespace qgebm;
using qgebm::testing::max_abs;
using qgebm::testing::max_abs_diff;

namespace {

ForcingProfiles zero_data_profiles(const Grid& g) {
  return ForcingProfiles{cos_profile(g, 0.5, 0.4), cos_profile(g, 0.0, 0.0), cos_profile(g, 0.0, 0.0)};
}

PhysParams zero_data_params() {
  PhysParams p;
  p.a = 0.0;
  return p;
}

CovarianceSpec quiet_noise() {
  CovarianceSpec s;
  s.sigma2 = 0.0;
  s.cutoff = 2;
  return s;
}

// full tendency -A(u) + F(u), for the RK4 reference
Tendency full_rhs(const State& u, const PhysParams& p, const ForcingProfiles& prof) {
  Tendency a = apply_A(u, p, prof);
  Tendency f = rhs_F(u, p, prof);
  for (std::size_t i = 0; i < a.theta.values().size(); ++i) {
    f.theta.values()[i] -= a.theta.values()[i];
    f.q.values()[i] -= a.q.values()[i];
    f.T.values()[i] -= a.T.values()[i];
  }
  return f;
}

State axpy(const State& u, double h, const Tendency& k) {
  State out = u;
  for (std::size_t i = 0; i < out.theta.values().size(); ++i) {
    out.theta.values()[i] += h * k.theta.values()[i];
    out.q.values()[i] += h * k.q.values()[i];
    out.T.values()[i] += h * k.T.values()[i];
  }
  return out;
}

State rk4_step(const State& u, double dt, const PhysParams& p, const ForcingProfiles& prof) {
  Tendency k1 = full_rhs(u, p, prof);
  Tendency k2 = full_rhs(axpy(u, dt / 2, k1), p, prof);
  Tendency k3 = full_rhs(axpy(u, dt / 2, k2), p, prof);
  Tendency k4 = full_rhs(axpy(u, dt, k3), p, prof);
  State out = u;
  for (std::size_t i = 0; i < out.theta.values().size(); ++i) {
    out.theta.values()[i] += dt / 6 *
        (k1.theta.values()[i] + 2 * k2.theta.values()[i] + 2 * k3.theta.values()[i] + k4.theta.values()[i]);
    out.q.values()[i] +=
        dt / 6 * (k1.q.values()[i] + 2 * k2.q.values()[i] + 2 * k3.q.values()[i] + k4.q.values()[i]);
    out.T.values()[i] +=
        dt / 6 * (k1.T.values()[i] + 2 * k2.T.values()[i] + 2 * k3.T.values()[i] + k4.T.values()[i]);
  }
  out.time += dt;
  return out;
}

}  // namespace

TEST_CASE("check_condition") {
  PhysParams p;
  auto c = check_condition(p);
  CHECK(c.holds);
  CHECK(c.margin == Catch::Approx(4.0 - 1.0 / (kPi * kPi)).epsilon(1e-12));

  PhysParams weak;
  weak.nu = 0.01;
  weak.r = 0.01;
  weak.beta = 2.0;
  weak.l = kPi;
  auto c2 = check_condition(weak);
  CHECK_FALSE(c2.holds);

  PhysParams nobeta;
  nobeta.beta = 0.0;
  nobeta.nu = 0.3;
  nobeta.r = 0.7;
  auto c3 = check_condition(nobeta);
  CHECK(c3.holds);
  CHECK(c3.margin == Catch::Approx(4.0 * 0.3 * 0.7));
}

TEST_CASE("params and profiles validation") {
  PhysParams p;
  p.nu = 0.0;
  CHECK_THROWS_AS(validate_params(p), std::invalid_argument);

  Grid g = make_grid(1.0, 16);
  CHECK_THROWS_WITH(default_profiles(g, 0.5, 0.6), Catch::Matchers::ContainsSubstring("0 < b < 1"));
  CHECK_NOTHROW(default_profiles(g));
}

TEST_CASE("apply_A") {
  Grid g = make_grid(1.0, 16);
  PhysParams p;
  p.nu = 2.0;
  p.kappa = 3.0;

  SECTION("zero maps to zero") {
    ForcingProfiles prof = default_profiles(g);
    Tendency t = apply_A(make_state(g), p, prof);
    CHECK(max_abs(t.theta) == 0.0);
    CHECK(max_abs(t.q) == 0.0);
    CHECK(max_abs(t.T) == 0.0);
  }

  SECTION("constant Theta with constant b") {
    ForcingProfiles prof{cos_profile(g, 0.3, 0.0), cos_profile(g, 0.0, 0.0), cos_profile(g, 0.0, 0.0)};
    State u = make_state(g);
    u.theta.amp(0, 0) = 2.0;
    Tendency t = apply_A(u, p, prof);
    CHECK(t.theta.amp(0, 0) == Catch::Approx(1.3 * 2.0).epsilon(1e-13));
    CHECK(max_abs(t.q) == 0.0);
  }

  SECTION("single q mode is an eigenfunction of -nu Delta") {
    ForcingProfiles prof = default_profiles(g);
    State u = make_state(g);
    u.q.amp(2, 3) = 1.5;
    Tendency t = apply_A(u, p, prof);
    const double lam = kPi * kPi * 13.0;
    CHECK(t.q.amp(2, 3) == Catch::Approx(p.nu * lam * 1.5).epsilon(1e-13));
  }
}

TEST_CASE("rhs_F") {
  Grid g = make_grid(1.0, 32);
  PhysParams p;
  ForcingProfiles prof = default_profiles(g);

  SECTION("zero state leaves only the sources") {
    Tendency t = rhs_F(make_state(g), p, prof);
    Field expect(g, kNeumann, Rep::Physical);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        expect(i, j) = -p.a + prof.S_a(i, j) - prof.b(i, j) * prof.S_o(i, j);
    CHECK(max_abs_diff(to_physical(t.theta), expect) < 1e-12);
    CHECK(max_abs(t.q) == 0.0);
    CHECK(max_abs(t.T) == 0.0);
  }

  SECTION("single q mode with beta = 0 gives -r q") {
    PhysParams p0;
    p0.beta = 0.0;
    p0.r = 0.8;
    State u = make_state(g);
    u.q.amp(1, 2) = 0.9;
    Tendency t = rhs_F(u, p0, prof);
    CHECK(t.q.amp(1, 2) == Catch::Approx(-0.8 * 0.9).margin(1e-12));
    double off = 0.0;
    for (int kx = 0; kx < g.n; ++kx)
      for (int ky = 0; ky < g.n; ++ky)
        if (!(kx == 0 && ky == 1)) off = std::max(off, std::abs(t.q(kx, ky)));
    CHECK(off < 1e-12);
  }

  SECTION("compositional oracle from grid-spectral primitives") {
    State u = random_state(g, 91, 8);
    Tendency t = rhs_F(u, p, prof);

    Field psi = invert_vorticity(u.q);
    // Theta row assembled in a different grouping
    Field bt(g, kNeumann, Rep::Physical);
    Field Tp = to_physical(u.T);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) bt(i, j) = prof.b(i, j) * Tp(i, j);
    Field srcs(g, kNeumann, Rep::Physical);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) srcs(i, j) = -p.a + prof.S_a(i, j) - prof.b(i, j) * prof.S_o(i, j);
    Field th_ref = to_spectral(bt);
    Field th_src = to_spectral(srcs);
    for (std::size_t i = 0; i < th_ref.values().size(); ++i) th_ref.values()[i] += th_src.values()[i];
    CHECK(max_abs_diff(t.theta, th_ref) < 1e-12 * (1.0 + max_abs(th_ref)));

    // q row: separate projections of the two linear terms
    Field ty = gradient(u.T, Axis::Y);
    for (double& v : ty.values()) v *= p.Pr * p.Ra;
    Field px = gradient(psi, Axis::X);
    for (double& v : px.values()) v *= p.beta;
    Field q_ref = project(ty, kDirichlet);
    Field px_proj = project(px, kDirichlet);
    Field jq = jacobian(psi, u.q);
    for (std::size_t i = 0; i < q_ref.values().size(); ++i)
      q_ref.values()[i] += -p.r * u.q.values()[i] - px_proj.values()[i] - jq.values()[i];
    CHECK(max_abs_diff(t.q, q_ref) < 1e-12 * (1.0 + max_abs(q_ref)));

    // T row
    Field jt = jacobian(u.T, psi);
    for (double& v : jt.values()) v = -v;
    jt.amp(0, 0) = 0.0;
    CHECK(max_abs_diff(t.T, jt) < 1e-12 * (1.0 + max_abs(jt)));
  }
}

TEST_CASE("lyapunov functional") {
  Grid g = make_grid(1.0, 16);
  PhysParams p;

  SECTION("zero state") { CHECK(lyapunov(make_state(g), 1.0, 2.0, p) == 0.0); }

  SECTION("theta-only with ||theta||^2 = 2 and lambda0 = 2") {
    State v = make_state(g);
    v.theta.amp(0, 0) = std::sqrt(2.0);
    CHECK(lyapunov(v, 1.0, 2.0, p) == Catch::Approx(2.0).epsilon(1e-13));
  }

  SECTION("recomposition from norm primitives") {
    State v = random_state(g, 5);
    const double alpha = 0.7, lam0 = kPi * kPi;
    const double th = norm_l2(v.theta), t = norm_l2(v.T), q = norm_l2(v.q);
    const double expect =
        0.5 * lam0 * th * th + t * t + alpha * lam0 / (2.0 * p.Pr * p.Pr * p.Ra * p.Ra) * q * q;
    CHECK(lyapunov(v, alpha, lam0, p) == Catch::Approx(expect).epsilon(1e-13));
  }

  SECTION("alpha must be positive") {
    CHECK_THROWS_AS(lyapunov(make_state(g), 0.0, 1.0, p), std::invalid_argument);
  }
}

TEST_CASE("norm_H and norm_V") {
  Grid g = make_grid(1.0, 32);

  SECTION("zero state") {
    CHECK(norm_H(make_state(g)) == 0.0);
    CHECK(norm_V(make_state(g)) == 0.0);
  }

  SECTION("constant Theta integrates to c l") {
    State u = make_state(g);
    u.theta.amp(0, 0) = 3.0;
    CHECK(norm_H(u) == Catch::Approx(3.0 * g.l).epsilon(1e-13));
  }

  SECTION("single modes match a fine quadrature oracle") {
    State u = make_state(g);
    u.theta.amp(2, 1) = 2.0;
    u.q.amp(1, 1) = 0.5;
    u.T.amp(0, 3) = 1.0;

    // midpoint quadrature of the analytic fields on a 512^2 grid
    const int nq = 512;
    const double h = g.l / nq;
    double h2 = 0.0, v2 = 0.0;
    for (int i = 0; i < nq; ++i)
      for (int j = 0; j < nq; ++j) {
        const double x = (i + 0.5) * h, y = (j + 0.5) * h;
        const double th = 2.0 * std::cos(2 * kPi * x) * std::cos(kPi * y);
        const double thx = -2.0 * 2 * kPi * std::sin(2 * kPi * x) * std::cos(kPi * y);
        const double thy = -2.0 * kPi * std::cos(2 * kPi * x) * std::sin(kPi * y);
        const double q = 0.5 * std::sin(kPi * x) * std::sin(kPi * y);
        const double qx = 0.5 * kPi * std::cos(kPi * x) * std::sin(kPi * y);
        const double qy = 0.5 * kPi * std::sin(kPi * x) * std::cos(kPi * y);
        const double T = std::cos(3 * kPi * y);
        const double Ty = -3 * kPi * std::sin(3 * kPi * y);
        h2 += (th * th + q * q + T * T) * h * h;
        v2 += (th * th + thx * thx + thy * thy + qx * qx + qy * qy + Ty * Ty) * h * h;
      }
    CHECK(norm_H(u) == Catch::Approx(std::sqrt(h2)).epsilon(1e-10));
    CHECK(norm_V(u) == Catch::Approx(std::sqrt(v2)).epsilon(1e-10));
  }
}

TEST_CASE("step_transformed") {
  Grid g = make_grid(1.0, 32);
  PhysParams p;
  ForcingProfiles prof = default_profiles(g);
  const double dt = 1e-3;

  SECTION("with the explicit tendency zeroed a single q mode decays by the implicit factor") {
    StepperOptions opt;
    opt.zero_explicit = true;
    State v = make_state(g);
    v.q.amp(1, 1) = 1.0;
    OUState z{Field(g, kNeumann, Rep::Spectral), 0.0};
    State next = step_transformed(v, z, dt, p, prof, opt);
    const double lam = 2.0 * kPi * kPi;
    CHECK(next.q.amp(1, 1) == Catch::Approx(1.0 / (1.0 + dt * (p.nu * lam + p.r))).epsilon(1e-14));
  }

  SECTION("one step matches an RK4 reference at O(dt^2)") {
    State v = random_state(g, 17, 3, 0.5);
    OUState z{Field(g, kNeumann, Rep::Spectral), 0.0};
    auto err = [&](double h) {
      State imex = step_transformed(v, z, h, p, prof);
      State ref = rk4_step(v, h, p, prof);
      return h_distance(imex, ref);
    };
    // dt small enough that the explicit reference is in its asymptotic
    // regime for every populated mode
    const double e1 = err(1e-5), e2 = err(5e-6);
    CHECK(e1 / e2 > 3.2);
    CHECK(e1 / e2 < 4.8);
  }

  SECTION("self convergence is first order") {
    CovarianceSpec cov = quiet_noise();
    State v0 = random_state(g, 23, 6);
    auto run = [&](double h) {
      NoisePath path = sample_path(cov, g, 0.0, 0.5, h, 1);
      return evolve(v0, path, 0.0, 0.24, EvolveMode::Direct, p, prof).final_state;
    };
    State a = run(4e-3), b = run(2e-3), c = run(1e-3);
    const double d1 = h_distance(a, b), d2 = h_distance(b, c);
    CHECK(d1 / d2 > 1.6);
    CHECK(d1 / d2 < 2.6);
  }
}

TEST_CASE("step_direct") {
  Grid g = make_grid(1.0, 32);
  PhysParams p;
  ForcingProfiles prof = default_profiles(g);
  const double dt = 1e-3;

  SECTION("zero increment reproduces the transformed step bitwise") {
    State u = random_state(g, 3, 6);
    OUState z{Field(g, kNeumann, Rep::Spectral), 0.0};
    State a = step_direct(u, std::vector<double>(9, 0.0), dt, p, prof);
    State b = step_transformed(u, z, dt, p, prof);
    CHECK(a.theta.values() == b.theta.values());
    CHECK(a.q.values() == b.q.values());
    CHECK(a.T.values() == b.T.values());
  }

  SECTION("noise-only response: the increment lands after the solve") {
    StepperOptions opt;
    opt.zero_explicit = true;
    std::vector<double> dw(9, 0.0);
    dw[4] = 0.25;  // mode (1,1)
    State u = make_state(g);
    State next = step_direct(u, dw, dt, p, prof, opt);
    CHECK(next.theta.amp(1, 1) == Catch::Approx(0.25).epsilon(1e-15));
  }

  SECTION("transform equivalence gap shrinks with dt") {
    CovarianceSpec cov;
    cov.sigma2 = 1e-3;
    cov.cutoff = 4;
    auto gap = [&](double h) {
      NoisePath path = sample_path(cov, g, -10.0, 1.0, h, 99);
      StationaryOu ou(path, prof.b);
      ou.advance_to(0);
      State v0 = random_state(g, 7, 5);
      State u0 = add_z(v0, ou.z_amps());
      auto direct = evolve(u0, path, 0.0, 1.0, EvolveMode::Direct, p, prof);
      EvolveOptions topt;
      topt.with_z = true;
      auto transf = evolve(v0, path, 0.0, 1.0, EvolveMode::Transformed, p, prof, topt);
      return h_distance(direct.final_state, add_z(transf.final_state, transf.z_final));
    };
    const double g4 = gap(4e-3), g2 = gap(2e-3), g1 = gap(1e-3);
    CHECK(g4 > g2);
    CHECK(g2 > g1);
    CHECK(g1 > 0.0);
    CHECK(g4 < 1e-2);
  }
}

TEST_CASE("evolve") {
  Grid g = make_grid(1.0, 32);
  PhysParams p;
  ForcingProfiles prof = default_profiles(g);
  CovarianceSpec cov;
  cov.sigma2 = 1e-3;
  cov.cutoff = 4;

  SECTION("t1 = t0 returns the initial state") {
    NoisePath path = sample_path(cov, g, 0.0, 1.0, 1e-3, 5);
    State x = random_state(g, 1);
    auto res = evolve(x, path, 0.5, 0.5, EvolveMode::Direct, p, prof);
    CHECK(res.final_state.theta.values() == as_spectral(x.theta).values());
    CHECK(res.final_state.q.values() == as_spectral(x.q).values());
  }

  SECTION("restart composition is bit identical over one path") {
    NoisePath path = sample_path(cov, g, 0.0, 1.0, 1e-3, 6);
    State x = random_state(g, 2);
    auto whole = evolve(x, path, 0.0, 0.5, EvolveMode::Direct, p, prof);
    auto first = evolve(x, path, 0.0, 0.2, EvolveMode::Direct, p, prof);
    auto second = evolve(first.final_state, path, 0.2, 0.5, EvolveMode::Direct, p, prof);
    CHECK(whole.final_state.theta.values() == second.final_state.theta.values());
    CHECK(whole.final_state.q.values() == second.final_state.q.values());
    CHECK(whole.final_state.T.values() == second.final_state.T.values());
  }

  SECTION("discrete cocycle property is bitwise") {
    NoisePath path = sample_path(cov, g, 0.0, 2.0, 1e-3, 7);
    State x = random_state(g, 3);
    const double tau = 0.25, t = 0.5;
    auto lhs = evolve(x, path, 0.0, t + tau, EvolveMode::Direct, p, prof);
    auto inner_run = evolve(x, path, 0.0, tau, EvolveMode::Direct, p, prof);
    auto outer = evolve(inner_run.final_state, wiener_shift(path, tau), 0.0, t, EvolveMode::Direct, p, prof);
    CHECK(lhs.final_state.theta.values() == outer.final_state.theta.values());
    CHECK(lhs.final_state.q.values() == outer.final_state.q.values());
    CHECK(lhs.final_state.T.values() == outer.final_state.T.values());
  }

  SECTION("unforced run: Lyapunov functional is monotone, T stays zero mean") {
    PhysParams p0 = zero_data_params();
    ForcingProfiles prof0 = zero_data_profiles(g);
    CovarianceSpec c0 = quiet_noise();
    NoisePath path = sample_path(c0, g, -10.0, 2.0, 1e-3, 8);
    State x = random_state(g, 4, 6);
    const double alpha = dissipation_alpha(p0);
    const double lam0 = poincare_lambda0(g, PoincareBc::NeumannZeroMean);

    std::vector<double> lyap;
    EvolveOptions opt;
    opt.stride = 100;
    opt.sink = [&](double, const State& s, const std::vector<double>*) {
      lyap.push_back(lyapunov(s, alpha, lam0, p0));
      REQUIRE(std::abs(integral(s.T)) <= 1e-10 * std::max(1e-30, norm_l2(s.T)));
    };
    evolve(x, path, 0.0, 2.0, EvolveMode::Transformed, p0, prof0, opt);
    REQUIRE(lyap.size() > 10);
    for (std::size_t i = 1; i < lyap.size(); ++i) REQUIRE(lyap[i] <= lyap[i - 1] * (1.0 + 1e-12));
  }

  SECTION("dissipation inequality for q along a zero-data trajectory") {
    PhysParams p0 = zero_data_params();
    ForcingProfiles prof0 = zero_data_profiles(g);
    REQUIRE(check_condition(p0).holds);
    CovarianceSpec c0 = quiet_noise();
    NoisePath path = sample_path(c0, g, -10.0, 1.0, 1e-3, 9);
    State x = random_state(g, 10, 6);

    std::vector<double> q2, gT2;
    EvolveOptions opt;
    opt.stride = 1;
    opt.sink = [&](double, const State& s, const std::vector<double>*) {
      const double qn = norm_l2(s.q);
      q2.push_back(qn * qn);
      gT2.push_back(grad_sq_norm(s.T));
    };
    evolve(x, path, 0.0, 0.5, EvolveMode::Transformed, p0, prof0, opt);
    const double alpha = dissipation_alpha(p0);
    REQUIRE(alpha > 0.0);
    const double dt = 1e-3;
    for (std::size_t i = 0; i + 1 < q2.size(); ++i) {
      const double lhs = (q2[i + 1] - q2[i]) / dt;
      const double rhs = -2.0 * alpha * q2[i] + p0.Pr * p0.Pr * p0.Ra * p0.Ra / alpha * gT2[i];
      REQUIRE(lhs <= rhs + 0.05 * std::abs(rhs) + 1e-12);
    }
  }

  SECTION("window coverage is enforced") {
    NoisePath path = sample_path(cov, g, 0.0, 1.0, 1e-3, 5);
    State x = random_state(g, 1);
    CHECK_THROWS_WITH(evolve(x, path, 0.0, 2.0, EvolveMode::Direct, p, prof),
                      Catch::Matchers::ContainsSubstring("does not cover"));
  }

  SECTION("CFL guard aborts on oversized explicit tendencies") {
    NoisePath path = sample_path(cov, g, 0.0, 1.0, 1e-3, 5);
    State x = scaled_to_h_norm_sq(random_state(g, 11, 8), 1e12);
    CHECK_THROWS_WITH(evolve(x, path, 0.0, 0.1, EvolveMode::Direct, p, prof),
                      Catch::Matchers::ContainsSubstring("step too large"));
  }
}
