#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qgebm/grid.hpp"
#include "qgebm/operators.hpp"

namespace qgebm {

// scalar physical data of the coupled system; kappa = 1 is the original
// ocean-temperature diffusion, kappa = nu the modified system used for the
// fixed-point/ergodicity experiments
struct PhysParams {
  double a = 0.1;    // longwave radiative cooling
  double nu = 1.0;   // viscosity
  double r = 1.0;    // Ekman dissipation
  double beta = 1.0; // Coriolis gradient
  double Pr = 1.0;
  double Ra = 10.0;
  double l = 1.0;    // domain side
  double kappa = 1.0;
};

inline void validate_params(const PhysParams& p) {
  if (p.a < 0.0) throw std::invalid_argument("params: a must be nonnegative");
  if (p.nu <= 0.0) throw std::invalid_argument("params: nu must be positive");
  if (p.r <= 0.0) throw std::invalid_argument("params: r must be positive");
  if (p.beta < 0.0) throw std::invalid_argument("params: beta must be nonnegative");
  if (p.Pr <= 0.0) throw std::invalid_argument("params: Pr must be positive");
  if (p.Ra <= 0.0) throw std::invalid_argument("params: Ra must be positive");
  if (p.l <= 0.0) throw std::invalid_argument("params: l must be positive");
  if (p.kappa <= 0.0) throw std::invalid_argument("params: kappa must be positive");
}

struct ConditionCheck {
  bool holds = false;
  double margin = 0.0;  // 4 nu r - beta^2 l^2 / pi^2
};

// dissipativity condition 4 nu r > beta^2 l^2 / pi^2
inline ConditionCheck check_condition(const PhysParams& p) {
  const double margin = 4.0 * p.nu * p.r - p.beta * p.beta * p.l * p.l / (kPi * kPi);
  return {margin > 0.0, margin};
}

// concrete constant for d/dt ||q||^2 <= -2 alpha ||q||^2 + (Pr^2 Ra^2/alpha)||grad T||^2:
// Poincare on -nu||grad q||^2 gives nu lambda0^D ||q||^2, the beta term is
// bounded by (beta l / sqrt(2) pi)||q||^2, and the factor 1/2 leaves room for
// the Young split of the PrRa cross term
inline double dissipation_alpha(const PhysParams& p) {
  const double lambda0 = 2.0 * kPi * kPi / (p.l * p.l);
  return 0.5 * (p.r + p.nu * lambda0 - p.beta * p.l / (std::sqrt(2.0) * kPi));
}

// b(y), S_a, S_o on the grid; 0 < b < 1 checked node by node
struct ForcingProfiles {
  Field b;    // physical, Neumann tag
  Field S_a;  // physical
  Field S_o;  // physical
};

inline void validate_profiles(const ForcingProfiles& f) {
  const Grid& g = f.b.grid();
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double v = f.b(i, j);
      if (v <= 0.0 || v >= 1.0) {
        std::ostringstream msg;
        msg << "profiles: b(y) must satisfy 0 < b < 1; b = " << v << " at node (x = " << g.node(i)
            << ", y = " << g.node(j) << ")";
        throw std::invalid_argument(msg.str());
      }
    }
}

// analytic preset family used by the experiments
inline Field cos_profile(const Grid& g, double offset, double amplitude) {
  return Field::sample(g, kNeumann,
                       [&](double, double y) { return offset - amplitude * std::cos(kPi * y / g.l); });
}

inline ForcingProfiles default_profiles(const Grid& g, double b_offset = 0.5, double b_amplitude = 0.4,
                                        double s_a = 0.1, double s_o = 0.1) {
  ForcingProfiles f{cos_profile(g, b_offset, b_amplitude), cos_profile(g, 0.0, -s_a), cos_profile(g, 0.0, -s_o)};
  validate_profiles(f);
  return f;
}

}  // namespace qgebm
