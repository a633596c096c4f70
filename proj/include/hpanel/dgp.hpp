#pragma once

#include "hpanel/panel.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace hpanel {

/**
 * Simulation design for the hierarchical factor panel. Defaults reproduce the
 * reference Monte Carlo design: two global factors, industry-specific counts
 * drawn from {0,...,4}, beta0 = (1,1), AR(1) regressor and error processes with
 * exponentially decaying cross-sectional correlation.
 */
struct DgpSpec {
  int L = 20;
  int T = 20;
  int global_count = 2;
  std::vector<int> specific_choices{0, 1, 2, 3, 4};
  Vector beta0 = Vector::Ones(2);

  double rho_v = 0.5;  // AR coefficient of the regressor innovations
  double rho_e = 0.3;  // AR coefficient of the errors
  double decay_v = 0.3;
  double decay_e = 0.2;
  double size_exponent_low = 0.85;
  double size_exponent_high = 1.15;

  double global_factor_mean = 0.5;
  double specific_loading_mean = 0.3;
  double regressor_noise_scale = 1.0;
  double error_scale = 1.0;
  double loading_scale = 1.0;  // 0 switches the factor structure off

  int burn_in = 50;
  int max_units = 20000;
  std::uint64_t seed = 1;
};

struct DgpTruth {
  FactorStructure factors;  // normalized so that (1/T) F'F = I; common components unchanged
  Vector beta0;
  int global_count = 0;
  std::vector<int> specific_counts;
};

struct SimulatedPanel {
  PanelDataset data;
  DgpTruth truth;
};

void check_spec(const DgpSpec& spec);

/// [floor(L^lo), floor(L^hi)] using the design's size exponents.
[[nodiscard]] std::pair<int, int> size_bounds(const DgpSpec& spec);

/// N_i drawn independently and uniformly on size_bounds(spec).
[[nodiscard]] std::vector<int> draw_sizes(const DgpSpec& spec, std::mt19937_64& rng);
[[nodiscard]] std::vector<int> draw_sizes(const DgpSpec& spec);

/// Dense {a^|m-n|} covariance of dimension n.
[[nodiscard]] Matrix decay_covariance(int n, double a);

/**
 * Maps i.i.d. standard normals z onto N(0, {a^|m-n|}) by the recursion
 * eta_1 = z_1, eta_m = a eta_{m-1} + sqrt(1-a^2) z_m, which equals multiplying
 * by the lower Cholesky factor of decay_covariance(n, a).
 */
[[nodiscard]] Vector correlate_decay(const Vector& z, double a);

[[nodiscard]] SimulatedPanel generate(const DgpSpec& spec);

}  // namespace hpanel
