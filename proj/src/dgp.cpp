#include "hpanel/dgp.hpp"

#include "hpanel/error.hpp"

#include <cmath>
#include <string>

namespace hpanel {

namespace {

Vector standard_normals(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector z(n);
  for (int k = 0; k < n; ++k) z(k) = dist(rng);
  return z;
}

Matrix standard_normals(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix z(rows, cols);
  // Row-major draw order: one row is one period (factors) or one unit (loadings).
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) z(r, c) = dist(rng);
  return z;
}

// Rescales F to (1/T) F'F = I and rotates the loadings so F * gamma' is unchanged.
void normalize_factors(Matrix& F, std::vector<Matrix*> loadings) {
  if (F.cols() == 0) return;
  const double sqrt_t = std::sqrt(static_cast<double>(F.rows()));
  const Eigen::HouseholderQR<Matrix> qr(F);
  const Matrix Q = qr.householderQ() * Matrix::Identity(F.rows(), F.cols());
  const Matrix R = qr.matrixQR().topRows(F.cols()).triangularView<Eigen::Upper>();
  F = sqrt_t * Q;
  for (Matrix* g : loadings) *g = (*g) * R.transpose() / sqrt_t;
}

}  // namespace

void check_spec(const DgpSpec& spec) {
  if (spec.L < 1) throw ValidationError("DGP: L must be >= 1");
  if (spec.T < 2) throw ValidationError("DGP: T must be >= 2");
  if (spec.global_count < 0) throw ValidationError("DGP: global factor count must be >= 0");
  if (spec.specific_choices.empty()) throw ValidationError("DGP: specific count choices are empty");
  for (int c : spec.specific_choices)
    if (c < 0) throw ValidationError("DGP: specific counts must be >= 0");
  if (spec.beta0.size() < 1) throw ValidationError("DGP: beta0 must have at least one entry");
  if (!(std::abs(spec.rho_v) < 1.0) || !(std::abs(spec.rho_e) < 1.0))
    throw ValidationError("DGP: AR coefficients must satisfy |rho| < 1");
  if (!(spec.decay_v > 0.0 && spec.decay_v < 1.0) || !(spec.decay_e > 0.0 && spec.decay_e < 1.0))
    throw ValidationError("DGP: covariance decay bases must lie in (0,1)");
  if (spec.size_exponent_low > spec.size_exponent_high) throw ValidationError("DGP: size exponents out of order");
  if (spec.burn_in < 0) throw ValidationError("DGP: burn-in must be >= 0");
}

std::pair<int, int> size_bounds(const DgpSpec& spec) {
  const double L = spec.L;
  // Guard against pow rounding just below an exact integer.
  const int lo = static_cast<int>(std::floor(std::pow(L, spec.size_exponent_low) + 1e-9));
  const int hi = static_cast<int>(std::floor(std::pow(L, spec.size_exponent_high) + 1e-9));
  return {std::max(1, lo), std::max(1, hi)};
}

std::vector<int> draw_sizes(const DgpSpec& spec, std::mt19937_64& rng) {
  if (spec.L < 1) throw ValidationError("DGP: L must be >= 1");
  const auto [lo, hi] = size_bounds(spec);
  std::uniform_int_distribution<int> dist(lo, hi);
  std::vector<int> out(static_cast<std::size_t>(spec.L));
  for (auto& n : out) n = dist(rng);
  return out;
}

std::vector<int> draw_sizes(const DgpSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  return draw_sizes(spec, rng);
}

Matrix decay_covariance(int n, double a) {
  Matrix S(n, n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) S(m, k) = std::pow(a, std::abs(m - k));
  return S;
}

Vector correlate_decay(const Vector& z, double a) {
  Vector eta(z.size());
  if (z.size() == 0) return eta;
  const double scale = std::sqrt(1.0 - a * a);
  eta(0) = z(0);
  for (Eigen::Index m = 1; m < z.size(); ++m) eta(m) = a * eta(m - 1) + scale * z(m);
  return eta;
}

SimulatedPanel generate(const DgpSpec& spec) {
  check_spec(spec);
  std::mt19937_64 rng(spec.seed);

  const int L = spec.L;
  const int T = spec.T;
  const int dx = static_cast<int>(spec.beta0.size());
  const auto sizes = draw_sizes(spec, rng);
  int total = 0;
  for (int n : sizes) total += n;
  if (total > spec.max_units)
    throw ValidationError("DGP: " + std::to_string(total) + " units exceed the configured cap of " +
                          std::to_string(spec.max_units));

  std::uniform_int_distribution<std::size_t> pick(0, spec.specific_choices.size() - 1);
  std::vector<int> specific_counts(static_cast<std::size_t>(L));
  for (auto& c : specific_counts) c = spec.specific_choices[pick(rng)];

  // Factors: rows are periods.
  Matrix FG = standard_normals(T, spec.global_count, rng).array() + spec.global_factor_mean;
  std::vector<Matrix> FS;
  for (int i = 0; i < L; ++i) FS.push_back(standard_normals(T, specific_counts[static_cast<std::size_t>(i)], rng));

  // Loadings: rows are countries.
  std::vector<Matrix> GG;
  std::vector<Matrix> GS;
  for (int i = 0; i < L; ++i) {
    const int n = sizes[static_cast<std::size_t>(i)];
    GG.push_back(spec.loading_scale * standard_normals(n, spec.global_count, rng));
    Matrix gs = standard_normals(n, specific_counts[static_cast<std::size_t>(i)], rng).array() +
                spec.specific_loading_mean;
    GS.push_back(spec.loading_scale * gs);
  }

  // Stacked AR(1) processes over the industry-major unit ordering, with a burn-in
  // started from the stationary distribution.
  std::vector<Matrix> V(static_cast<std::size_t>(dx), Matrix(total, T));
  Matrix Eps(total, T);
  std::vector<Vector> v_state(static_cast<std::size_t>(dx));
  for (int k = 0; k < dx; ++k)
    v_state[static_cast<std::size_t>(k)] =
        correlate_decay(standard_normals(total, rng), spec.decay_v) / std::sqrt(1.0 - spec.rho_v * spec.rho_v);
  Vector e_state = correlate_decay(standard_normals(total, rng), spec.decay_e) / std::sqrt(1.0 - spec.rho_e * spec.rho_e);
  for (int t = -spec.burn_in; t < T; ++t) {
    for (int k = 0; k < dx; ++k) {
      auto& s = v_state[static_cast<std::size_t>(k)];
      s = spec.rho_v * s + correlate_decay(standard_normals(total, rng), spec.decay_v);
    }
    e_state = spec.rho_e * e_state + correlate_decay(standard_normals(total, rng), spec.decay_e);
    if (t >= 0) {
      for (int k = 0; k < dx; ++k) V[static_cast<std::size_t>(k)].col(t) = v_state[static_cast<std::size_t>(k)];
      Eps.col(t) = e_state;
    }
  }

  SimulatedPanel out;
  auto& data = out.data;
  data.T = T;
  data.dx = dx;
  data.units.resize(static_cast<std::size_t>(L));
  int row = 0;
  for (int i = 0; i < L; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    for (int j = 0; j < sizes[ii]; ++j, ++row) {
      const Vector global_part = spec.global_count > 0 ? Vector(FG * GG[ii].row(j).transpose()) : Vector::Zero(T);
      const Vector specific_part = specific_counts[ii] > 0 ? Vector(FS[ii] * GS[ii].row(j).transpose()) : Vector::Zero(T);
      UnitSeries u;
      u.X.resize(T, dx);
      for (int k = 0; k < dx; ++k)
        u.X.col(k) = spec.regressor_noise_scale * V[static_cast<std::size_t>(k)].row(row).transpose();
      u.X.col(0).array() += global_part.array().abs() + specific_part.array().abs();
      u.y = u.X * spec.beta0 + global_part + specific_part + spec.error_scale * Eps.row(row).transpose();
      data.units[ii].push_back(std::move(u));
    }
  }

  auto& truth = out.truth;
  truth.beta0 = spec.beta0;
  truth.global_count = spec.global_count;
  truth.specific_counts = specific_counts;
  std::vector<Matrix*> global_loadings;
  for (auto& g : GG) global_loadings.push_back(&g);
  normalize_factors(FG, global_loadings);
  for (int i = 0; i < L; ++i) normalize_factors(FS[static_cast<std::size_t>(i)], {&GS[static_cast<std::size_t>(i)]});
  truth.factors.global = std::move(FG);
  truth.factors.specific = std::move(FS);
  truth.factors.global_loadings = std::move(GG);
  truth.factors.specific_loadings = std::move(GS);
  return out;
}

}  // namespace hpanel
