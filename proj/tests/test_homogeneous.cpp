#include "helpers.hpp"

#include "hpanel/dgp.hpp"
#include "hpanel/error.hpp"
#include "hpanel/homogeneous.hpp"
#include "hpanel/montecarlo.hpp"
#include "hpanel/numerics.hpp"

#include <doctest.h>

#include <algorithm>

using namespace hpanel;
using namespace testing_support;

namespace {

// Dense normal equations: stack every unit into one long system.
Vector dense_beta(const PanelDataset& d, const std::vector<Matrix>& F) {
  Matrix A = Matrix::Zero(d.dx, d.dx);
  Vector b = Vector::Zero(d.dx);
  for (int i = 0; i < d.L(); ++i) {
    const Matrix M = dense_annihilator(F[static_cast<std::size_t>(i)]);
    for (int j = 0; j < d.N(i); ++j) {
      A += d.unit(i, j).X.transpose() * M * d.unit(i, j).X;
      b += d.unit(i, j).X.transpose() * M * d.unit(i, j).y;
    }
  }
  return A.fullPivLu().solve(b);
}

// Industries of 16 to 24 units, so every overfitting rank below stays under N_i.
DgpSpec noiseless_spec(int L, int T, std::uint64_t seed) {
  DgpSpec spec;
  spec.L = L;
  spec.T = T;
  spec.error_scale = 0.0;
  spec.seed = seed;
  spec.size_exponent_low = 2.0;
  spec.size_exponent_high = 2.3;
  return spec;
}

ModelConfig small_dmax() {
  ModelConfig config;
  config.d_max = 10;
  return config;
}

}  // namespace

TEST_CASE("slope update without factors on exact data is the true slope") {
  std::mt19937_64 rng(1);
  const Vector beta = Vector::LinSpaced(2, 1.0, -0.5);
  const auto d = factor_panel({3, 2}, 6, beta, {Matrix(6, 0), Matrix(6, 0)}, rng);
  const std::vector<Matrix> none{Matrix(6, 0), Matrix(6, 0)};
  CHECK((beta_given_factors(d, none) - beta).norm() < 1e-12);
}

TEST_CASE("slope update with the true factors annihilates the factor component") {
  std::mt19937_64 rng(2);
  const Vector beta = Vector::LinSpaced(2, 1.0, 2.0);
  const std::vector<Matrix> F{random_scaled_orthonormal(10, 2, rng), random_scaled_orthonormal(10, 1, rng)};
  const auto d = factor_panel({4, 5}, 10, beta, F, rng);
  CHECK((beta_given_factors(d, F) - beta).norm() < 1e-10);
}

TEST_CASE("slope update matches dense normal equations on random tiny instances") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    std::uniform_int_distribution<int> Ld(1, 3), Nd(1, 4), Td(3, 6), dd(1, 2);
    const int L = Ld(rng), T = Td(rng), dx = dd(rng);
    std::vector<int> sizes;
    for (int i = 0; i < L; ++i) sizes.push_back(Nd(rng));
    const auto d = random_panel(sizes, T, dx, rng);
    std::vector<Matrix> F;
    for (int i = 0; i < L; ++i) F.push_back(random_scaled_orthonormal(T, std::uniform_int_distribution<int>(0, 1)(rng), rng));
    const Vector oracle = dense_beta(d, F);
    Vector fast;
    try {
      fast = beta_given_factors(d, F);
    } catch (const NumericError&) {
      continue;  // an ill-posed draw, e.g. T - r < d_x with one unit
    }
    CHECK((fast - oracle).norm() <= 1e-10 * std::max(1.0, oracle.norm()));
  }
}

TEST_CASE("a regressor inside every factor span makes the slope update singular") {
  std::mt19937_64 rng(4);
  const Matrix F = random_scaled_orthonormal(5, 1, rng);
  PanelDataset d;
  d.T = 5;
  d.dx = 1;
  d.units = {{UnitSeries{gaussian(5, 1, rng).col(0), F}, UnitSeries{gaussian(5, 1, rng).col(0), 2.0 * F}}};
  const std::vector<Matrix> factors{F};
  CHECK_THROWS_AS((void)beta_given_factors(d, factors), NumericError);
}

TEST_CASE("slope update is invariant to rotating the factors") {
  std::mt19937_64 rng(5);
  const auto d = random_panel({3, 4}, 8, 2, rng);
  const std::vector<Matrix> F{random_scaled_orthonormal(8, 2, rng), random_scaled_orthonormal(8, 3, rng)};
  const std::vector<Matrix> R{F[0] * random_orthogonal(2, rng), F[1] * random_orthogonal(3, rng)};
  CHECK((beta_given_factors(d, F) - beta_given_factors(d, R)).norm() < 1e-10);
}

TEST_CASE("factor update") {
  std::mt19937_64 rng(6);
  SUBCASE("rank zero gives empty factors") {
    const auto d = random_panel({2}, 5, 1, rng);
    const std::vector<int> ranks{0};
    const auto up = factors_given_beta(d, Vector::Zero(1), ranks);
    CHECK(up.factors[0].cols() == 0);
    CHECK(up.eigenvalues[0].size() == 0);
  }
  SUBCASE("exact single factor span is recovered") {
    const Vector beta = Vector::Ones(1);
    const std::vector<Matrix> F{random_scaled_orthonormal(9, 1, rng)};
    const auto d = factor_panel({6}, 9, beta, F, rng);
    const std::vector<int> ranks{1};
    const auto up = factors_given_beta(d, beta, ranks);
    CHECK(projector_distance(up.factors[0], F[0]) < 1e-8);
    CHECK(is_scaled_orthonormal(up.factors[0], 1e-10));
  }
  SUBCASE("eigenvalues match the dense covariance") {
    const auto d = random_panel({3}, 4, 1, rng);
    const Vector beta = Vector::Constant(1, 0.3);
    Matrix sigma = Matrix::Zero(4, 4);
    for (int j = 0; j < 3; ++j) {
      const Vector e = d.unit(0, j).y - d.unit(0, j).X * beta;
      sigma += e * e.transpose();
    }
    sigma /= 12.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    const std::vector<int> ranks{3};
    const auto up = factors_given_beta(d, beta, ranks);
    for (int k = 0; k < 3; ++k) CHECK(up.eigenvalues[0](k) == doctest::Approx(es.eigenvalues()(3 - k)).epsilon(1e-10));
  }
  SUBCASE("rank above T is an error") {
    const auto d = random_panel({2}, 3, 1, rng);
    const std::vector<int> ranks{4};
    CHECK_THROWS_AS((void)factors_given_beta(d, Vector::Zero(1), ranks), NumericError);
  }
}

TEST_CASE("rank caps") {
  CHECK(initial_rank(30, 20, 20) == 19);
  CHECK(initial_rank(12, 20, 20) == 12);
  CHECK(initial_rank(50, 100, 20) == 20);
  std::mt19937_64 rng(7);
  const auto d = random_panel({2, 9}, 6, 1, rng);
  const std::vector<int> ranks{5, 5};
  CHECK(capped_ranks(d, ranks, 4) == std::vector<int>{2, 4});
}

TEST_CASE("noise-free data without factors converges immediately") {
  std::mt19937_64 rng(8);
  const Vector beta = Vector::LinSpaced(2, 1.0, 1.0);
  const auto d = factor_panel({3, 3}, 8, beta, {Matrix(8, 0), Matrix(8, 0)}, rng);
  const std::vector<int> ranks{0, 0};
  const auto fit = fit_alternating(d, ranks, ModelConfig{});
  CHECK(fit.converged);
  CHECK(fit.iterations <= 2);
  CHECK((fit.beta - beta).norm() < 1e-12);
}

TEST_CASE("alternating fit: monotone objective and minimality against random candidates") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    const auto d = random_panel({3, 4}, 6, 2, rng);
    const std::vector<int> ranks{2, 1};
    const auto fit = fit_alternating(d, ranks, ModelConfig{});
    CHECK(fit.max_objective_increase() <= 1e-10);
    for (const auto& F : fit.factors) CHECK(is_scaled_orthonormal(F, 1e-8));
    const double q_hat = objective_q(d, fit.beta, fit.factors);
    for (int k = 0; k < 100; ++k) {
      const std::vector<Matrix> rand{random_scaled_orthonormal(6, 2, rng), random_scaled_orthonormal(6, 1, rng)};
      CHECK(q_hat <= objective_q(d, fit.beta, rand) + 1e-12);
    }
  }
}

TEST_CASE("initial slope is honoured") {
  std::mt19937_64 rng(10);
  const auto d = random_panel({3}, 6, 1, rng);
  const std::vector<int> ranks{1};
  ModelConfig one_step;
  one_step.max_iter = 1;
  const Vector start = Vector::Constant(1, 5.0);
  const auto fit = fit_alternating(d, ranks, one_step, start);
  const auto up = factors_given_beta(d, start, ranks);
  CHECK((fit.beta - beta_given_factors(d, up.factors)).norm() < 1e-14);
  CHECK_THROWS_AS((void)fit_alternating(d, ranks, one_step, Vector::Zero(2)), ValidationError);
}

TEST_CASE("noiseless design with true ranks is recovered exactly") {
  const auto sim = generate(noiseless_spec(4, 30, 11));
  std::vector<int> ranks;
  for (int c : sim.truth.specific_counts) ranks.push_back(sim.truth.global_count + c);
  const auto fit = fit_alternating(sim.data, ranks, ModelConfig{});
  for (std::size_t i = 0; i < ranks.size(); ++i)
  {
    Matrix joint(sim.data.T, ranks[i]);
    joint << sim.truth.factors.global, sim.truth.factors.specific[i];
    CHECK(projector_distance(fit.factors[i], joint) < 1e-6);
  }
  CHECK((fit.beta - sim.truth.beta0).cwiseAbs().maxCoeff() < 1e-8);
  const double scale = sim.data.total_units() * sim.data.T;
  CHECK(objective_q(sim.data, fit.beta, fit.factors) < 1e-10 * scale);
}

TEST_CASE("full pipeline on zero-factor data selects no factors") {
  DgpSpec spec = noiseless_spec(3, 15, 12);
  spec.loading_scale = 0.0;
  const auto sim = generate(spec);
  const auto fit = fit_full(sim.data, ModelConfig{});
  CHECK(fit.selection.global_count == 0);
  for (int c : fit.selection.specific_counts) CHECK(c == 0);
  CHECK((fit.beta - sim.truth.beta0).norm() < 1e-8);
  CHECK_FALSE(fit.shares.has_value());
}

TEST_CASE("full pipeline on zero-factor noisy data matches pooled OLS") {
  DgpSpec spec;
  spec.L = 3;
  spec.T = 15;
  spec.seed = 13;
  spec.loading_scale = 0.0;
  spec.error_scale = 0.05;
  const auto sim = generate(spec);
  const auto fit = fit_full(sim.data, ModelConfig{});
  CHECK(fit.selection.global_count == 0);
  for (int c : fit.selection.specific_counts) CHECK(c == 0);
  const std::vector<Matrix> none(3, Matrix(15, 0));
  CHECK((fit.beta - beta_given_factors(sim.data, none)).norm() < 1e-12);
}

TEST_CASE("noiseless data: the overfitting stage returns the true slope") {
  const auto sim = generate(noiseless_spec(4, 30, 14));
  const auto fit = fit_full(sim.data, small_dmax());
  CHECK((fit.initial.beta - sim.truth.beta0).cwiseAbs().maxCoeff() < 1e-8);
  const double scale = sim.data.total_units() * sim.data.T;
  CHECK(objective_q(sim.data, fit.initial.beta, fit.initial.factors) < 1e-10 * scale);
  for (const auto& F : fit.joint_factors) CHECK(is_scaled_orthonormal(F, 1e-8));
  CHECK(max_increase(fit.objective_trace) <= 1e-10);
}

TEST_CASE("full pipeline recovers a purely global noiseless structure") {
  DgpSpec spec = noiseless_spec(4, 30, 14);
  spec.specific_choices = {0};
  const auto sim = generate(spec);
  const auto fit = fit_full(sim.data, small_dmax());
  CHECK(fit.selection.global_count == sim.truth.global_count);
  CHECK(fit.selection.specific_counts == sim.truth.specific_counts);
  CHECK((fit.beta - sim.truth.beta0).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(projector_distance(fit.factors.global, sim.truth.factors.global) < 1e-6);
  for (const auto& F : fit.joint_factors) CHECK(is_scaled_orthonormal(F, 1e-8));
  CHECK(max_increase(fit.objective_trace) <= 1e-10);
}

TEST_CASE("refitting the fitted components returns the same counts") {
  DgpSpec spec;
  spec.L = 4;
  spec.T = 30;
  spec.seed = 15;
  spec.size_exponent_low = 2.0;
  spec.size_exponent_high = 2.3;
  const auto sim = generate(spec);
  const auto fit = fit_full(sim.data, small_dmax());

  PanelDataset rebuilt = sim.data;
  for (int i = 0; i < rebuilt.L(); ++i)
    for (int j = 0; j < rebuilt.N(i); ++j) {
      auto& u = rebuilt.units[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      u.y = u.X * fit.beta + fit.factors.common_component(i, j);
    }
  const auto again = fit_full(rebuilt, small_dmax());
  CHECK(again.selection.global_count == fit.selection.global_count);
  CHECK(again.selection.specific_counts == fit.selection.specific_counts);
}

TEST_CASE("projector recovery improves with the sample size") {
  auto mean_distance = [](int L, int T) {
    double acc = 0.0;
    for (std::uint64_t seed = 1; seed <= 2; ++seed) {
      DgpSpec spec;
      spec.L = L;
      spec.T = T;
      spec.seed = seed;
      const auto sim = generate(spec);
      std::vector<int> ranks;
      for (int c : sim.truth.specific_counts) ranks.push_back(sim.truth.global_count + c);
      const auto fit = fit_alternating(sim.data, ranks, ModelConfig{});
      double d = 0.0;
      for (int i = 0; i < L; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        Matrix truth(T, sim.truth.global_count + sim.truth.specific_counts[ii]);
        truth << sim.truth.factors.global, sim.truth.factors.specific[ii];
        d += projector_distance(fit.factors[ii], truth);
      }
      acc += d / L;
    }
    return acc / 2.0;
  };
  CHECK(mean_distance(80, 80) < mean_distance(20, 20));
}
