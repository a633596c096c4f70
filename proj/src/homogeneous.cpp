#include "hpanel/homogeneous.hpp"

#include "hpanel/error.hpp"
#include "hpanel/numerics.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace hpanel {

double max_increase(std::span<const double> trace) {
  if (trace.size() < 2) return 0.0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < trace.size(); ++k) worst = std::max(worst, trace[k] - trace[k - 1]);
  return worst;
}

double AlternatingFit::max_objective_increase() const { return max_increase(objective_trace); }

Vector beta_given_factors(const PanelDataset& data, std::span<const Matrix> factors) {
  if (static_cast<int>(factors.size()) != data.L())
    throw ValidationError("expected one factor matrix per industry");
  Matrix A = Matrix::Zero(data.dx, data.dx);
  Vector b = Vector::Zero(data.dx);
  for (int i = 0; i < data.L(); ++i) {
    const Matrix& F = factors[static_cast<std::size_t>(i)];
    if (F.cols() == 0) {
      for (const auto& u : data.units[static_cast<std::size_t>(i)]) {
        A.noalias() += u.X.transpose() * u.X;
        b.noalias() += u.X.transpose() * u.y;
      }
      continue;
    }
    if (F.rows() != data.T) throw ValidationError("factor matrix must have T rows");
    const Eigen::LLT<Matrix> gram(F.transpose() * F);
    if (gram.info() != Eigen::Success) throw NumericError("rank-deficient factor matrix for industry " + std::to_string(i));
    for (const auto& u : data.units[static_cast<std::size_t>(i)]) {
      const Matrix MX = u.X - F * gram.solve(F.transpose() * u.X);
      A.noalias() += MX.transpose() * u.X;
      b.noalias() += MX.transpose() * u.y;
    }
  }
  try {
    return solve_spd(A, b);
  } catch (const NumericError& e) {
    throw NumericError(std::string("slope update: ") + e.what());
  }
}

FactorUpdate factors_given_beta(const PanelDataset& data, const Vector& beta, std::span<const int> ranks) {
  if (static_cast<int>(ranks.size()) != data.L()) throw ValidationError("expected one rank per industry");
  FactorUpdate out;
  out.factors.reserve(ranks.size());
  out.eigenvalues.reserve(ranks.size());
  const double sqrt_t = std::sqrt(static_cast<double>(data.T));
  for (int i = 0; i < data.L(); ++i) {
    const int r = ranks[static_cast<std::size_t>(i)];
    if (r < 0 || r > data.T)
      throw NumericError("rank " + std::to_string(r) + " for industry " + std::to_string(i) + " exceeds T");
    if (r == 0) {
      out.factors.emplace_back(data.T, 0);
      out.eigenvalues.emplace_back(0);
      continue;
    }
    const Matrix E = residual_block(data, i, beta);
    Matrix sigma = Matrix::Zero(data.T, data.T);
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(E);
    sigma = sigma.selfadjointView<Eigen::Lower>();
    sigma /= static_cast<double>(data.N(i)) * data.T;
    auto pairs = sym_eig_top(sigma, r);
    out.factors.push_back(sqrt_t * pairs.vectors);
    out.eigenvalues.push_back(std::move(pairs.values));
  }
  return out;
}

std::vector<int> capped_ranks(const PanelDataset& data, std::span<const int> ranks, int d_max) {
  if (static_cast<int>(ranks.size()) != data.L()) throw ValidationError("expected one rank per industry");
  std::vector<int> out;
  out.reserve(ranks.size());
  for (int i = 0; i < data.L(); ++i) {
    const int r = ranks[static_cast<std::size_t>(i)];
    if (r < 0) throw ValidationError("negative factor rank");
    out.push_back(std::min({r, data.N(i), data.T, d_max}));
  }
  return out;
}

std::optional<VarianceShares> shares_if_defined(const PanelDataset& data, std::span<const Vector> betas,
                                               const FactorStructure& factors) {
  constexpr double rel = 1e-12;
  double residual_energy = 0.0;
  double outcome_energy = 0.0;
  const auto e = residuals(data, betas);
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = 0; j < e[i].size(); ++j) {
      residual_energy += e[i][j].squaredNorm();
      outcome_energy += data.units[i][j].y.squaredNorm();
    }
  if (residual_energy <= rel * rel * outcome_energy) return std::nullopt;
  return variance_shares(data, betas, factors.global, factors.specific);
}

int initial_rank(int units, int T, int d_max) { return std::max(0, std::min({d_max, units, T - 1})); }

AlternatingFit fit_alternating(const PanelDataset& data, std::span<const int> ranks, const ModelConfig& config,
                               const std::optional<Vector>& beta_init) {
  check_config(config);
  require_valid(data);

  AlternatingFit fit;
  fit.ranks = capped_ranks(data, ranks, config.d_max);
  if (beta_init) {
    if (beta_init->size() != data.dx) throw ValidationError("initial slope has wrong length");
    fit.beta = *beta_init;
  } else {
    const std::vector<Matrix> none(static_cast<std::size_t>(data.L()), Matrix(data.T, 0));
    fit.beta = beta_given_factors(data, none);
  }

  for (int iter = 1; iter <= config.max_iter; ++iter) {
    auto update = factors_given_beta(data, fit.beta, fit.ranks);
    Vector next = beta_given_factors(data, update.factors);
    fit.objective_trace.push_back(objective_q(data, next, update.factors));
    const double change = (next - fit.beta).cwiseAbs().maxCoeff();
    fit.beta = std::move(next);
    fit.factors = std::move(update.factors);
    fit.eigenvalues = std::move(update.eigenvalues);
    fit.iterations = iter;
    if (change < config.tol_beta) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

HomogeneousFit fit_full(const PanelDataset& data, const ModelConfig& config) {
  check_config(config);
  require_valid(data);
  const double omega = resolve_omega(config, data);

  std::vector<int> stage1_ranks;
  for (int i = 0; i < data.L(); ++i) stage1_ranks.push_back(initial_rank(data.N(i), data.T, config.d_max));
  HomogeneousFit out;
  out.initial = fit_alternating(data, stage1_ranks, config);

  const auto stage1_betas = replicate_beta(out.initial.beta, data.L());
  out.selection =
      select_and_extract(data, stage1_betas, selectable_dmax(config.d_max, data.T), omega).selection;

  std::vector<int> joint_ranks;
  for (int c : out.selection.specific_counts) joint_ranks.push_back(out.selection.global_count + c);
  auto final_fit = fit_alternating(data, joint_ranks, config, out.initial.beta);

  out.beta = final_fit.beta;
  out.joint_factors = std::move(final_fit.factors);
  out.objective_trace = std::move(final_fit.objective_trace);
  out.iterations = final_fit.iterations;
  out.converged = final_fit.converged;

  const auto betas = replicate_beta(out.beta, data.L());
  out.factors = extract_hierarchy(data, betas, out.selection.global_count, out.selection.specific_counts);
  out.shares = shares_if_defined(data, betas, out.factors);
  return out;
}

}  // namespace hpanel
