#include "hpanel/factor_select.hpp"

#include "hpanel/error.hpp"
#include "hpanel/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hpanel {

namespace {

void check_betas(const PanelDataset& data, std::span<const Vector> betas) {
  if (static_cast<int>(betas.size()) != data.L())
    throw ValidationError("expected " + std::to_string(data.L()) + " slope vectors, got " +
                          std::to_string(betas.size()));
  for (const auto& b : betas)
    if (b.size() != data.dx) throw ValidationError("slope vector length does not match d_x");
}

void check_factor_rows(const Matrix& F, int T, const char* what) {
  if (F.cols() > 0 && F.rows() != T) throw ValidationError(std::string(what) + " must have T rows");
}

// M_F E for a factor block with (1/T) F'F = I.
Matrix annihilate(const Matrix& F, const Matrix& E) {
  if (F.cols() == 0) return E;
  return E - F * (F.transpose() * E) / static_cast<double>(F.rows());
}

// Squared norm of P_F E computed through (F'F)^{-1}.
double projected_energy(const Matrix& F, const Matrix& E) {
  if (F.cols() == 0) return 0.0;
  const Matrix FtE = F.transpose() * E;
  const Eigen::LLT<Matrix> llt(F.transpose() * F);
  if (llt.info() != Eigen::Success) throw NumericError("rank-deficient factor matrix in variance shares");
  return (FtE.array() * llt.solve(FtE).array()).sum();
}

}  // namespace

double default_omega(int total_units, int T) {
  const double n = static_cast<double>(std::max(total_units, T));
  return 1.0 / std::log(n);
}

double resolve_omega(const ModelConfig& config, const PanelDataset& data) {
  if (config.omega_override) return *config.omega_override;
  return default_omega(data.total_units(), data.T);
}

int selectable_dmax(int d_max, int T) { return std::max(0, std::min(d_max, T - 1)); }

double ratio_score(const Vector& eigenvalues, int l, double omega) {
  // lambda_0 is the mock eigenvalue 1; negative rounding noise is read as 0.
  auto lambda = [&](int k) { return k == 0 ? 1.0 : std::max(0.0, eigenvalues(k - 1)); };
  const double current = lambda(l);
  if (current < omega) return 1.0;
  return lambda(l + 1) / current;
}

int select_count(const Vector& eigenvalues, int d_max, double omega) {
  if (d_max < 0) throw ValidationError("d_max must be non-negative");
  if (d_max + 1 > eigenvalues.size())
    throw NumericError("d_max + 1 = " + std::to_string(d_max + 1) + " exceeds the " +
                       std::to_string(eigenvalues.size()) + " available eigenvalues");
  int best = 0;
  double best_score = ratio_score(eigenvalues, 0, omega);
  for (int l = 1; l <= d_max; ++l) {
    const double s = ratio_score(eigenvalues, l, omega);
    if (s < best_score) {
      best_score = s;
      best = l;
    }
  }
  return best;
}

Matrix sigma_global(const PanelDataset& data, std::span<const Vector> beta_per_industry) {
  check_betas(data, beta_per_industry);
  Matrix sigma = Matrix::Zero(data.T, data.T);
  for (int i = 0; i < data.L(); ++i) {
    const Matrix E = residual_block(data, i, beta_per_industry[static_cast<std::size_t>(i)]);
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(E);
  }
  sigma = sigma.selfadjointView<Eigen::Lower>();
  sigma /= static_cast<double>(data.total_units()) * data.T;
  return sigma;
}

CountChoice select_global(const Matrix& sigma_g, int d_max, double omega) {
  CountChoice out;
  out.eigenvalues = sym_eigenvalues(sigma_g);
  out.count = select_count(out.eigenvalues, d_max, omega);
  return out;
}

Matrix extract_global(const Matrix& sigma_g, int count) { return leading_factors(sigma_g, count); }

Matrix extract_specific(const Matrix& sigma_s, int count) { return leading_factors(sigma_s, count); }

std::vector<Matrix> sigma_specific(const PanelDataset& data, std::span<const Vector> beta_per_industry,
                                   const Matrix& global_factors) {
  check_betas(data, beta_per_industry);
  check_factor_rows(global_factors, data.T, "global factor matrix");
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(data.L()));
  for (int i = 0; i < data.L(); ++i) {
    const Matrix E = annihilate(global_factors, residual_block(data, i, beta_per_industry[static_cast<std::size_t>(i)]));
    Matrix sigma = Matrix::Zero(data.T, data.T);
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(E);
    sigma = sigma.selfadjointView<Eigen::Lower>();
    sigma /= static_cast<double>(data.N(i)) * data.T;
    out.push_back(std::move(sigma));
  }
  return out;
}

std::vector<CountChoice> select_specific(std::span<const Matrix> sigmas, int d_max, double omega) {
  std::vector<CountChoice> out;
  out.reserve(sigmas.size());
  for (const auto& s : sigmas) out.push_back(select_global(s, d_max, omega));
  return out;
}

Loadings extract_loadings(const PanelDataset& data, std::span<const Vector> beta_per_industry,
                          const Matrix& global_factors, std::span<const Matrix> specific_factors) {
  check_betas(data, beta_per_industry);
  check_factor_rows(global_factors, data.T, "global factor matrix");
  if (static_cast<int>(specific_factors.size()) != data.L())
    throw ValidationError("expected one specific factor matrix per industry");
  const double T = data.T;
  Loadings out;
  for (int i = 0; i < data.L(); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    check_factor_rows(specific_factors[ii], data.T, "specific factor matrix");
    const Matrix E = residual_block(data, i, beta_per_industry[ii]);
    out.global.push_back((global_factors.transpose() * E).transpose() / T);
    out.specific.push_back((specific_factors[ii].transpose() * annihilate(global_factors, E)).transpose() / T);
  }
  return out;
}

VarianceShares variance_shares(const PanelDataset& data, std::span<const Vector> beta_per_industry,
                               const Matrix& global_factors, std::span<const Matrix> specific_factors) {
  check_betas(data, beta_per_industry);
  check_factor_rows(global_factors, data.T, "global factor matrix");
  if (static_cast<int>(specific_factors.size()) != data.L())
    throw ValidationError("expected one specific factor matrix per industry");

  double total = 0.0;
  double global = 0.0;
  std::vector<double> specific(static_cast<std::size_t>(data.L()), 0.0);
  for (int i = 0; i < data.L(); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    check_factor_rows(specific_factors[ii], data.T, "specific factor matrix");
    const Matrix E = residual_block(data, i, beta_per_industry[ii]);
    total += E.squaredNorm();
    global += projected_energy(global_factors, E);
    specific[ii] = projected_energy(specific_factors[ii], annihilate(global_factors, E));
  }
  if (!(total > 0.0)) throw NumericError("variance shares undefined: residuals are identically zero");

  VarianceShares out;
  out.global_share = std::clamp(global / total, 0.0, 1.0);
  double used = out.global_share;
  for (double s : specific) {
    out.specific_share.push_back(std::clamp(s / total, 0.0, 1.0));
    used += out.specific_share.back();
  }
  out.remainder = std::clamp(1.0 - used, 0.0, 1.0);
  return out;
}

FactorStructure extract_hierarchy(const PanelDataset& data, std::span<const Vector> beta_per_industry,
                                  int global_count, std::span<const int> specific_counts) {
  if (static_cast<int>(specific_counts.size()) != data.L())
    throw ValidationError("expected one specific count per industry");
  FactorStructure out;
  out.global = extract_global(sigma_global(data, beta_per_industry), global_count);
  const auto sigmas = sigma_specific(data, beta_per_industry, out.global);
  for (int i = 0; i < data.L(); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    out.specific.push_back(extract_specific(sigmas[ii], specific_counts[ii]));
  }
  auto loadings = extract_loadings(data, beta_per_industry, out.global, out.specific);
  out.global_loadings = std::move(loadings.global);
  out.specific_loadings = std::move(loadings.specific);
  return out;
}

Decomposition select_and_extract(const PanelDataset& data, std::span<const Vector> beta_per_industry, int d_max,
                                 double omega) {
  Decomposition out;
  out.selection.omega = omega;

  const Matrix sigma_g = sigma_global(data, beta_per_industry);
  const auto global = select_global(sigma_g, d_max, omega);
  out.selection.global_count = global.count;
  out.selection.global_eigenvalues = global.eigenvalues;
  out.factors.global = extract_global(sigma_g, global.count);

  const auto sigmas = sigma_specific(data, beta_per_industry, out.factors.global);
  const auto specific = select_specific(sigmas, d_max, omega);
  for (int i = 0; i < data.L(); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    out.selection.specific_counts.push_back(specific[ii].count);
    out.selection.specific_eigenvalues.push_back(specific[ii].eigenvalues);
    out.factors.specific.push_back(extract_specific(sigmas[ii], specific[ii].count));
  }
  auto loadings = extract_loadings(data, beta_per_industry, out.factors.global, out.factors.specific);
  out.factors.global_loadings = std::move(loadings.global);
  out.factors.specific_loadings = std::move(loadings.specific);
  return out;
}

}  // namespace hpanel
