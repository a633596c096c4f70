#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hpanel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One (industry, country) series: outcome y (length T) and regressors X (T x d_x).
struct UnitSeries {
  Vector y;
  Matrix X;
};

/**
 * Ragged three-index panel. Industry i holds N_i country series, every series
 * spans the same T periods. Labels are optional and never read by the numerics.
 */
struct PanelDataset {
  int T = 0;
  int dx = 0;
  std::vector<std::vector<UnitSeries>> units;  // [industry][country]

  std::vector<std::string> industry_labels;
  std::vector<std::vector<std::string>> country_labels;
  std::vector<std::string> regressor_names;
  std::vector<long long> periods;  // optional period labels, ascending

  [[nodiscard]] int L() const { return static_cast<int>(units.size()); }
  [[nodiscard]] int N(int i) const { return static_cast<int>(units[static_cast<std::size_t>(i)].size()); }
  [[nodiscard]] std::vector<int> sizes() const;
  /// Total unit count, the sum of all N_i.
  [[nodiscard]] int total_units() const;

  [[nodiscard]] const UnitSeries& unit(int i, int j) const {
    return units[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
};

/// Global factors, per-industry specific factors and their loadings.
struct FactorStructure {
  Matrix global;                          // T x l^G
  std::vector<Matrix> specific;           // [i] T x l_i^S
  std::vector<Matrix> global_loadings;    // [i] N_i x l^G
  std::vector<Matrix> specific_loadings;  // [i] N_i x l_i^S

  [[nodiscard]] int global_count() const { return static_cast<int>(global.cols()); }
  [[nodiscard]] std::vector<int> specific_counts() const;

  /// gamma_ij^G' f_t^G + gamma_ij^S' f_it^S over all t.
  [[nodiscard]] Vector common_component(int i, int j) const;
};

struct ModelConfig {
  int d_max = 20;
  double tol_beta = 1e-8;
  int max_iter = 1000;
  std::optional<double> omega_override;
  std::uint64_t seed = 0;
};

void check_config(const ModelConfig& config);

enum class ViolationKind { empty_panel, bad_period_count, bad_regressor_count, empty_industry, dimension_mismatch, non_finite };

struct Violation {
  ViolationKind kind;
  int industry = -1;
  int country = -1;
  int period = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  [[nodiscard]] bool ok() const { return violations.empty(); }
  [[nodiscard]] std::string to_string() const;
};

/// Lists every invariant violation of the dataset; an empty report means valid.
[[nodiscard]] ValidationReport validate(const PanelDataset& data);

/// Throws ValidationError carrying the full report when the dataset is invalid.
void require_valid(const PanelDataset& data);

using RaggedSeries = std::vector<std::vector<Vector>>;

/// L copies of a common slope, the homogeneous special case of per-industry slopes.
[[nodiscard]] std::vector<Vector> replicate_beta(const Vector& beta, int L);

/// e[i][j] = y_ij - X_ij beta_i.
[[nodiscard]] RaggedSeries residuals(const PanelDataset& data, std::span<const Vector> beta_per_industry);

/// Residual block of industry i as a T x N_i matrix (one column per country).
[[nodiscard]] Matrix residual_block(const PanelDataset& data, int industry, const Vector& beta);

/**
 * Concentrated least-squares objective
 *   Q = sum_ij (Y_ij - X_ij beta)' M_{F_i} (Y_ij - X_ij beta).
 * Every F_i needs T rows and (1/T) F_i'F_i = I within 1e-6; zero columns are allowed.
 */
[[nodiscard]] double objective_q(const PanelDataset& data, const Vector& beta, std::span<const Matrix> factors);

}  // namespace hpanel
