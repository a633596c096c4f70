#include "hpanel/panel.hpp"

#include "hpanel/error.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace hpanel {

std::vector<int> PanelDataset::sizes() const {
  std::vector<int> out;
  out.reserve(units.size());
  for (const auto& industry : units) out.push_back(static_cast<int>(industry.size()));
  return out;
}

int PanelDataset::total_units() const {
  int total = 0;
  for (const auto& industry : units) total += static_cast<int>(industry.size());
  return total;
}

std::vector<int> FactorStructure::specific_counts() const {
  std::vector<int> out;
  out.reserve(specific.size());
  for (const auto& f : specific) out.push_back(static_cast<int>(f.cols()));
  return out;
}

Vector FactorStructure::common_component(int i, int j) const {
  const auto ii = static_cast<std::size_t>(i);
  Vector out = Vector::Zero(global.rows());
  if (global.cols() > 0) out += global * global_loadings[ii].row(j).transpose();
  if (specific[ii].cols() > 0) out += specific[ii] * specific_loadings[ii].row(j).transpose();
  return out;
}

void check_config(const ModelConfig& config) {
  if (config.d_max < 1) throw ValidationError("d_max must be >= 1");
  if (!(config.tol_beta > 0.0)) throw ValidationError("tol_beta must be > 0");
  if (config.max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (config.omega_override && !(*config.omega_override > 0.0))
    throw ValidationError("omega override must be > 0");
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) {
    os << v.message;
    if (v.industry >= 0) {
      os << " at (" << v.industry;
      if (v.country >= 0) os << "," << v.country;
      if (v.period >= 0) os << "," << v.period;
      os << ")";
    }
    os << "\n";
  }
  return os.str();
}

ValidationReport validate(const PanelDataset& data) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::string msg, int i = -1, int j = -1, int t = -1) {
    report.violations.push_back({kind, i, j, t, std::move(msg)});
  };
  if (data.L() < 1) add(ViolationKind::empty_panel, "panel has no industries");
  if (data.T < 2) add(ViolationKind::bad_period_count, "T must be >= 2");
  if (data.dx < 1) add(ViolationKind::bad_regressor_count, "d_x must be >= 1");

  for (int i = 0; i < data.L(); ++i) {
    if (data.N(i) < 1) {
      add(ViolationKind::empty_industry, "industry has no countries", i);
      continue;
    }
    for (int j = 0; j < data.N(i); ++j) {
      const auto& u = data.unit(i, j);
      bool shape_ok = true;
      if (u.y.size() != data.T) {
        add(ViolationKind::dimension_mismatch,
            "outcome length " + std::to_string(u.y.size()) + " != T=" + std::to_string(data.T), i, j);
        shape_ok = false;
      }
      if (u.X.rows() != data.T || u.X.cols() != data.dx) {
        add(ViolationKind::dimension_mismatch,
            "regressor block " + std::to_string(u.X.rows()) + "x" + std::to_string(u.X.cols()) + " != " +
                std::to_string(data.T) + "x" + std::to_string(data.dx),
            i, j);
        shape_ok = false;
      }
      if (!shape_ok) continue;
      for (int t = 0; t < data.T; ++t) {
        bool finite = std::isfinite(u.y(t));
        for (int k = 0; k < data.dx && finite; ++k) finite = std::isfinite(u.X(t, k));
        if (!finite) add(ViolationKind::non_finite, "non-finite value", i, j, t);
      }
    }
  }
  return report;
}

void require_valid(const PanelDataset& data) {
  auto report = validate(data);
  if (!report.ok()) throw ValidationError("invalid panel:\n" + report.to_string());
}

std::vector<Vector> replicate_beta(const Vector& beta, int L) {
  return std::vector<Vector>(static_cast<std::size_t>(L), beta);
}

RaggedSeries residuals(const PanelDataset& data, std::span<const Vector> beta_per_industry) {
  if (static_cast<int>(beta_per_industry.size()) != data.L())
    throw ValidationError("expected " + std::to_string(data.L()) + " slope vectors, got " +
                          std::to_string(beta_per_industry.size()));
  RaggedSeries out(static_cast<std::size_t>(data.L()));
  for (int i = 0; i < data.L(); ++i) {
    const auto& beta = beta_per_industry[static_cast<std::size_t>(i)];
    if (beta.size() != data.dx) throw ValidationError("slope vector length does not match d_x");
    auto& row = out[static_cast<std::size_t>(i)];
    row.reserve(static_cast<std::size_t>(data.N(i)));
    for (int j = 0; j < data.N(i); ++j) {
      const auto& u = data.unit(i, j);
      row.emplace_back(u.y - u.X * beta);
    }
  }
  return out;
}

Matrix residual_block(const PanelDataset& data, int industry, const Vector& beta) {
  if (beta.size() != data.dx) throw ValidationError("slope vector length does not match d_x");
  Matrix E(data.T, data.N(industry));
  for (int j = 0; j < data.N(industry); ++j) {
    const auto& u = data.unit(industry, j);
    E.col(j) = u.y - u.X * beta;
  }
  return E;
}

double objective_q(const PanelDataset& data, const Vector& beta, std::span<const Matrix> factors) {
  if (static_cast<int>(factors.size()) != data.L())
    throw ValidationError("expected one factor matrix per industry");
  long double total = 0.0L;
  for (int i = 0; i < data.L(); ++i) {
    const Matrix& F = factors[static_cast<std::size_t>(i)];
    if (F.cols() > 0 && F.rows() != data.T) throw ValidationError("factor matrix must have T rows");
    if (F.cols() > 0) {
      const Matrix gram = F.transpose() * F / static_cast<double>(data.T);
      const double dev = (gram - Matrix::Identity(F.cols(), F.cols())).cwiseAbs().maxCoeff();
      if (dev > 1e-6)
        throw ValidationError("factor candidate for industry " + std::to_string(i) +
                              " is not orthonormal ((1/T)F'F deviates by " + std::to_string(dev) + ")");
    }
    Matrix E = residual_block(data, i, beta);
    if (F.cols() > 0) {
      const Eigen::LLT<Matrix> gram_llt(F.transpose() * F);
      E -= F * gram_llt.solve(F.transpose() * E);
    }
    long double industry_sum = 0.0L;
    for (Eigen::Index c = 0; c < E.cols(); ++c)
      for (Eigen::Index r = 0; r < E.rows(); ++r) industry_sum += static_cast<long double>(E(r, c)) * E(r, c);
    total += industry_sum;
  }
  return static_cast<double>(total);
}

}  // namespace hpanel
