#include "surveymix/regress.hpp"

#include <cmath>
#include <stdexcept>

namespace surveymix {

DesignMatrix build_design(const RegressionSpec& spec) {
  const std::size_t n = spec.outcome.size();
  const std::size_t k = spec.memberships.cols();
  const std::size_t w = spec.controls.cols();
  if (spec.treatment.size() != n || spec.memberships.rows() != n ||
      (w > 0 && spec.controls.rows() != n)) {
    throw std::invalid_argument("build_design: inconsistent row counts");
  }
  if (k < 1) throw std::invalid_argument("build_design: no membership columns");
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t t = 0; t < k; ++t) total += spec.memberships(i, t);
    if (std::abs(total - 1.0) > 1e-6) {
      throw std::invalid_argument(
          "build_design: membership rows must sum to 1 (row " +
          std::to_string(i + 1) + ")");
    }
  }

  DesignMatrix design;
  const std::size_t p = 1 + w + 1 + (k - 1) + (k - 1);
  design.x = MatD(n, p);
  design.names.reserve(p);

  std::size_t c = 0;
  design.names.push_back("(Intercept)");
  for (std::size_t i = 0; i < n; ++i) design.x(i, c) = 1.0;
  ++c;
  for (std::size_t col = 0; col < w; ++col, ++c) {
    design.names.push_back(col < spec.control_names.size()
                               ? spec.control_names[col]
                               : "w" + std::to_string(col + 1));
    for (std::size_t i = 0; i < n; ++i) design.x(i, c) = spec.controls(i, col);
  }
  design.treatment_col = int(c);
  design.names.push_back("treatment");
  for (std::size_t i = 0; i < n; ++i) design.x(i, c) = spec.treatment[i];
  ++c;
  for (std::size_t t = 0; t + 1 < k; ++t, ++c) {
    design.names.push_back("type" + std::to_string(t + 1));
    for (std::size_t i = 0; i < n; ++i) design.x(i, c) = spec.memberships(i, t);
  }
  for (std::size_t t = 0; t + 1 < k; ++t, ++c) {
    design.interaction_cols.push_back(int(c));
    design.names.push_back("treatment:type" + std::to_string(t + 1));
    for (std::size_t i = 0; i < n; ++i) {
      design.x(i, c) = spec.treatment[i] * spec.memberships(i, t);
    }
  }
  return design;
}

OlsFit ols(const std::vector<double>& y, const MatD& x,
           const std::vector<std::string>& names) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (y.size() != n) throw std::invalid_argument("ols: y length mismatch");
  if (n < p || p == 0) {
    throw std::invalid_argument("ols: need at least as many rows as columns");
  }

  // Householder QR of the n x p design; R overwrites the top triangle and
  // q_t_y accumulates Q^T y alongside.
  MatD a = x;
  std::vector<double> qty = y;
  std::vector<double> diag_scale(p, 0.0);
  for (std::size_t col = 0; col < p; ++col) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += a(i, col) * a(i, col);
    diag_scale[col] = std::sqrt(norm);
  }
  double max_scale = 0.0;
  for (const double s : diag_scale) max_scale = std::max(max_scale, s);

  std::vector<double> r_diag(p, 0.0);
  std::vector<double> v(n, 0.0);
  for (std::size_t col = 0; col < p; ++col) {
    double norm = 0.0;
    for (std::size_t i = col; i < n; ++i) norm += a(i, col) * a(i, col);
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      r_diag[col] = 0.0;
      continue;
    }
    const double alpha = a(col, col) >= 0.0 ? -norm : norm;
    double vnorm2 = 0.0;
    for (std::size_t i = col; i < n; ++i) {
      v[i] = a(i, col);
      if (i == col) v[i] -= alpha;
      vnorm2 += v[i] * v[i];
    }
    r_diag[col] = alpha;
    if (vnorm2 == 0.0) {
      a(col, col) = alpha;
      continue;
    }
    for (std::size_t c2 = col; c2 < p; ++c2) {
      double dot = 0.0;
      for (std::size_t i = col; i < n; ++i) dot += v[i] * a(i, c2);
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = col; i < n; ++i) a(i, c2) -= f * v[i];
    }
    double dot = 0.0;
    for (std::size_t i = col; i < n; ++i) dot += v[i] * qty[i];
    const double f = 2.0 * dot / vnorm2;
    for (std::size_t i = col; i < n; ++i) qty[i] -= f * v[i];
  }

  // Rank check on the R diagonal relative to the column scales.
  std::vector<std::size_t> bad;
  const double tol = 1e-10 * std::max(max_scale, 1.0);
  for (std::size_t col = 0; col < p; ++col) {
    if (std::abs(a(col, col)) <= tol) bad.push_back(col);
  }
  if (!bad.empty()) {
    std::string msg = "ols: design matrix is rank deficient; offending columns:";
    for (const std::size_t col : bad) {
      msg += " ";
      msg += col < names.size() ? names[col] : std::to_string(col + 1);
    }
    throw std::invalid_argument(msg);
  }

  OlsFit fit;
  fit.n = int(n);
  fit.p = int(p);
  fit.names = names;
  fit.coef.assign(p, 0.0);
  for (std::size_t col = p; col-- > 0;) {
    double s = qty[col];
    for (std::size_t c2 = col + 1; c2 < p; ++c2) s -= a(col, c2) * fit.coef[c2];
    fit.coef[col] = s / a(col, col);
  }

  double rss = 0.0;
  for (std::size_t i = p; i < n; ++i) rss += qty[i] * qty[i];
  double mean_y = 0.0;
  for (const double yi : y) mean_y += yi;
  mean_y /= double(n);
  double tss = 0.0;
  for (const double yi : y) tss += (yi - mean_y) * (yi - mean_y);
  fit.r2 = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  fit.sigma2 = n > p ? rss / double(n - p) : 0.0;

  // (X^T X)^{-1} = R^{-1} R^{-T}: invert R by back substitution, then the
  // covariance entries are scaled row dot products.
  MatD rinv(p, p, 0.0);
  for (std::size_t col = 0; col < p; ++col) {
    rinv(col, col) = 1.0 / a(col, col);
    for (std::size_t row = col; row-- > 0;) {
      double s = 0.0;
      for (std::size_t mid = row + 1; mid <= col; ++mid) {
        s += a(row, mid) * rinv(mid, col);
      }
      rinv(row, col) = -s / a(row, row);
    }
  }
  fit.cov = MatD(p, p, 0.0);
  for (std::size_t r1 = 0; r1 < p; ++r1) {
    for (std::size_t r2 = r1; r2 < p; ++r2) {
      double s = 0.0;
      for (std::size_t col = std::max(r1, r2); col < p; ++col) {
        s += rinv(r1, col) * rinv(r2, col);
      }
      fit.cov(r1, r2) = fit.sigma2 * s;
      fit.cov(r2, r1) = fit.cov(r1, r2);
    }
  }
  fit.se.resize(p);
  for (std::size_t col = 0; col < p; ++col) fit.se[col] = std::sqrt(fit.cov(col, col));
  return fit;
}

OlsFit fit_regression(const RegressionSpec& spec) {
  const DesignMatrix design = build_design(spec);
  OlsFit fit = ols(spec.outcome, design.x, design.names);
  fit.treatment_col = design.treatment_col;
  fit.interaction_cols = design.interaction_cols;
  return fit;
}

std::vector<double> heterogeneous_returns(const OlsFit& fit, int k) {
  if (k < 1 || int(fit.interaction_cols.size()) != k - 1 ||
      fit.treatment_col < 0) {
    throw std::invalid_argument(
        "heterogeneous_returns: fit does not carry K-1 interactions");
  }
  std::vector<double> returns(static_cast<std::size_t>(k));
  const double base = fit.coef[std::size_t(fit.treatment_col)];
  for (int t = 0; t < k - 1; ++t) {
    returns[std::size_t(t)] =
        base + fit.coef[std::size_t(fit.interaction_cols[std::size_t(t)])];
  }
  returns[std::size_t(k - 1)] = base;  // baseline type
  return returns;
}

std::vector<double> heterogeneous_return_ses(const OlsFit& fit, int k) {
  if (k < 1 || int(fit.interaction_cols.size()) != k - 1 ||
      fit.treatment_col < 0 || fit.cov.rows() != std::size_t(fit.p)) {
    throw std::invalid_argument(
        "heterogeneous_return_ses: fit does not carry a covariance matrix");
  }
  std::vector<double> ses(static_cast<std::size_t>(k));
  const std::size_t b = std::size_t(fit.treatment_col);
  for (int t = 0; t < k - 1; ++t) {
    const std::size_t c = std::size_t(fit.interaction_cols[std::size_t(t)]);
    ses[std::size_t(t)] =
        std::sqrt(fit.cov(b, b) + fit.cov(c, c) + 2.0 * fit.cov(b, c));
  }
  ses[std::size_t(k - 1)] = std::sqrt(fit.cov(b, b));
  return ses;
}

}  // namespace surveymix
