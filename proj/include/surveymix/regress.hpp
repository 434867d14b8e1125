#pragma once

#include <string>
#include <vector>

#include "surveymix/matrix.hpp"

namespace surveymix {

// Inputs of the second-step regression: outcome on treatment, controls,
// and estimated type-membership probabilities.
struct RegressionSpec {
  std::vector<double> outcome;
  std::vector<double> treatment;
  MatD controls;     // N x W (may have zero columns)
  MatD memberships;  // N x K, rows sum to 1
  std::vector<std::string> control_names;
};

// Design matrix: intercept, controls, treatment, K-1 membership columns
// (last type is the baseline; memberships sum to 1, so keeping all K
// would collide with the intercept), and K-1 treatment x membership
// interactions.
struct DesignMatrix {
  MatD x;
  std::vector<std::string> names;
  int treatment_col = -1;
  std::vector<int> interaction_cols;  // one per non-baseline type
};

DesignMatrix build_design(const RegressionSpec& spec);

struct OlsFit {
  std::vector<double> coef;
  std::vector<double> se;  // classical, homoskedastic
  MatD cov;
  double r2 = 0.0;
  double sigma2 = 0.0;
  int n = 0;
  int p = 0;
  std::vector<std::string> names;
  int treatment_col = -1;
  std::vector<int> interaction_cols;
};

// Least squares via Householder QR; rejects rank-deficient designs naming
// the offending columns.
OlsFit ols(const std::vector<double>& y, const MatD& x,
           const std::vector<std::string>& names = {});

OlsFit fit_regression(const RegressionSpec& spec);

// Per-type treatment slopes: base coefficient plus the type's interaction
// (zero for the baseline type). Returns K entries.
std::vector<double> heterogeneous_returns(const OlsFit& fit, int k);

// Standard error of the type-k slope (linear combo of base + interaction).
std::vector<double> heterogeneous_return_ses(const OlsFit& fit, int k);

}  // namespace surveymix
