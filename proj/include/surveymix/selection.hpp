#pragma once

#include <map>
#include <vector>

#include "surveymix/data.hpp"
#include "surveymix/model.hpp"
#include "surveymix/parallel.hpp"
#include "surveymix/rng.hpp"

namespace surveymix {

// Degrees-of-freedom bound for factorizing the G x L frequency matrix:
// the largest K with G(L-J) >= K(L-J) + G(K-1), i.e.
// floor(G - G(G-1)/(L+G-J)), never below 1. Requires L > J.
int max_identifiable_k(int g, int j, int l);

// Eigenvalues of the G x G Gram matrix Y Y^T, descending. Cyclic Jacobi;
// G is small so simplicity wins over speed.
std::vector<double> scree(const FrequencyMatrix& y);

// Smallest K whose leading eigenvalues explain at least `threshold` of
// total variance.
int suggest_k_scree(const std::vector<double>& eigenvalues,
                    double threshold = 0.90);

// Observed-data log-likelihood with types marginalized out:
// sum_i log sum_k pi[label_i,k] prod_j beta^j[k, x_ij]. Missing responses
// contribute no factor. Returns -infinity when some respondent has zero
// likelihood; the 1-based index of the first such respondent is stored in
// *zero_respondent when given.
double observed_loglik(const SurveyDataset& data,
                       const std::vector<MatD>& beta, const MatD& pi,
                       int* zero_respondent = nullptr,
                       Exec exec = Exec::parallel);

// Free-parameter count: (L_j - 1) per beta row per question per type,
// (K - 1) per mixture row, plus K variances in dynamic mode.
int free_parameter_count(Mode mode, int k, int n_labels,
                         const std::vector<int>& l);

// BIC approximation evaluated at the elementwise posterior mean of the
// draws: -loglik(theta_mean) + p_k/2 * log(N). Lower is better.
double bic(const SurveyDataset& data, const PosteriorDraws& draws, int k);

struct SelectionReport {
  int k_max_counting = 1;
  std::vector<double> eigenvalues;
  int k_scree = 1;
  std::map<int, double> bic_by_k;
  int recommended_k = 1;
};

struct SelectionOptions {
  int k_max = 3;
  double scree_threshold = 0.90;
  std::uint32_t iterations = 1500;
  std::uint32_t burn_in = 500;
  std::uint32_t thin = 5;
  double eta_diag = 10.0;
  double alpha_fill = 1.0;
};

// Counting rule + scree + BIC sweep over K = 1..k_max; recommended_k is
// the BIC argmin.
SelectionReport run_selection(const SurveyDataset& data,
                              const SelectionOptions& options,
                              const RngStream& rng,
                              Exec exec = Exec::parallel);

}  // namespace surveymix
