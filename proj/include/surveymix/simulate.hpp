#pragma once

#include <filesystem>
#include <vector>

#include "surveymix/data.hpp"
#include "surveymix/matrix.hpp"
#include "surveymix/parallel.hpp"
#include "surveymix/rng.hpp"

namespace surveymix {

// Ground-truth parameters of a synthetic dataset.
struct TrueParams {
  Mode mode = Mode::Static;
  int k = 1;
  MatD pi;                     // G x K or T x K, simplex rows
  MatD pi_tilde;               // logit paths (dynamic)
  std::vector<MatD> beta;      // per question, K x L_j
  std::vector<double> sigma2;  // per-type walk variances (dynamic)
};

// Anchored response distributions: each row is a uniform Dirichlet draw
// with its largest entry swapped into the type's own anchor category, so
// estimated and true type labels line up without any relabeling pass.
std::vector<MatD> random_anchored_beta(int k, const std::vector<int>& l,
                                       const RngStream& rng);

// Static truth: anchored beta plus uniform-Dirichlet group mixtures.
TrueParams random_static_params(int g, int k, const std::vector<int>& l,
                                const RngStream& rng);

// Logit random-walk paths started at zero: pt[t,:] = pt[t-1,:] + w_t,
// w_t ~ Normal(0, sigma2) elementwise.
MatD random_walk_logits(int t, int k, double sigma2, const RngStream& rng);

SurveyDataset simulate_static(const TrueParams& params,
                              const std::vector<int>& n_per_group,
                              const RngStream& rng);

// Generates the logit paths with the given walk variance, then samples one
// cross-section per period. Returns the dataset and the params actually
// used (paths filled in).
std::pair<SurveyDataset, TrueParams> simulate_dynamic(
    const TrueParams& params, const std::vector<int>& n_per_period,
    double sigma2_true, const RngStream& rng);

SurveyDataset simulate_from(const TrueParams& params,
                            const std::vector<int>& n_per_label,
                            const RngStream& rng,
                            std::uint64_t unit_offset = 0);

// Monte-Carlo designs for the identification experiment.
struct RecoveryDesign {
  int g = 5;
  int j = 4;
  std::vector<int> l = {5, 5, 5, 5};
  int k = 3;  // both the DGP and the fitted model
};

RecoveryDesign identified_design();
RecoveryDesign under_identified_design();

struct RecoveryOptions {
  std::uint32_t iterations = 1500;
  std::uint32_t burn_in = 500;
  std::uint32_t thin = 5;
};

struct RecoveryCurve {
  std::vector<int> n_grid;          // total respondents
  std::vector<double> mean_corr;    // mean over reps of corr(beta1 row 1)
  std::vector<double> sd_corr;
};

// For each N in the grid, `reps` independent truths and datasets (nested
// across N within a rep), fit by Gibbs, and Pearson correlation between
// the posterior-mean first response row and the truth.
RecoveryCurve recovery_experiment(const RecoveryDesign& design,
                                  const std::vector<int>& n_grid, int reps,
                                  const RecoveryOptions& options,
                                  const RngStream& rng,
                                  Exec exec = Exec::parallel);

void write_recovery_csv(const RecoveryCurve& curve,
                        const std::filesystem::path& path);

double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace surveymix
