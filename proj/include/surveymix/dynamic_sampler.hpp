#pragma once

#include "surveymix/model.hpp"
#include "surveymix/parallel.hpp"
#include "surveymix/rng.hpp"
#include "surveymix/static_sampler.hpp"

namespace surveymix {

// Per-iteration SGLD bookkeeping, written as a sidecar next to the draws.
struct SgldDiagnostics {
  std::vector<std::uint64_t> iteration;
  std::vector<double> epsilon;   // step size, strictly decreasing
  std::vector<double> grad_rms;  // RMS gradient over (t, k)
  std::vector<double> noise_var; // injected-noise variance (= epsilon)
  std::vector<std::vector<double>> drift;  // per iteration: mean |delta pi_tilde| per period
};

// Per-period assignment counts: n(t,k) respondents of type k at period t,
// and the period totals N_t.
struct PeriodCounts {
  Matrix<std::int64_t> n_tk;
  std::vector<std::int64_t> n_t;
};

PeriodCounts period_counts(const ChainState& state, const SurveyDataset& data,
                           Exec exec = Exec::parallel);

// Derivative of the log conditional density of the period-t logits with
// respect to pi_tilde(t, k):
//   -(pt[t,k] - pt[t-1,k])/sigma2_k + (pt[t+1,k] - pt[t,k])/sigma2_k
//   + n(t,k) - N_t * pi(t,k)
// The backward term is dropped at t = 1 and the forward term at t = T
// (flat prior on the path start, no successor at the end). t and k are
// 1-based.
double sgld_gradient(const ChainState& state, int t, int k,
                     const PeriodCounts& counts);
double sgld_gradient(const ChainState& state, int t, int k,
                     const SurveyDataset& data);

// One SGLD update of every logit: pi_tilde += eps_r/2 * gradient +
// Normal(0, eps_r) noise, then pi = softmax(pi_tilde) row by row. Full
// batch: the gradient uses all respondents of the period.
void step_pi_tilde_sgld(ChainState& state, const SurveyDataset& data,
                        const ModelConfig& config, std::uint64_t r,
                        const RngStream& rng, Exec exec = Exec::parallel,
                        SgldDiagnostics* diag = nullptr);

// Conjugate update sigma2_k ~ InverseGamma(v0 + T, s0 + sum of squared
// path increments of type k).
void step_sigma(ChainState& state, const ModelConfig& config,
                const RngStream& rng, std::uint64_t sweep);

// Full dynamic chain: z (with period mixtures), beta, SGLD logits, sigma2.
PosteriorDraws run_dynamic(const SurveyDataset& data,
                           const ModelConfig& config, const RngStream& rng,
                           Exec exec = Exec::parallel,
                           SgldDiagnostics* diag = nullptr);

}  // namespace surveymix
