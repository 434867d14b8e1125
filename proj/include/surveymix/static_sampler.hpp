#pragma once

#include "surveymix/model.hpp"
#include "surveymix/parallel.hpp"
#include "surveymix/rng.hpp"

namespace surveymix {

// Sufficient statistics of the current type assignment: resp[j](k,v) is
// the number of type-k respondents answering v to question j; grp(g,k)
// counts type-k respondents with label g.
struct AssignmentCounts {
  std::vector<Matrix<std::int64_t>> resp;
  Matrix<std::int64_t> grp;
};

AssignmentCounts tally_counts(const ChainState& state,
                              const SurveyDataset& data,
                              Exec exec = Exec::parallel);

// Draw-site indices within one sweep. Every random draw in a sweep owns a
// distinct site, so kernels may visit sites in any order (or in parallel)
// without changing the results.
struct SiteLayout {
  std::uint32_t n = 0;   // respondents
  std::uint32_t jk = 0;  // questions x types
  std::uint32_t site_z(std::uint32_t i0) const { return i0; }
  std::uint32_t site_beta(std::uint32_t j0, std::uint32_t k0,
                          std::uint32_t k_count) const {
    return n + j0 * k_count + k0;
  }
  std::uint32_t site_mix(std::uint32_t idx) const { return n + jk + idx; }
  std::uint32_t site_sigma(std::uint32_t tk, std::uint32_t k0) const {
    return n + jk + tk + k0;
  }
};

SiteLayout site_layout(const SurveyDataset& data, int k);

ChainState init_state(const SurveyDataset& data, const ModelConfig& config,
                      const RngStream& rng);

// Resamples every z_i from P(z_i = k) proportional to
// pi[label_i, k] * prod_j beta^j[k, x_ij], accumulated in log space.
// Missing responses under the drop policy contribute no factor.
void step_z(ChainState& state, const SurveyDataset& data, const RngStream& rng,
            std::uint64_t sweep, Exec exec = Exec::parallel);

// Conjugate Dirichlet update of every beta^j row given z and counts.
void step_beta(ChainState& state, const SurveyDataset& data,
               const ModelConfig& config, const RngStream& rng,
               std::uint64_t sweep, Exec exec = Exec::parallel);

// Conjugate Dirichlet update of every pi row given z (static mode).
void step_pi(ChainState& state, const SurveyDataset& data,
             const ModelConfig& config, const RngStream& rng,
             std::uint64_t sweep, Exec exec = Exec::parallel);

// Full Gibbs chain: z, beta, pi per sweep, thinned snapshots after
// burn-in with the observed-data log-likelihood attached.
PosteriorDraws run_gibbs(const SurveyDataset& data, const ModelConfig& config,
                         const RngStream& rng, Exec exec = Exec::parallel);

}  // namespace surveymix
