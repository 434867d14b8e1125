#pragma once

#include <span>
#include <utility>
#include <vector>

#include "surveymix/matrix.hpp"
#include "surveymix/model.hpp"

namespace surveymix {

// Point estimates and equal-tailed credible intervals from thinned draws.
struct PointEstimates {
  std::vector<MatD> beta_mean;
  std::vector<MatD> beta_lo, beta_hi;
  MatD pi_mean, pi_lo, pi_hi;
  MatD memberships;  // N x K snapshot frequencies of z_i = k
  double level = 0.90;
};

PointEstimates summarize(const PosteriorDraws& draws, double level = 0.90);

// Posterior mean and band of pi[t,k] over time; dynamic draws only.
struct SeriesBand {
  MatD mean, lo, hi;  // T x K
};

SeriesBand type_proportion_series(const PosteriorDraws& draws,
                                  double level = 0.90);

// Fisher-Rao geodesic distance between two discrete distributions:
// 2 * arccos(sum_v sqrt(p_v q_v)), in [0, pi].
double rao_distance(std::span<const double> p, std::span<const double> q);

// Questions ordered by how far apart two types' response distributions
// sit, most divergent first. Ties keep input order.
std::vector<std::pair<int, double>> rank_questions_by_divergence(
    const PointEstimates& estimates, int k1, int k2);

// Michigan-style consumer sentiment index from the five relative scores
// (favorable minus unfavorable plus 100, each in [0, 200]):
// sum of rounded scores / 6.7558 + 2.0.
double compute_ics(std::span<const double> relative_scores);

// Label-switching diagnostic: per snapshot and type, the anchored mass
// beta^1[k, k]. Rows = snapshots, columns = types with an anchor
// category on question 1.
MatD anchoring_diagnostic(const PosteriorDraws& draws);

}  // namespace surveymix
