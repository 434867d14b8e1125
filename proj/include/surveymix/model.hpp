#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "surveymix/data.hpp"
#include "surveymix/matrix.hpp"

namespace surveymix {

// Decreasing SGLD step-size schedule eps_r = a * (b + r)^(-c).
struct SgldSchedule {
  double a = 0.01;
  double b = 1.0;
  double c = 0.5;

  double epsilon(std::uint64_t r) const {
    return a * std::pow(b + double(r), -c);
  }
};

// Everything a chain needs besides the data. A single struct covers both
// model variants; the dynamic-only fields are ignored in static mode.
struct ModelConfig {
  Mode mode = Mode::Static;
  int k = 1;
  MatD alpha;               // G x K Dirichlet hyperparameters (static)
  std::vector<MatD> eta;    // per question, K x L_j Dirichlet hyperparameters
  double v0 = 3.0;          // InverseGamma shape (dynamic)
  double s0 = 1.0;          // InverseGamma scale (dynamic)
  SgldSchedule schedule;    // (dynamic)
  std::uint32_t iterations = 2000;
  std::uint32_t burn_in = 1000;
  std::uint32_t thin = 5;

  void validate(const SurveyDataset& data) const;
};

// Current position of one chain. pi rows live on the simplex; in dynamic
// mode pi is the softmax image of the logit paths in pi_tilde.
struct ChainState {
  std::vector<std::int32_t> z;  // N, type indices 1..K
  MatD pi;                      // G x K (static) or T x K (dynamic)
  std::vector<MatD> beta;       // per question, K x L_j
  MatD pi_tilde;                // T x K logits (dynamic only)
  std::vector<double> sigma2;   // K random-walk variances (dynamic only)

  void check_invariants(double tol = 1e-10) const;
};

struct Snapshot {
  std::uint32_t iteration = 0;
  double loglik = 0.0;
  ChainState state;
};

// Thinned post-burn-in snapshots plus enough metadata to reproduce the
// run.
struct PosteriorDraws {
  Mode mode = Mode::Static;
  ModelConfig config;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::vector<Snapshot> snapshots;
};

struct PriorSpec {
  MatD alpha;
  std::vector<MatD> eta;
  std::vector<std::string> warnings;
};

// Anchored defaults: alpha all ones, eta one everywhere except eta_diag on
// the diagonal entry tying type k to response category k. Questions with
// fewer categories than types anchor only their first L_j types and emit
// a warning.
PriorSpec default_priors(const SurveyDataset& data, int k,
                         double eta_diag = 10.0, double alpha_fill = 1.0);

ModelConfig make_default_config(const SurveyDataset& data, int k);

}  // namespace surveymix
