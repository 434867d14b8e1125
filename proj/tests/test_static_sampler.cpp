#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "surveymix/posterior.hpp"
#include "surveymix/simulate.hpp"
#include "surveymix/static_sampler.hpp"
#include "test_fixtures.hpp"

using namespace surveymix;

TEST_CASE("default priors anchor the diagonal at 10") {
  const SurveyDataset data =
      testfix::make_dataset({{1}, {2}, {3}}, {1, 1, 1}, {3});
  const PriorSpec priors = default_priors(data, 2);
  CHECK(priors.warnings.empty());
  REQUIRE(priors.eta.size() == 1);
  const MatD& e = priors.eta[0];
  CHECK(e.row(0)[0] == 10.0);
  CHECK(e.row(0)[1] == 1.0);
  CHECK(e.row(0)[2] == 1.0);
  CHECK(e.row(1)[0] == 1.0);
  CHECK(e.row(1)[1] == 10.0);
  CHECK(e.row(1)[2] == 1.0);
  for (const double a : priors.alpha.data()) CHECK(a == 1.0);
}

TEST_CASE("default priors with K=1") {
  const SurveyDataset data =
      testfix::make_dataset({{1}, {2}, {3}}, {1, 1, 1}, {3});
  const PriorSpec priors = default_priors(data, 1);
  CHECK(priors.eta[0].rows() == 1);
  CHECK(priors.eta[0].row(0)[0] == 10.0);
  CHECK(priors.eta[0].row(0)[1] == 1.0);
  CHECK(priors.alpha.cols() == 1);
}

TEST_CASE("anchoring truncates when K exceeds L_j") {
  const SurveyDataset data =
      testfix::make_dataset({{1}, {2}, {3}}, {1, 1, 1}, {3});
  const PriorSpec priors = default_priors(data, 4);
  REQUIRE(priors.warnings.size() == 1);
  const MatD& e = priors.eta[0];
  for (int k = 0; k < 3; ++k) CHECK(e(std::size_t(k), std::size_t(k)) == 10.0);
  for (int v = 0; v < 3; ++v) CHECK(e(3, std::size_t(v)) == 1.0);
}

TEST_CASE("init_state shapes, determinism, K=1 degenerate") {
  const SurveyDataset data = testfix::make_dataset(
      {{1, 2}, {2, 1}, {3, 2}, {1, 1}}, {1, 2, 1, 2}, {3, 2});

  SUBCASE("K=1 assigns every respondent type 1") {
    const ModelConfig config = make_default_config(data, 1);
    const ChainState state = init_state(data, config, RngStream(1, 0));
    for (const auto z : state.z) CHECK(z == 1);
  }

  SUBCASE("fixed seed reproduces the state") {
    const ModelConfig config = make_default_config(data, 3);
    const ChainState a = init_state(data, config, RngStream(9, 2));
    const ChainState b = init_state(data, config, RngStream(9, 2));
    CHECK(a.z == b.z);
    CHECK(a.pi == b.pi);
    CHECK(a.beta[0] == b.beta[0]);
    CHECK(a.beta[1] == b.beta[1]);
  }

  SUBCASE("pi has one simplex row per group") {
    const ModelConfig config = make_default_config(data, 3);
    const ChainState state = init_state(data, config, RngStream(2, 0));
    CHECK(state.pi.rows() == 2);
    CHECK(state.pi.cols() == 3);
    state.check_invariants();
  }
}

TEST_CASE("step_z leaves K=1 assignments alone") {
  const SurveyDataset data =
      testfix::make_dataset({{1}, {2}}, {1, 1}, {2});
  const ModelConfig config = make_default_config(data, 1);
  ChainState state = init_state(data, config, RngStream(3, 0));
  step_z(state, data, RngStream(3, 0), 1, Exec::serial);
  for (const auto z : state.z) CHECK(z == 1);
}

TEST_CASE("step_z with degenerate one-hot beta is deterministic") {
  const SurveyDataset data =
      testfix::make_dataset({{1}, {2}}, {1, 1}, {2});
  const ModelConfig config = make_default_config(data, 2);
  ChainState state = init_state(data, config, RngStream(4, 0));
  state.pi(0, 0) = 0.5;
  state.pi(0, 1) = 0.5;
  state.beta[0](0, 0) = 1.0;
  state.beta[0](0, 1) = 0.0;
  state.beta[0](1, 0) = 0.0;
  state.beta[0](1, 1) = 1.0;
  for (std::uint64_t sweep = 1; sweep <= 50; ++sweep) {
    step_z(state, data, RngStream(4, 0), sweep, Exec::serial);
    CHECK(state.z[0] == 1);  // answered category 1
    CHECK(state.z[1] == 2);  // answered category 2
  }
}

TEST_CASE("step_z resampling frequencies match the normalized product") {
  const SurveyDataset data = testfix::make_dataset({{1}}, {1}, {2});
  const ModelConfig config = make_default_config(data, 2);
  ChainState state = init_state(data, config, RngStream(5, 0));
  state.pi(0, 0) = 0.3;
  state.pi(0, 1) = 0.7;
  state.beta[0](0, 0) = 0.8;
  state.beta[0](0, 1) = 0.2;
  state.beta[0](1, 0) = 0.4;
  state.beta[0](1, 1) = 0.6;
  // P(z=1) = 0.3*0.8 / (0.3*0.8 + 0.7*0.4) = 6/13.
  const double p1 = 0.24 / 0.52;
  const int sweeps = 100000;
  int count1 = 0;
  const RngStream rng(5, 0);
  for (int sweep = 1; sweep <= sweeps; ++sweep) {
    step_z(state, data, rng, std::uint64_t(sweep), Exec::serial);
    if (state.z[0] == 1) ++count1;
  }
  const double se = std::sqrt(p1 * (1.0 - p1) / double(sweeps));
  CHECK(std::abs(double(count1) / sweeps - p1) < 3.0 * se);
}

TEST_CASE("step_z reports underflow with the respondent index") {
  const SurveyDataset data = testfix::make_dataset({{1}, {2}}, {1, 1}, {2});
  const ModelConfig config = make_default_config(data, 2);
  ChainState state = init_state(data, config, RngStream(6, 0));
  // Both types put zero mass on category 2: respondent 2 has no support.
  state.beta[0](0, 0) = 1.0;
  state.beta[0](0, 1) = 0.0;
  state.beta[0](1, 0) = 1.0;
  state.beta[0](1, 1) = 0.0;
  CHECK_THROWS_WITH_AS(step_z(state, data, RngStream(6, 0), 1, Exec::serial),
                       doctest::Contains("respondent 2"), std::runtime_error);
}

TEST_CASE("step_beta: posterior mean matches (eta + counts) / total") {
  // N=5, everyone type 1, everyone answers category 1; eta all ones.
  const SurveyDataset data =
      testfix::make_dataset({{1}, {1}, {1}, {1}, {1, }}, {1, 1, 1, 1, 1}, {2});
  ModelConfig config = make_default_config(data, 2);
  config.eta[0] = MatD(2, 2, 1.0);  // flat, no anchoring

  ChainState state = init_state(data, config, RngStream(7, 0));
  for (auto& z : state.z) z = 1;

  const int sweeps = 100000;
  double mean_type1_cat1 = 0.0;
  double mean_type2_cat1 = 0.0;
  const RngStream rng(7, 0);
  for (int sweep = 1; sweep <= sweeps; ++sweep) {
    step_beta(state, data, config, rng, std::uint64_t(sweep), Exec::serial);
    mean_type1_cat1 += state.beta[0](0, 0);
    mean_type2_cat1 += state.beta[0](1, 0);
  }
  mean_type1_cat1 /= sweeps;
  mean_type2_cat1 /= sweeps;

  // Type 1: Dirichlet(6, 1): mean 6/7, var = 6/(49*8).
  const double m1 = 6.0 / 7.0;
  const double se1 = std::sqrt(m1 * (1.0 - m1) / 8.0 / double(sweeps));
  CHECK(std::abs(mean_type1_cat1 - m1) < 3.0 * se1);

  // Type 2 has no respondents: prior Dirichlet(1, 1), mean 1/2.
  const double se2 = std::sqrt(0.25 / 3.0 / double(sweeps));
  CHECK(std::abs(mean_type2_cat1 - 0.5) < 3.0 * se2);
}

TEST_CASE("assignment counts partition the respondents") {
  const SurveyDataset data = testfix::make_dataset(
      {{1, 2}, {2, kMissing}, {3, 2}, {1, 1}, {2, 1}}, {1, 2, 1, 2, 2}, {3, 2});
  const ModelConfig config = make_default_config(data, 3);
  const ChainState state = init_state(data, config, RngStream(8, 1));
  const AssignmentCounts counts = tally_counts(state, data, Exec::serial);

  // Per question: counts summed over types and categories equal the
  // number of non-missing responses.
  std::int64_t q2_total = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t v = 0; v < 2; ++v) q2_total += counts.resp[1](k, v);
  }
  CHECK(q2_total == 4);  // one missing out of 5

  std::int64_t grp_total = 0;
  for (const auto c : counts.grp.data()) grp_total += c;
  CHECK(grp_total == 5);

  // Per group: row sums equal group sizes.
  std::int64_t g1 = 0, g2 = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    g1 += counts.grp(0, k);
    g2 += counts.grp(1, k);
  }
  CHECK(g1 == 2);
  CHECK(g2 == 3);
}

TEST_CASE("step_pi: posterior mean matches (alpha + counts) / total") {
  // Single group, all 8 respondents type 1, K=2, alpha=(1,1).
  std::vector<std::vector<std::int32_t>> rows(8, {1});
  rows[1][0] = 2;  // keep two observed categories
  const SurveyDataset data =
      testfix::make_dataset(rows, std::vector<std::int32_t>(8, 1), {2});
  ModelConfig config = make_default_config(data, 2);

  ChainState state = init_state(data, config, RngStream(9, 0));
  for (auto& z : state.z) z = 1;

  const int sweeps = 100000;
  double mean1 = 0.0;
  const RngStream rng(9, 0);
  for (int sweep = 1; sweep <= sweeps; ++sweep) {
    step_pi(state, data, config, rng, std::uint64_t(sweep), Exec::serial);
    mean1 += state.pi(0, 0);
  }
  mean1 /= sweeps;
  // Dirichlet(9, 1): mean 0.9, var = 0.9*0.1/11.
  const double se = std::sqrt(0.9 * 0.1 / 11.0 / double(sweeps));
  CHECK(std::abs(mean1 - 0.9) < 3.0 * se);
}

TEST_CASE("step_pi: empty type keeps mass near the prior share") {
  std::vector<std::vector<std::int32_t>> rows(4, {1});
  rows[0][0] = 2;
  const SurveyDataset data =
      testfix::make_dataset(rows, std::vector<std::int32_t>(4, 1), {2});
  ModelConfig config = make_default_config(data, 2);
  ChainState state = init_state(data, config, RngStream(10, 0));
  for (auto& z : state.z) z = 1;  // type 2 empty

  const int sweeps = 50000;
  double mean2 = 0.0;
  const RngStream rng(10, 0);
  for (int sweep = 1; sweep <= sweeps; ++sweep) {
    step_pi(state, data, config, rng, std::uint64_t(sweep), Exec::serial);
    mean2 += state.pi(0, 1);
  }
  mean2 /= sweeps;
  // Dirichlet(1, ...) coordinate with zero count: mean 1/(2+4) = 1/6.
  const double m = 1.0 / 6.0;
  const double se = std::sqrt(m * (1.0 - m) / 7.0 / double(sweeps));
  CHECK(std::abs(mean2 - m) < 3.0 * se);
}

TEST_CASE("run_gibbs matches the exact enumeration posterior") {
  // N=3, J=1, L=2, K=2, single group; all z configurations enumerable.
  const SurveyDataset data = testfix::make_dataset({{1}, {1}, {2}}, {1, 1, 1}, {2});
  ModelConfig config = make_default_config(data, 2);
  config.iterations = 60000;
  config.burn_in = 5000;
  config.thin = 1;

  const double exact = testfix::enumerate_z_marginal(data, config, 1);
  const PosteriorDraws draws = run_gibbs(data, config, RngStream(123, 0));
  double freq = 0.0;
  for (const Snapshot& snap : draws.snapshots) {
    if (snap.state.z[0] == 1) freq += 1.0;
  }
  freq /= double(draws.snapshots.size());
  CHECK(std::abs(freq - exact) < 0.02);
}

TEST_CASE("run_gibbs snapshot count and determinism") {
  const SurveyDataset data = testfix::make_dataset(
      {{1, 2}, {2, 1}, {3, 2}, {1, 1}}, {1, 2, 1, 2}, {3, 2});
  ModelConfig config = make_default_config(data, 2);
  config.iterations = 100;
  config.burn_in = 37;
  config.thin = 10;

  const PosteriorDraws a = run_gibbs(data, config, RngStream(77, 3));
  CHECK(a.snapshots.size() == std::size_t((100 - 37) / 10));
  CHECK(a.seed == 77);
  CHECK(a.stream_id == 3);

  const PosteriorDraws b = run_gibbs(data, config, RngStream(77, 3));
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t s = 0; s < a.snapshots.size(); ++s) {
    CHECK(a.snapshots[s].state.z == b.snapshots[s].state.z);
    CHECK(a.snapshots[s].state.pi == b.snapshots[s].state.pi);
    CHECK(a.snapshots[s].loglik == b.snapshots[s].loglik);
  }

  for (const Snapshot& snap : a.snapshots) snap.state.check_invariants();
}

TEST_CASE("posterior mean beta recovers an anchored simulated truth") {
  const RecoveryDesign design{3, 3, {4, 4, 4}, 3};
  const TrueParams truth =
      random_static_params(design.g, design.k, design.l, RngStream(2024, 0));
  const SurveyDataset data =
      simulate_static(truth, {1200, 1200, 1200}, RngStream(2024, 1));

  ModelConfig config = make_default_config(data, design.k);
  config.iterations = 900;
  config.burn_in = 300;
  config.thin = 3;
  const PosteriorDraws draws = run_gibbs(data, config, RngStream(2024, 2));
  const PointEstimates est = summarize(draws);
  const double corr =
      pearson(est.beta_mean[0].row(0), truth.beta[0].row(0));
  CHECK(corr >= 0.95);
}

TEST_CASE("anchored posterior keeps per-row argmax on the diagonal") {
  const int reps = 20;
  int anchored_ok = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const std::uint64_t base = 40 + 4 * std::uint64_t(rep);
    const TrueParams truth =
        random_static_params(3, 3, {4, 4, 4}, RngStream(5, base));
    const SurveyDataset data =
        simulate_static(truth, {400, 400, 400}, RngStream(5, base + 1));
    ModelConfig config = make_default_config(data, 3);
    config.iterations = 600;
    config.burn_in = 200;
    config.thin = 4;
    const PosteriorDraws draws = run_gibbs(data, config, RngStream(5, base + 2));
    const PointEstimates est = summarize(draws);
    bool diag = true;
    for (std::size_t k = 0; k < 3; ++k) {
      const auto row = est.beta_mean[0].row(k);
      std::size_t argmax = 0;
      for (std::size_t v = 1; v < row.size(); ++v) {
        if (row[v] > row[argmax]) argmax = v;
      }
      if (argmax != k) diag = false;
    }
    if (diag) ++anchored_ok;
  }
  CHECK(anchored_ok >= 19);
}
