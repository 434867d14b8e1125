#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "surveymix/distributions.hpp"
#include "surveymix/dynamic_sampler.hpp"
#include "surveymix/posterior.hpp"
#include "surveymix/simulate.hpp"
#include "test_fixtures.hpp"
#include "test_util.hpp"

using namespace surveymix;

namespace {

// Independent log conditional density of the period-t logits, used as the
// finite-difference oracle for the analytic gradient.
double log_conditional(const ChainState& state, const PeriodCounts& counts,
                       int t) {
  const int t_count = int(state.pi_tilde.rows());
  const int k_count = int(state.pi_tilde.cols());
  const std::size_t t0 = std::size_t(t - 1);
  double lp = 0.0;
  for (int k0 = 0; k0 < k_count; ++k0) {
    const double s2 = state.sigma2[std::size_t(k0)];
    if (t > 1) {
      const double d = state.pi_tilde(t0, std::size_t(k0)) -
                       state.pi_tilde(t0 - 1, std::size_t(k0));
      lp -= d * d / (2.0 * s2);
    }
    if (t < t_count) {
      const double d = state.pi_tilde(t0 + 1, std::size_t(k0)) -
                       state.pi_tilde(t0, std::size_t(k0));
      lp -= d * d / (2.0 * s2);
    }
  }
  const auto pi_t = softmax(state.pi_tilde.row(t0));
  for (int k0 = 0; k0 < k_count; ++k0) {
    lp += double(counts.n_tk(t0, std::size_t(k0))) * std::log(pi_t[std::size_t(k0)]);
  }
  return lp;
}

double central_difference(ChainState state, const PeriodCounts& counts, int t,
                          int k, double h) {
  const std::size_t t0 = std::size_t(t - 1);
  const std::size_t k0 = std::size_t(k - 1);
  const double x = state.pi_tilde(t0, k0);
  state.pi_tilde(t0, k0) = x + h;
  const double up = log_conditional(state, counts, t);
  state.pi_tilde(t0, k0) = x - h;
  const double down = log_conditional(state, counts, t);
  return (up - down) / (2.0 * h);
}

ChainState random_dynamic_state(int t_count, int k_count, RngStream& rng) {
  ChainState state;
  state.pi_tilde = MatD(std::size_t(t_count), std::size_t(k_count));
  state.pi = MatD(std::size_t(t_count), std::size_t(k_count));
  for (int t = 0; t < t_count; ++t) {
    for (int k = 0; k < k_count; ++k) {
      state.pi_tilde(std::size_t(t), std::size_t(k)) = 2.0 * (rng.uniform01() - 0.5);
    }
    softmax_into(state.pi_tilde.row(std::size_t(t)), state.pi.row(std::size_t(t)));
  }
  state.sigma2.resize(std::size_t(k_count));
  for (int k = 0; k < k_count; ++k) {
    state.sigma2[std::size_t(k)] = 0.1 + rng.uniform01();
  }
  return state;
}

PeriodCounts random_counts(int t_count, int k_count, RngStream& rng) {
  PeriodCounts counts;
  counts.n_tk = Matrix<std::int64_t>(std::size_t(t_count), std::size_t(k_count));
  counts.n_t.assign(std::size_t(t_count), 0);
  for (int t = 0; t < t_count; ++t) {
    for (int k = 0; k < k_count; ++k) {
      const std::int64_t n = std::int64_t(rng.next_u64() % 50);
      counts.n_tk(std::size_t(t), std::size_t(k)) = n;
      counts.n_t[std::size_t(t)] += n;
    }
  }
  return counts;
}

// A T-period dataset whose current z splits every period evenly between
// the two types, so the data term of the gradient vanishes at flat logits.
struct BalancedFixture {
  SurveyDataset data;
  ModelConfig config;
  ChainState state;
};

BalancedFixture balanced_fixture(int t_count) {
  std::vector<std::vector<std::int32_t>> rows;
  std::vector<std::int32_t> labels;
  for (int t = 1; t <= t_count; ++t) {
    for (int m = 0; m < 4; ++m) {
      rows.push_back({std::int32_t(m % 2 + 1)});
      labels.push_back(std::int32_t(t));
    }
  }
  BalancedFixture fx{
      testfix::make_dataset(rows, labels, {2}, Mode::Dynamic), {}, {}};
  fx.config = make_default_config(fx.data, 2);
  fx.state = init_state(fx.data, fx.config, RngStream(1, 0));
  for (std::size_t i = 0; i < fx.state.z.size(); ++i) {
    fx.state.z[i] = std::int32_t(i % 2 + 1);
  }
  fx.state.sigma2 = {0.25, 0.25};
  return fx;
}

}  // namespace

TEST_CASE("gradient vanishes on a flat path with balanced counts") {
  BalancedFixture fx = balanced_fixture(5);
  const PeriodCounts counts = period_counts(fx.state, fx.data, Exec::serial);
  for (int t = 1; t <= 5; ++t) {
    for (int k = 1; k <= 2; ++k) {
      CHECK(sgld_gradient(fx.state, t, k, counts) == 0.0);
    }
  }
}

TEST_CASE("gradient matches central finite differences") {
  RngStream rng(31, 0);
  const int t_count = 6;
  const int k_count = 3;
  int checked = 0;
  for (int rep = 0; rep < 40; ++rep) {
    ChainState state = random_dynamic_state(t_count, k_count, rng);
    const PeriodCounts counts = random_counts(t_count, k_count, rng);
    // Interior plus both boundaries.
    for (const int t : {1, 2 + int(rng.next_u64() % 4), t_count}) {
      const int k = 1 + int(rng.next_u64() % k_count);
      const double analytic = sgld_gradient(state, t, k, counts);
      const double numeric = central_difference(state, counts, t, k, 1e-5);
      const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      CHECK(std::abs(analytic - numeric) / scale <= 1e-6);
      ++checked;
    }
  }
  CHECK(checked == 120);
}

TEST_CASE("empty period reduces the gradient to the smoothing terms") {
  RngStream rng(32, 0);
  ChainState state = random_dynamic_state(4, 2, rng);
  PeriodCounts counts;
  counts.n_tk = Matrix<std::int64_t>(4, 2, 0);
  counts.n_t.assign(4, 0);
  const double s2 = state.sigma2[0];
  const double expected =
      -(state.pi_tilde(1, 0) - state.pi_tilde(0, 0)) / s2 +
      (state.pi_tilde(2, 0) - state.pi_tilde(1, 0)) / s2;
  CHECK(sgld_gradient(state, 2, 1, counts) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("gradient rejects out-of-range indices and bad sigma") {
  RngStream rng(33, 0);
  ChainState state = random_dynamic_state(3, 2, rng);
  const PeriodCounts counts = random_counts(3, 2, rng);
  CHECK_THROWS_AS((void)sgld_gradient(state, 0, 1, counts), std::invalid_argument);
  CHECK_THROWS_AS((void)sgld_gradient(state, 4, 1, counts), std::invalid_argument);
  state.sigma2[0] = 0.0;
  CHECK_THROWS_AS((void)sgld_gradient(state, 1, 1, counts), std::runtime_error);
}

TEST_CASE("step size schedule: value and monotonicity") {
  const SgldSchedule schedule;  // a=0.01, b=1, c=0.5
  CHECK(schedule.epsilon(1) == 0.01 * std::pow(2.0, -0.5));
  CHECK(schedule.epsilon(1) == doctest::Approx(0.007071067811865475).epsilon(1e-14));
  for (std::uint64_t r = 1; r < 2000; ++r) {
    CHECK(schedule.epsilon(r + 1) < schedule.epsilon(r));
  }
}

TEST_CASE("with zero gradient the SGLD increments are pure noise of variance eps") {
  BalancedFixture fx = balanced_fixture(8);
  const std::uint64_t r = 5;
  const double eps = fx.config.schedule.epsilon(r);

  std::vector<double> increments;
  const int calls = 2000;
  for (int rep = 0; rep < calls; ++rep) {
    ChainState state = fx.state;  // fresh copy, gradient is exactly zero
    step_pi_tilde_sgld(state, fx.data, fx.config, r,
                       RngStream(900, std::uint64_t(rep)), Exec::serial);
    for (std::size_t idx = 0; idx < state.pi_tilde.data().size(); ++idx) {
      increments.push_back(state.pi_tilde.data()[idx] -
                           fx.state.pi_tilde.data()[idx]);
    }
  }
  const double v = testutil::sample_variance(increments);
  const double se = eps * std::sqrt(2.0 / double(increments.size() - 1));
  CHECK(std::abs(testutil::mean(increments)) <
        3.0 * std::sqrt(eps / double(increments.size())));
  CHECK(std::abs(v - eps) < 3.0 * se);
}

TEST_CASE("pi rows stay on the simplex after every SGLD update") {
  BalancedFixture fx = balanced_fixture(6);
  const RngStream rng(34, 0);
  for (std::uint64_t r = 1; r <= 200; ++r) {
    step_pi_tilde_sgld(fx.state, fx.data, fx.config, r, rng, Exec::serial);
    for (std::size_t t = 0; t < fx.state.pi.rows(); ++t) {
      double total = 0.0;
      for (const double p : fx.state.pi.row(t)) {
        CHECK(p > 0.0);
        total += p;
      }
      CHECK(std::abs(total - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("step_sigma: constant path draws from InverseGamma(v0+T, s0)") {
  BalancedFixture fx = balanced_fixture(4);
  fx.config.v0 = 3.0;
  fx.config.s0 = 2.0;
  // Flat path: every increment zero, so the scale stays s0.
  for (double& x : fx.state.pi_tilde.data()) x = 0.7;

  const int sweeps = 100000;
  std::vector<double> draws;
  draws.reserve(std::size_t(sweeps));
  const RngStream rng(35, 0);
  for (int sweep = 1; sweep <= sweeps; ++sweep) {
    step_sigma(fx.state, fx.config, rng, std::uint64_t(sweep));
    draws.push_back(fx.state.sigma2[0]);
  }
  // IG(7, 2): mean 2/6, variance 4/(36*5).
  const double m = 2.0 / 6.0;
  const double sd = std::sqrt(4.0 / 36.0 / 5.0);
  CHECK(std::abs(testutil::mean(draws) - m) < 3.0 * sd / std::sqrt(double(sweeps)));
}

TEST_CASE("step_sigma: a single unit jump adds one to the scale") {
  BalancedFixture fx = balanced_fixture(4);
  fx.config.v0 = 3.0;
  fx.config.s0 = 2.0;
  for (std::size_t t = 0; t < 4; ++t) {
    const double level = t >= 2 ? 1.0 : 0.0;  // one jump of size 1
    for (std::size_t k = 0; k < 2; ++k) fx.state.pi_tilde(t, k) = level;
  }
  const int sweeps = 100000;
  std::vector<double> draws;
  draws.reserve(std::size_t(sweeps));
  const RngStream rng(36, 0);
  for (int sweep = 1; sweep <= sweeps; ++sweep) {
    step_sigma(fx.state, fx.config, rng, std::uint64_t(sweep));
    draws.push_back(fx.state.sigma2[1]);
  }
  // IG(7, 3): mean 3/6 = 0.5.
  const double sd = std::sqrt(9.0 / 36.0 / 5.0);
  CHECK(std::abs(testutil::mean(draws) - 0.5) < 3.0 * sd / std::sqrt(double(sweeps)));
}

TEST_CASE("T=1 dynamic chain agrees with a single-group static chain") {
  // Same data interpreted both ways; beta posterior means must agree.
  const TrueParams truth = random_static_params(1, 2, {3, 3}, RngStream(40, 0));
  const SurveyDataset static_data = simulate_static(truth, {400}, RngStream(40, 1));
  SurveyDataset dynamic_data = static_data;
  dynamic_data.mode = Mode::Dynamic;

  ModelConfig static_config = make_default_config(static_data, 2);
  static_config.iterations = 4000;
  static_config.burn_in = 1000;
  static_config.thin = 3;
  const PosteriorDraws static_draws =
      run_gibbs(static_data, static_config, RngStream(40, 2));

  ModelConfig dynamic_config = make_default_config(dynamic_data, 2);
  dynamic_config.iterations = 6000;
  dynamic_config.burn_in = 2000;
  dynamic_config.thin = 4;
  const PosteriorDraws dynamic_draws =
      run_dynamic(dynamic_data, dynamic_config, RngStream(40, 3));

  const PointEstimates se = summarize(static_draws);
  const PointEstimates de = summarize(dynamic_draws);
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t idx = 0; idx < se.beta_mean[j].data().size(); ++idx) {
      CHECK(std::abs(se.beta_mean[j].data()[idx] - de.beta_mean[j].data()[idx]) <
            0.03);
    }
  }
}

TEST_CASE("two-regime switch is recovered with the correct ordering") {
  const int reps = 3;
  int correct = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const std::uint64_t base = 100 + 8 * std::uint64_t(rep);
    TrueParams truth;
    truth.mode = Mode::Dynamic;
    truth.k = 2;
    truth.beta = random_anchored_beta(2, {4, 4, 4, 4}, RngStream(41, base));
    const int t_count = 8;
    truth.pi_tilde = MatD(t_count, 2);
    for (int t = 0; t < t_count; ++t) {
      const double high = t < t_count / 2 ? 0.55 : -0.55;
      truth.pi_tilde(std::size_t(t), 0) = high;
      truth.pi_tilde(std::size_t(t), 1) = -high;
    }
    truth.pi = MatD(t_count, 2);
    for (int t = 0; t < t_count; ++t) {
      softmax_into(truth.pi_tilde.row(std::size_t(t)), truth.pi.row(std::size_t(t)));
    }
    truth.sigma2 = {0.1, 0.1};
    const SurveyDataset data = simulate_from(
        truth, std::vector<int>(t_count, 250), RngStream(41, base + 1));

    ModelConfig config = make_default_config(data, 2);
    config.iterations = 3000;
    config.burn_in = 1000;
    config.thin = 5;
    const PosteriorDraws draws = run_dynamic(data, config, RngStream(41, base + 2));
    const SeriesBand series = type_proportion_series(draws);

    double first = 0.0, second = 0.0;
    for (int t = 0; t < t_count; ++t) {
      (t < t_count / 2 ? first : second) += series.mean(std::size_t(t), 0);
    }
    if (first > second) ++correct;
  }
  CHECK(correct == reps);
}

TEST_CASE("run_dynamic is deterministic and keeps invariants") {
  BalancedFixture fx = balanced_fixture(4);
  ModelConfig config = fx.config;
  config.iterations = 200;
  config.burn_in = 100;
  config.thin = 5;
  SgldDiagnostics diag;
  const PosteriorDraws a = run_dynamic(fx.data, config, RngStream(42, 0),
                                       Exec::serial, &diag);
  const PosteriorDraws b = run_dynamic(fx.data, config, RngStream(42, 0));
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t s = 0; s < a.snapshots.size(); ++s) {
    CHECK(a.snapshots[s].state.pi_tilde == b.snapshots[s].state.pi_tilde);
    CHECK(a.snapshots[s].state.z == b.snapshots[s].state.z);
    CHECK(a.snapshots[s].state.sigma2 == b.snapshots[s].state.sigma2);
    a.snapshots[s].state.check_invariants();
  }
  // Diagnostics carry one row per iteration with decreasing step sizes.
  CHECK(diag.iteration.size() == 200);
  for (std::size_t r = 1; r < diag.epsilon.size(); ++r) {
    CHECK(diag.epsilon[r] < diag.epsilon[r - 1]);
    CHECK(diag.noise_var[r] == diag.epsilon[r]);
  }
}

TEST_CASE("with no data the sampled paths keep prior increment statistics") {
  // Empty dataset: the conditional is the random-walk prior alone.
  SurveyDataset empty;
  empty.mode = Mode::Dynamic;
  const int t_count = 40;
  empty.n_labels = t_count;
  for (int t = 1; t <= t_count; ++t) empty.label_names.push_back(std::to_string(t));
  QuestionMeta meta;
  meta.name = "q1";
  meta.n_categories = 2;
  meta.category_labels = {"1", "2"};
  empty.questions.push_back(meta);
  empty.responses = MatI(0, 1);

  ModelConfig config;
  config.mode = Mode::Dynamic;
  config.k = 1;
  config.eta.push_back(MatD(1, 2, 1.0));

  const double sigma2 = 0.09;
  const int reps = 30;
  double mean_var = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    ChainState state;
    state.pi_tilde = random_walk_logits(t_count, 1, sigma2, RngStream(43, std::uint64_t(rep)));
    state.pi = MatD(t_count, 1, 1.0);
    state.sigma2 = {sigma2};
    const RngStream rng(44, std::uint64_t(rep));
    for (std::uint64_t r = 1; r <= 20000; ++r) {
      step_pi_tilde_sgld(state, empty, config, r, rng, Exec::serial);
    }
    std::vector<double> increments;
    for (int t = 1; t < t_count; ++t) {
      increments.push_back(state.pi_tilde(std::size_t(t), 0) -
                           state.pi_tilde(std::size_t(t - 1), 0));
    }
    mean_var += testutil::sample_variance(increments);
  }
  mean_var /= reps;
  // SE of the mean sample variance across reps, plus slack for the
  // unadjusted-Langevin discretization bias.
  const double se = sigma2 * std::sqrt(2.0 / double(t_count - 2)) / std::sqrt(double(reps));
  CHECK(std::abs(mean_var - sigma2) < 3.0 * se + 0.005);
}
