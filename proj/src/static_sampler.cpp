#include "surveymix/static_sampler.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "surveymix/distributions.hpp"
#include "surveymix/selection.hpp"

namespace surveymix {

namespace {

std::vector<MatD> log_of(const std::vector<MatD>& mats) {
  std::vector<MatD> out;
  out.reserve(mats.size());
  for (const MatD& m : mats) {
    MatD lm(m.rows(), m.cols());
    for (std::size_t idx = 0; idx < m.data().size(); ++idx) {
      lm.data()[idx] = std::log(m.data()[idx]);
    }
    out.push_back(std::move(lm));
  }
  return out;
}

MatD log_of(const MatD& m) {
  MatD lm(m.rows(), m.cols());
  for (std::size_t idx = 0; idx < m.data().size(); ++idx) {
    lm.data()[idx] = std::log(m.data()[idx]);
  }
  return lm;
}

}  // namespace

SiteLayout site_layout(const SurveyDataset& data, int k) {
  SiteLayout layout;
  layout.n = std::uint32_t(data.n_respondents());
  layout.jk = std::uint32_t(data.n_questions()) * std::uint32_t(k);
  const std::uint64_t top = std::uint64_t(layout.n) + layout.jk +
                            std::uint64_t(data.n_labels) * std::uint64_t(k) +
                            std::uint64_t(k);
  if (top > std::uint64_t(std::numeric_limits<std::uint32_t>::max())) {
    throw std::invalid_argument("site_layout: problem too large for 32-bit site ids");
  }
  return layout;
}

AssignmentCounts tally_counts(const ChainState& state,
                              const SurveyDataset& data, Exec exec) {
  const int n = data.n_respondents();
  const int j_count = data.n_questions();
  const int k_count = int(state.pi.cols());
  const int g_count = data.n_labels;

  AssignmentCounts counts;
  counts.grp = Matrix<std::int64_t>(std::size_t(g_count), std::size_t(k_count), 0);
  for (int j = 1; j <= j_count; ++j) {
    counts.resp.emplace_back(std::size_t(k_count),
                             std::size_t(data.n_categories(j)), 0);
  }

  auto accumulate = [&](AssignmentCounts& acc, int i) {
    const int k0 = state.z[std::size_t(i)] - 1;
    ++acc.grp(std::size_t(data.labels[std::size_t(i)] - 1), std::size_t(k0));
    for (int j = 0; j < j_count; ++j) {
      const std::int32_t v = data.responses(std::size_t(i), std::size_t(j));
      if (v == kMissing) continue;
      ++acc.resp[std::size_t(j)](std::size_t(k0), std::size_t(v - 1));
    }
  };

#ifdef _OPENMP
  if (exec == Exec::parallel && max_threads() > 1) {
#pragma omp parallel
    {
      AssignmentCounts local;
      local.grp = Matrix<std::int64_t>(std::size_t(g_count), std::size_t(k_count), 0);
      for (int j = 1; j <= j_count; ++j) {
        local.resp.emplace_back(std::size_t(k_count),
                                std::size_t(data.n_categories(j)), 0);
      }
#pragma omp for schedule(static) nowait
      for (int i = 0; i < n; ++i) accumulate(local, i);
#pragma omp critical(surveymix_tally)
      {
        for (std::size_t idx = 0; idx < counts.grp.data().size(); ++idx) {
          counts.grp.data()[idx] += local.grp.data()[idx];
        }
        for (int j = 0; j < j_count; ++j) {
          auto& dst = counts.resp[std::size_t(j)].data();
          const auto& src = local.resp[std::size_t(j)].data();
          for (std::size_t idx = 0; idx < dst.size(); ++idx) dst[idx] += src[idx];
        }
      }
    }
    return counts;
  }
#else
  (void)exec;
#endif
  for (int i = 0; i < n; ++i) accumulate(counts, i);
  return counts;
}

ChainState init_state(const SurveyDataset& data, const ModelConfig& config,
                      const RngStream& rng) {
  config.validate(data);
  const int n = data.n_respondents();
  const int k = config.k;
  const SiteLayout layout = site_layout(data, k);

  ChainState state;
  state.z.resize(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    RngStream site = rng.at(unit_id(0, layout.site_z(std::uint32_t(i))));
    state.z[std::size_t(i)] = 1 + int(site.next_u64() % std::uint64_t(k));
  }

  for (int j = 1; j <= data.n_questions(); ++j) {
    const MatD& eta = config.eta[std::size_t(j - 1)];
    MatD beta(std::size_t(k), std::size_t(data.n_categories(j)));
    for (int t = 0; t < k; ++t) {
      RngStream site = rng.at(unit_id(
          0, layout.site_beta(std::uint32_t(j - 1), std::uint32_t(t),
                              std::uint32_t(k))));
      const auto row = sample_dirichlet(eta.row(std::size_t(t)), site);
      for (int v = 0; v < int(row.size()); ++v) beta(std::size_t(t), std::size_t(v)) = row[std::size_t(v)];
    }
    state.beta.push_back(std::move(beta));
  }

  if (config.mode == Mode::Static) {
    state.pi = MatD(std::size_t(data.n_labels), std::size_t(k));
    for (int g = 0; g < data.n_labels; ++g) {
      RngStream site = rng.at(unit_id(0, layout.site_mix(std::uint32_t(g))));
      const auto row = sample_dirichlet(config.alpha.row(std::size_t(g)), site);
      for (int t = 0; t < k; ++t) state.pi(std::size_t(g), std::size_t(t)) = row[std::size_t(t)];
    }
  } else {
    // Logit paths start flat (uniform mixtures); variances from the prior.
    const int t_count = data.n_labels;
    state.pi_tilde = MatD(std::size_t(t_count), std::size_t(k), 0.0);
    state.pi = MatD(std::size_t(t_count), std::size_t(k), 1.0 / double(k));
    state.sigma2.resize(std::size_t(k));
    const std::uint32_t tk = std::uint32_t(t_count) * std::uint32_t(k);
    for (int t = 0; t < k; ++t) {
      RngStream site = rng.at(unit_id(0, layout.site_sigma(tk, std::uint32_t(t))));
      state.sigma2[std::size_t(t)] = sample_inverse_gamma(config.v0, config.s0, site);
    }
  }
  return state;
}

void step_z(ChainState& state, const SurveyDataset& data, const RngStream& rng,
            std::uint64_t sweep, Exec exec) {
  const int n = data.n_respondents();
  const int j_count = data.n_questions();
  const int k_count = int(state.pi.cols());
  const SiteLayout layout = site_layout(data, k_count);

  const MatD log_pi = log_of(state.pi);
  const std::vector<MatD> log_beta = log_of(state.beta);

  auto resample = [&](int i) {
    const int g0 = data.labels[std::size_t(i)] - 1;
    std::vector<double> logw(static_cast<std::size_t>(k_count));
    for (int t = 0; t < k_count; ++t) {
      double w = log_pi(std::size_t(g0), std::size_t(t));
      for (int j = 0; j < j_count; ++j) {
        const std::int32_t v = data.responses(std::size_t(i), std::size_t(j));
        if (v == kMissing) continue;
        w += log_beta[std::size_t(j)](std::size_t(t), std::size_t(v - 1));
      }
      logw[std::size_t(t)] = w;
    }
    RngStream site = rng.at(unit_id(sweep, layout.site_z(std::uint32_t(i))));
    try {
      state.z[std::size_t(i)] = sample_categorical_log(logw, site);
    } catch (const std::runtime_error&) {
      throw std::runtime_error(
          "step_z: all type weights underflow for respondent " +
          std::to_string(i + 1));
    }
  };

#ifdef _OPENMP
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) resample(i);
    return;
  }
#else
  (void)exec;
#endif
  for (int i = 0; i < n; ++i) resample(i);
}

void step_beta(ChainState& state, const SurveyDataset& data,
               const ModelConfig& config, const RngStream& rng,
               std::uint64_t sweep, Exec exec) {
  const int j_count = data.n_questions();
  const int k_count = config.k;
  const SiteLayout layout = site_layout(data, k_count);
  const AssignmentCounts counts = tally_counts(state, data, exec);

  auto draw_row = [&](int jk) {
    const int j0 = jk / k_count;
    const int t = jk % k_count;
    const MatD& eta = config.eta[std::size_t(j0)];
    const int l = int(eta.cols());
    std::vector<double> post(static_cast<std::size_t>(l));
    for (int v = 0; v < l; ++v) {
      post[std::size_t(v)] =
          eta(std::size_t(t), std::size_t(v)) +
          double(counts.resp[std::size_t(j0)](std::size_t(t), std::size_t(v)));
    }
    RngStream site = rng.at(unit_id(
        sweep, layout.site_beta(std::uint32_t(j0), std::uint32_t(t),
                                std::uint32_t(k_count))));
    const auto row = sample_dirichlet(post, site);
    for (int v = 0; v < l; ++v) {
      state.beta[std::size_t(j0)](std::size_t(t), std::size_t(v)) = row[std::size_t(v)];
    }
  };

  const int total = j_count * k_count;
#ifdef _OPENMP
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int jk = 0; jk < total; ++jk) draw_row(jk);
    return;
  }
#endif
  for (int jk = 0; jk < total; ++jk) draw_row(jk);
}

void step_pi(ChainState& state, const SurveyDataset& data,
             const ModelConfig& config, const RngStream& rng,
             std::uint64_t sweep, Exec exec) {
  if (config.mode != Mode::Static) {
    throw std::invalid_argument("step_pi: static mode only");
  }
  const int g_count = data.n_labels;
  const int k_count = config.k;
  const SiteLayout layout = site_layout(data, k_count);
  const AssignmentCounts counts = tally_counts(state, data, exec);

  auto draw_row = [&](int g) {
    std::vector<double> post(static_cast<std::size_t>(k_count));
    for (int t = 0; t < k_count; ++t) {
      post[std::size_t(t)] = config.alpha(std::size_t(g), std::size_t(t)) +
                             double(counts.grp(std::size_t(g), std::size_t(t)));
    }
    RngStream site = rng.at(unit_id(sweep, layout.site_mix(std::uint32_t(g))));
    const auto row = sample_dirichlet(post, site);
    for (int t = 0; t < k_count; ++t) {
      state.pi(std::size_t(g), std::size_t(t)) = row[std::size_t(t)];
    }
  };

#ifdef _OPENMP
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int g = 0; g < g_count; ++g) draw_row(g);
    return;
  }
#endif
  for (int g = 0; g < g_count; ++g) draw_row(g);
}

PosteriorDraws run_gibbs(const SurveyDataset& data, const ModelConfig& config,
                         const RngStream& rng, Exec exec) {
  if (config.mode != Mode::Static) {
    throw std::invalid_argument("run_gibbs: static mode only");
  }
  config.validate(data);

  PosteriorDraws draws;
  draws.mode = Mode::Static;
  draws.config = config;
  draws.seed = rng.seed();
  draws.stream_id = rng.stream_id();

  ChainState state = init_state(data, config, rng);
  for (std::uint32_t sweep = 1; sweep <= config.iterations; ++sweep) {
    try {
      step_z(state, data, rng, sweep, exec);
      step_beta(state, data, config, rng, sweep, exec);
      step_pi(state, data, config, rng, sweep, exec);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_gibbs: iteration " + std::to_string(sweep) +
                               ": " + e.what());
    }
    if (sweep > config.burn_in && (sweep - config.burn_in) % config.thin == 0) {
      Snapshot snap;
      snap.iteration = sweep;
      snap.loglik = observed_loglik(data, state.beta, state.pi, nullptr, exec);
      snap.state = state;
      draws.snapshots.push_back(std::move(snap));
    }
  }
  return draws;
}

}  // namespace surveymix
