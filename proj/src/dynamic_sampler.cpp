#include "surveymix/dynamic_sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "surveymix/distributions.hpp"
#include "surveymix/selection.hpp"

namespace surveymix {

PeriodCounts period_counts(const ChainState& state, const SurveyDataset& data,
                           Exec exec) {
  const AssignmentCounts counts = tally_counts(state, data, exec);
  PeriodCounts out;
  out.n_tk = counts.grp;
  out.n_t.assign(out.n_tk.rows(), 0);
  for (std::size_t t = 0; t < out.n_tk.rows(); ++t) {
    for (std::size_t k = 0; k < out.n_tk.cols(); ++k) {
      out.n_t[t] += out.n_tk(t, k);
    }
  }
  return out;
}

double sgld_gradient(const ChainState& state, int t, int k,
                     const PeriodCounts& counts) {
  const int t_count = int(state.pi_tilde.rows());
  if (t < 1 || t > t_count) throw std::invalid_argument("sgld_gradient: t out of range");
  if (k < 1 || k > int(state.pi_tilde.cols())) {
    throw std::invalid_argument("sgld_gradient: k out of range");
  }
  const double sigma2 = state.sigma2[std::size_t(k - 1)];
  if (!(sigma2 > 0.0)) throw std::runtime_error("sgld_gradient: sigma2 must be > 0");

  const std::size_t t0 = std::size_t(t - 1);
  const std::size_t k0 = std::size_t(k - 1);
  double grad = 0.0;
  if (t > 1) {
    grad -= (state.pi_tilde(t0, k0) - state.pi_tilde(t0 - 1, k0)) / sigma2;
  }
  if (t < t_count) {
    grad += (state.pi_tilde(t0 + 1, k0) - state.pi_tilde(t0, k0)) / sigma2;
  }
  grad += double(counts.n_tk(t0, k0)) -
          double(counts.n_t[t0]) * state.pi(t0, k0);
  return grad;
}

double sgld_gradient(const ChainState& state, int t, int k,
                     const SurveyDataset& data) {
  return sgld_gradient(state, t, k, period_counts(state, data, Exec::serial));
}

void step_pi_tilde_sgld(ChainState& state, const SurveyDataset& data,
                        const ModelConfig& config, std::uint64_t r,
                        const RngStream& rng, Exec exec,
                        SgldDiagnostics* diag) {
  const int t_count = int(state.pi_tilde.rows());
  const int k_count = int(state.pi_tilde.cols());
  const SiteLayout layout = site_layout(data, k_count);
  const PeriodCounts counts = period_counts(state, data, exec);
  const double eps = config.schedule.epsilon(r);

  // Gradients are evaluated at the pre-update state for every (t, k), so
  // the update order (and thread count) cannot matter.
  MatD grad(static_cast<std::size_t>(t_count), static_cast<std::size_t>(k_count));
  for (int t = 1; t <= t_count; ++t) {
    for (int k = 1; k <= k_count; ++k) {
      grad(std::size_t(t - 1), std::size_t(k - 1)) =
          sgld_gradient(state, t, k, counts);
    }
  }

  std::vector<double> drift_t(std::size_t(t_count), 0.0);
  auto update_period = [&](int t0) {
    double drift = 0.0;
    for (int k0 = 0; k0 < k_count; ++k0) {
      RngStream site = rng.at(unit_id(
          r, layout.site_mix(std::uint32_t(t0) * std::uint32_t(k_count) +
                             std::uint32_t(k0))));
      const double delta = 0.5 * eps * grad(std::size_t(t0), std::size_t(k0)) +
                           std::sqrt(eps) * site.normal();
      const double updated = state.pi_tilde(std::size_t(t0), std::size_t(k0)) + delta;
      if (!std::isfinite(updated)) {
        throw std::runtime_error(
            "step_pi_tilde_sgld: non-finite update at (t=" +
            std::to_string(t0 + 1) + ", k=" + std::to_string(k0 + 1) +
            ", r=" + std::to_string(r) + ")");
      }
      state.pi_tilde(std::size_t(t0), std::size_t(k0)) = updated;
      drift += std::abs(delta);
    }
    softmax_into(state.pi_tilde.row(std::size_t(t0)), state.pi.row(std::size_t(t0)));
    drift_t[std::size_t(t0)] = drift / double(k_count);
  };

#ifdef _OPENMP
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int t0 = 0; t0 < t_count; ++t0) update_period(t0);
  } else
#endif
  {
    for (int t0 = 0; t0 < t_count; ++t0) update_period(t0);
  }

  if (diag) {
    double sq = 0.0;
    for (const double g : grad.data()) sq += g * g;
    diag->iteration.push_back(r);
    diag->epsilon.push_back(eps);
    diag->grad_rms.push_back(std::sqrt(sq / double(t_count * k_count)));
    diag->noise_var.push_back(eps);
    diag->drift.push_back(std::move(drift_t));
  }
}

void step_sigma(ChainState& state, const ModelConfig& config,
                const RngStream& rng, std::uint64_t sweep) {
  const int t_count = int(state.pi_tilde.rows());
  const int k_count = int(state.pi_tilde.cols());
  const std::uint32_t tk = std::uint32_t(t_count) * std::uint32_t(k_count);
  // Site layout only needs N and J*K, both recoverable from the state.
  SiteLayout layout;
  layout.n = std::uint32_t(state.z.size());
  layout.jk = std::uint32_t(state.beta.size()) * std::uint32_t(k_count);

  const double v1 = config.v0 + double(t_count);
  for (int k0 = 0; k0 < k_count; ++k0) {
    double ss = 0.0;
    for (int t0 = 1; t0 < t_count; ++t0) {
      const double d = state.pi_tilde(std::size_t(t0), std::size_t(k0)) -
                       state.pi_tilde(std::size_t(t0 - 1), std::size_t(k0));
      ss += d * d;
    }
    RngStream site = rng.at(unit_id(sweep, layout.site_sigma(tk, std::uint32_t(k0))));
    state.sigma2[std::size_t(k0)] =
        sample_inverse_gamma(v1, config.s0 + ss, site);
  }
}

PosteriorDraws run_dynamic(const SurveyDataset& data,
                           const ModelConfig& config, const RngStream& rng,
                           Exec exec, SgldDiagnostics* diag) {
  if (config.mode != Mode::Dynamic) {
    throw std::invalid_argument("run_dynamic: dynamic mode only");
  }
  config.validate(data);

  PosteriorDraws draws;
  draws.mode = Mode::Dynamic;
  draws.config = config;
  draws.seed = rng.seed();
  draws.stream_id = rng.stream_id();

  ChainState state = init_state(data, config, rng);
  for (std::uint32_t sweep = 1; sweep <= config.iterations; ++sweep) {
    try {
      step_z(state, data, rng, sweep, exec);
      step_beta(state, data, config, rng, sweep, exec);
      step_pi_tilde_sgld(state, data, config, sweep, rng, exec, diag);
      step_sigma(state, config, rng, sweep);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_dynamic: iteration " +
                               std::to_string(sweep) + ": " + e.what());
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
