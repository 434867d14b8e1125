#include "surveymix/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "surveymix/dynamic_sampler.hpp"
#include "surveymix/static_sampler.hpp"

namespace surveymix {

int max_identifiable_k(int g, int j, int l) {
  if (g < 1 || j < 1) throw std::invalid_argument("max_identifiable_k: need G, J >= 1");
  if (l <= j) {
    throw std::invalid_argument(
        "max_identifiable_k: need L > J (no free response categories)");
  }
  // G - G(G-1)/(L+G-J) == G(L-J+1)/(L+G-J); integer floor is exact.
  const long long numer = (long long)(g) * (l - j + 1);
  const long long denom = l + g - j;
  const long long bound = numer / denom;
  return int(std::max(1LL, bound));
}

std::vector<double> scree(const FrequencyMatrix& y) {
  const std::size_t g = y.counts.rows();
  if (g == 0) throw std::invalid_argument("scree: empty frequency matrix");
  const std::size_t l = y.counts.cols();

  // Gram matrix Y Y^T.
  MatD a(g, g, 0.0);
  for (std::size_t r = 0; r < g; ++r) {
    for (std::size_t s = r; s < g; ++s) {
      double dot = 0.0;
      for (std::size_t c = 0; c < l; ++c) {
        dot += double(y.counts(r, c)) * double(y.counts(s, c));
      }
      a(r, s) = dot;
      a(s, r) = dot;
    }
  }

  // Cyclic Jacobi sweeps until the off-diagonal mass is negligible.
  double off = 0.0;
  double norm = 0.0;
  for (std::size_t r = 0; r < g; ++r) {
    for (std::size_t s = 0; s < g; ++s) {
      norm += a(r, s) * a(r, s);
      if (r != s) off += a(r, s) * a(r, s);
    }
  }
  const double tol = 1e-24 * std::max(norm, 1e-300);
  for (int sweep = 0; sweep < 100 && off > tol; ++sweep) {
    for (std::size_t p = 0; p + 1 < g; ++p) {
      for (std::size_t q = p + 1; q < g; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < g; ++r) {
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < g; ++r) {
          const double apr = a(p, r);
          const double aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
      }
    }
    off = 0.0;
    for (std::size_t r = 0; r < g; ++r) {
      for (std::size_t s = 0; s < g; ++s) {
        if (r != s) off += a(r, s) * a(r, s);
      }
    }
  }

  std::vector<double> eig(g);
  double scale = 0.0;
  for (std::size_t r = 0; r < g; ++r) {
    eig[r] = a(r, r);
    scale = std::max(scale, std::abs(eig[r]));
  }
  // Gram eigenvalues are non-negative up to rounding.
  for (double& v : eig) {
    if (v < 0.0 && v > -1e-9 * std::max(scale, 1.0)) v = 0.0;
  }
  std::sort(eig.begin(), eig.end(), std::greater<double>());
  return eig;
}

int suggest_k_scree(const std::vector<double>& eigenvalues, double threshold) {
  if (eigenvalues.empty()) {
    throw std::invalid_argument("suggest_k_scree: empty eigenvalue list");
  }
  if (!(threshold > 0.0) || !(threshold < 1.0)) {
    throw std::invalid_argument("suggest_k_scree: threshold must be in (0, 1)");
  }
  double total = 0.0;
  for (const double v : eigenvalues) total += v;
  if (!(total > 0.0)) return 1;
  double acc = 0.0;
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    acc += eigenvalues[k];
    if (acc / total >= threshold) return int(k) + 1;
  }
  return int(eigenvalues.size());
}

double observed_loglik(const SurveyDataset& data,
                       const std::vector<MatD>& beta, const MatD& pi,
                       int* zero_respondent, Exec exec) {
  const int n = data.n_respondents();
  const int j_count = data.n_questions();
  const int k_count = int(pi.cols());
  if (zero_respondent) *zero_respondent = 0;

  std::vector<MatD> log_beta;
  log_beta.reserve(beta.size());
  for (const MatD& b : beta) {
    MatD lb(b.rows(), b.cols());
    for (std::size_t idx = 0; idx < b.data().size(); ++idx) {
      lb.data()[idx] = std::log(b.data()[idx]);
    }
    log_beta.push_back(std::move(lb));
  }

  const double total = deterministic_sum(
      std::size_t(n),
      [&](std::size_t i) {
        const int g0 = data.labels[i] - 1;
        double max_lw = -std::numeric_limits<double>::infinity();
        std::vector<double> lw(static_cast<std::size_t>(k_count));
        for (int t = 0; t < k_count; ++t) {
          double w = std::log(pi(std::size_t(g0), std::size_t(t)));
          for (int j = 0; j < j_count; ++j) {
            const std::int32_t v = data.responses(i, std::size_t(j));
            if (v == kMissing) continue;
            w += log_beta[std::size_t(j)](std::size_t(t), std::size_t(v - 1));
          }
          lw[std::size_t(t)] = w;
          max_lw = std::max(max_lw, w);
        }
        if (!(max_lw > -std::numeric_limits<double>::infinity())) {
          return -std::numeric_limits<double>::infinity();
        }
        double s = 0.0;
        for (const double w : lw) s += std::exp(w - max_lw);
        return max_lw + std::log(s);
      },
      exec);

  if (std::isinf(total) && total < 0.0 && zero_respondent) {
    for (int i = 0; i < n; ++i) {
      const int g0 = data.labels[std::size_t(i)] - 1;
      bool all_zero = true;
      for (int t = 0; t < k_count && all_zero; ++t) {
        double w = std::log(pi(std::size_t(g0), std::size_t(t)));
        for (int j = 0; j < j_count; ++j) {
          const std::int32_t v = data.responses(std::size_t(i), std::size_t(j));
          if (v == kMissing) continue;
          w += log_beta[std::size_t(j)](std::size_t(t), std::size_t(v - 1));
        }
        if (w > -std::numeric_limits<double>::infinity()) all_zero = false;
      }
      if (all_zero) {
        *zero_respondent = i + 1;
        break;
      }
    }
  }
  return total;
}

int free_parameter_count(Mode mode, int k, int n_labels,
                         const std::vector<int>& l) {
  int beta_params = 0;
  for (const int lj : l) beta_params += k * (lj - 1);
  const int mix_params = n_labels * (k - 1);
  const int variance_params = mode == Mode::Dynamic ? k : 0;
  return beta_params + mix_params + variance_params;
}

namespace {

void posterior_mean_params(const PosteriorDraws& draws,
                           std::vector<MatD>& beta_mean, MatD& pi_mean) {
  const auto& first = draws.snapshots.front().state;
  pi_mean = MatD(first.pi.rows(), first.pi.cols(), 0.0);
  beta_mean.clear();
  for (const MatD& b : first.beta) beta_mean.emplace_back(b.rows(), b.cols(), 0.0);

  for (const Snapshot& snap : draws.snapshots) {
    for (std::size_t idx = 0; idx < pi_mean.data().size(); ++idx) {
      pi_mean.data()[idx] += snap.state.pi.data()[idx];
    }
    for (std::size_t j = 0; j < beta_mean.size(); ++j) {
      for (std::size_t idx = 0; idx < beta_mean[j].data().size(); ++idx) {
        beta_mean[j].data()[idx] += snap.state.beta[j].data()[idx];
      }
    }
  }
  const double inv = 1.0 / double(draws.snapshots.size());
  for (double& x : pi_mean.data()) x *= inv;
  for (MatD& b : beta_mean) {
    for (double& x : b.data()) x *= inv;
  }
}

}  // namespace

double bic(const SurveyDataset& data, const PosteriorDraws& draws, int k) {
  if (draws.snapshots.empty()) {
    throw std::invalid_argument("bic: no posterior draws");
  }
  std::vector<MatD> beta_mean;
  MatD pi_mean;
  posterior_mean_params(draws, beta_mean, pi_mean);

  std::vector<int> l;
  for (int j = 1; j <= data.n_questions(); ++j) l.push_back(data.n_categories(j));
  const int p_k = free_parameter_count(draws.mode, k, data.n_labels, l);
  const double ll = observed_loglik(data, beta_mean, pi_mean);
  return -ll + 0.5 * double(p_k) * std::log(double(data.n_respondents()));
}

SelectionReport run_selection(const SurveyDataset& data,
                              const SelectionOptions& options,
                              const RngStream& rng, Exec exec) {
  if (options.k_max < 1) throw std::invalid_argument("run_selection: k_max >= 1");
  SelectionReport report;

  std::vector<int> l;
  for (int j = 1; j <= data.n_questions(); ++j) l.push_back(data.n_categories(j));
  int total_l = 0;
  for (const int lj : l) total_l += lj;
  report.k_max_counting =
      max_identifiable_k(data.n_labels, data.n_questions(), total_l);
  report.eigenvalues = scree(frequency_matrix(data));
  report.k_scree = suggest_k_scree(report.eigenvalues, options.scree_threshold);

  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= options.k_max; ++k) {
    ModelConfig config = make_default_config(data, k);
    PriorSpec priors = default_priors(data, k, options.eta_diag, options.alpha_fill);
    config.alpha = std::move(priors.alpha);
    config.eta = std::move(priors.eta);
    config.iterations = options.iterations;
    config.burn_in = options.burn_in;
    config.thin = options.thin;
    // One stream per candidate K, disjoint by construction.
    const RngStream chain_rng(rng.seed(), rng.stream_id() + std::uint64_t(k));
    const PosteriorDraws draws = data.mode == Mode::Static
                                     ? run_gibbs(data, config, chain_rng, exec)
                                     : run_dynamic(data, config, chain_rng, exec);
    const double value = bic(data, draws, k);
    report.bic_by_k[k] = value;
    if (value < best) {
      best = value;
      report.recommended_k = k;
    }
  }
  return report;
}

}  // namespace surveymix
