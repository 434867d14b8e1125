#include "surveymix/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace surveymix {

namespace {

// Equal-tailed interval bounds from a scratch copy of the draws.
std::pair<double, double> equal_tailed(std::vector<double>& values,
                                       double level) {
  std::sort(values.begin(), values.end());
  const double tail = 0.5 * (1.0 - level);
  auto quantile = [&](double q) {
    const double pos = q * double(values.size() - 1);
    const std::size_t lo = std::size_t(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double w = pos - double(lo);
    return (1.0 - w) * values[lo] + w * values[hi];
  };
  return {quantile(tail), quantile(1.0 - tail)};
}

}  // namespace

PointEstimates summarize(const PosteriorDraws& draws, double level) {
  if (draws.snapshots.empty()) {
    throw std::invalid_argument("summarize: no posterior draws");
  }
  if (!(level > 0.0) || !(level < 1.0)) {
    throw std::invalid_argument("summarize: level must be in (0, 1)");
  }
  const std::size_t s_count = draws.snapshots.size();
  const auto& first = draws.snapshots.front().state;
  const std::size_t k_count = first.pi.cols();
  const std::size_t n = first.z.size();

  PointEstimates est;
  est.level = level;

  est.pi_mean = MatD(first.pi.rows(), k_count, 0.0);
  est.pi_lo = MatD(first.pi.rows(), k_count, 0.0);
  est.pi_hi = MatD(first.pi.rows(), k_count, 0.0);
  std::vector<double> scratch(s_count);
  for (std::size_t idx = 0; idx < est.pi_mean.data().size(); ++idx) {
    double total = 0.0;
    for (std::size_t s = 0; s < s_count; ++s) {
      scratch[s] = draws.snapshots[s].state.pi.data()[idx];
      total += scratch[s];
    }
    est.pi_mean.data()[idx] = total / double(s_count);
    const auto [lo, hi] = equal_tailed(scratch, level);
    est.pi_lo.data()[idx] = lo;
    est.pi_hi.data()[idx] = hi;
  }

  for (std::size_t j = 0; j < first.beta.size(); ++j) {
    const MatD& b0 = first.beta[j];
    MatD mean(b0.rows(), b0.cols(), 0.0);
    MatD lo(b0.rows(), b0.cols(), 0.0);
    MatD hi(b0.rows(), b0.cols(), 0.0);
    for (std::size_t idx = 0; idx < mean.data().size(); ++idx) {
      double total = 0.0;
      for (std::size_t s = 0; s < s_count; ++s) {
        scratch[s] = draws.snapshots[s].state.beta[j].data()[idx];
        total += scratch[s];
      }
      mean.data()[idx] = total / double(s_count);
      const auto [l, h] = equal_tailed(scratch, level);
      lo.data()[idx] = l;
      hi.data()[idx] = h;
    }
    est.beta_mean.push_back(std::move(mean));
    est.beta_lo.push_back(std::move(lo));
    est.beta_hi.push_back(std::move(hi));
  }

  est.memberships = MatD(n, k_count, 0.0);
  for (std::size_t s = 0; s < s_count; ++s) {
    const auto& z = draws.snapshots[s].state.z;
    for (std::size_t i = 0; i < n; ++i) {
      est.memberships(i, std::size_t(z[i] - 1)) += 1.0;
    }
  }
  for (double& x : est.memberships.data()) x /= double(s_count);
  return est;
}

SeriesBand type_proportion_series(const PosteriorDraws& draws, double level) {
  if (draws.mode != Mode::Dynamic) {
    throw std::invalid_argument(
        "type_proportion_series: requires dynamic-mode draws");
  }
  const PointEstimates est = summarize(draws, level);
  return {est.pi_mean, est.pi_lo, est.pi_hi};
}

double rao_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("rao_distance: length mismatch");
  }
  double bc = 0.0;
  for (std::size_t v = 0; v < p.size(); ++v) {
    bc += std::sqrt(p[v] * q[v]);
  }
  bc = std::clamp(bc, 0.0, 1.0);
  return 2.0 * std::acos(bc);
}

std::vector<std::pair<int, double>> rank_questions_by_divergence(
    const PointEstimates& estimates, int k1, int k2) {
  if (k1 == k2) {
    throw std::invalid_argument("rank_questions_by_divergence: k1 == k2");
  }
  std::vector<std::pair<int, double>> ranked;
  for (std::size_t j = 0; j < estimates.beta_mean.size(); ++j) {
    const MatD& b = estimates.beta_mean[j];
    ranked.emplace_back(int(j) + 1,
                        rao_distance(b.row(std::size_t(k1 - 1)),
                                     b.row(std::size_t(k2 - 1))));
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranked;
}

double compute_ics(std::span<const double> relative_scores) {
  if (relative_scores.size() != 5) {
    throw std::invalid_argument("compute_ics: exactly 5 relative scores required");
  }
  double total = 0.0;
  for (const double x : relative_scores) {
    if (!(x >= 0.0) || !(x <= 200.0)) {
      throw std::invalid_argument("compute_ics: scores must lie in [0, 200]");
    }
    total += std::round(x);
  }
  return total / 6.7558 + 2.0;
}

MatD anchoring_diagnostic(const PosteriorDraws& draws) {
  if (draws.snapshots.empty()) {
    throw std::invalid_argument("anchoring_diagnostic: no posterior draws");
  }
  const MatD& b0 = draws.snapshots.front().state.beta.front();
  const std::size_t k_anchored = std::min(b0.rows(), b0.cols());
  MatD trace(draws.snapshots.size(), k_anchored);
  for (std::size_t s = 0; s < draws.snapshots.size(); ++s) {
    const MatD& b = draws.snapshots[s].state.beta.front();
    for (std::size_t k = 0; k < k_anchored; ++k) {
      trace(s, k) = b(k, k);
    }
  }
  return trace;
}

}  // namespace surveymix
