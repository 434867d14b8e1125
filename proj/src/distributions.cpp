#include "surveymix/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace surveymix {

double sample_gamma(double shape, RngStream& rng) {
  if (!(shape > 0.0)) {
    throw std::invalid_argument("sample_gamma: shape must be > 0");
  }
  if (shape < 1.0) {
    const double g = sample_gamma(shape + 1.0, rng);
    return g * std::pow(rng.uniform01(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform01();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::vector<double> sample_dirichlet(std::span<const double> alpha,
                                     RngStream& rng) {
  if (alpha.empty()) {
    throw std::invalid_argument("sample_dirichlet: empty alpha");
  }
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (std::size_t v = 0; v < alpha.size(); ++v) {
    if (!(alpha[v] > 0.0)) {
      throw std::invalid_argument(
          "sample_dirichlet: alpha entries must be > 0");
    }
    // Floor keeps every coordinate strictly positive even when a tiny
    // shape parameter underflows the Gamma draw.
    out[v] = std::max(sample_gamma(alpha[v], rng),
                      std::numeric_limits<double>::min());
    total += out[v];
  }
  for (double& x : out) x /= total;
  return out;
}

int sample_categorical(std::span<const double> weights, RngStream& rng) {
  if (weights.empty()) {
    throw std::invalid_argument("sample_categorical: empty weights");
  }
  double total = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0)) {
      throw std::invalid_argument(
          "sample_categorical: weights must be non-negative");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("sample_categorical: all weights are zero");
  }
  const double u = rng.uniform01() * total;
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] > 0.0) last_positive = int(k) + 1;
    acc += weights[k];
    if (u <= acc && weights[k] > 0.0) return int(k) + 1;
  }
  return last_positive;  // rounding slack at the top of the CDF
}

int sample_categorical_log(std::span<const double> log_weights,
                           RngStream& rng) {
  double m = -std::numeric_limits<double>::infinity();
  for (const double lw : log_weights) m = std::max(m, lw);
  if (!(m > -std::numeric_limits<double>::infinity())) {
    throw std::runtime_error(
        "sample_categorical_log: all weights underflow to zero");
  }
  std::vector<double> w(log_weights.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] = std::exp(log_weights[k] - m);
  }
  return sample_categorical(w, rng);
}

double sample_inverse_gamma(double shape, double scale, RngStream& rng) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw std::invalid_argument(
        "sample_inverse_gamma: shape and scale must be > 0");
  }
  const double g = std::max(sample_gamma(shape, rng),
                            std::numeric_limits<double>::min());
  return scale / g;
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
  if (logits.empty() || logits.size() != out.size()) {
    throw std::invalid_argument("softmax: bad sizes");
  }
  double m = -std::numeric_limits<double>::infinity();
  for (const double x : logits) {
    if (std::isnan(x)) throw std::invalid_argument("softmax: NaN input");
    m = std::max(m, x);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - m);
    total += out[k];
  }
  for (std::size_t k = 0; k < logits.size(); ++k) out[k] /= total;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  softmax_into(logits, out);
  return out;
}

}  // namespace surveymix
