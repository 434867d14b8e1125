#pragma once

#include <span>
#include <vector>

#include "surveymix/rng.hpp"

namespace surveymix {

// Gamma(shape, 1) via the Marsaglia-Tsang squeeze; shapes below 1 use the
// usual boost Gamma(shape+1) * U^(1/shape).
double sample_gamma(double shape, RngStream& rng);

// Dirichlet draw as normalized Gamma variates. All alpha entries must be
// strictly positive; the result is positive and sums to 1 within 1e-12.
std::vector<double> sample_dirichlet(std::span<const double> alpha,
                                     RngStream& rng);

// Index in 1..n with probability weights[k-1] / sum(weights). Weights must
// be non-negative and not all zero; they are normalized internally.
int sample_categorical(std::span<const double> weights, RngStream& rng);

// Index in 1..n given unnormalized log weights. Rejects the draw when all
// weights underflow to zero even after max-shifting.
int sample_categorical_log(std::span<const double> log_weights,
                           RngStream& rng);

// InverseGamma(shape, scale): reciprocal of a Gamma(shape, rate=scale)
// variate. Strictly positive.
double sample_inverse_gamma(double shape, double scale, RngStream& rng);

// Numerically safe softmax (max-subtraction). Entries must be finite.
std::vector<double> softmax(std::span<const double> logits);
void softmax_into(std::span<const double> logits, std::span<double> out);

}  // namespace surveymix
