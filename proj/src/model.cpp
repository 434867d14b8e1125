#include "surveymix/model.hpp"

#include <cmath>
#include <stdexcept>

namespace surveymix {

void ModelConfig::validate(const SurveyDataset& data) const {
  if (mode != data.mode) {
    throw std::invalid_argument("config: mode does not match dataset mode");
  }
  if (k < 1) throw std::invalid_argument("config: K must be >= 1");
  if (iterations == 0 || burn_in >= iterations) {
    throw std::invalid_argument("config: need burn_in < iterations");
  }
  if (thin == 0) throw std::invalid_argument("config: thin must be >= 1");

  if (int(eta.size()) != data.n_questions()) {
    throw std::invalid_argument("config: eta must have one block per question");
  }
  for (int j = 1; j <= data.n_questions(); ++j) {
    const MatD& e = eta[std::size_t(j - 1)];
    if (int(e.rows()) != k || int(e.cols()) != data.n_categories(j)) {
      throw std::invalid_argument("config: eta block " + std::to_string(j) +
                                  " has wrong shape");
    }
    for (const double x : e.data()) {
      if (!(x > 0.0)) throw std::invalid_argument("config: eta entries must be > 0");
    }
  }

  if (mode == Mode::Static) {
    if (int(alpha.rows()) != data.n_labels || int(alpha.cols()) != k) {
      throw std::invalid_argument("config: alpha must be G x K");
    }
    for (const double x : alpha.data()) {
      if (!(x > 0.0)) throw std::invalid_argument("config: alpha entries must be > 0");
    }
  } else {
    if (!(v0 > 0.0) || !(s0 > 0.0)) {
      throw std::invalid_argument("config: v0 and s0 must be > 0");
    }
    if (!(schedule.a > 0.0) || !(schedule.b > 0.0) || !(schedule.c > 0.0) ||
        schedule.c > 1.0) {
      throw std::invalid_argument(
          "config: schedule needs a, b > 0 and c in (0, 1]");
    }
  }
}

void ChainState::check_invariants(double tol) const {
  const int k = int(pi.cols());
  for (const std::int32_t zi : z) {
    if (zi < 1 || zi > k) throw std::runtime_error("state: z out of range");
  }
  auto check_simplex = [&](std::span<const double> row, const char* what) {
    double total = 0.0;
    for (const double x : row) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::runtime_error(std::string("state: ") + what +
                                 " has a negative or non-finite entry");
      }
      total += x;
    }
    if (std::abs(total - 1.0) > tol) {
      throw std::runtime_error(std::string("state: ") + what +
                               " row does not sum to 1");
    }
  };
  for (std::size_t g = 0; g < pi.rows(); ++g) check_simplex(pi.row(g), "pi");
  for (const MatD& b : beta) {
    for (std::size_t r = 0; r < b.rows(); ++r) check_simplex(b.row(r), "beta");
  }
  for (const double s : sigma2) {
    if (!(s > 0.0)) throw std::runtime_error("state: sigma2 must be > 0");
  }
}

PriorSpec default_priors(const SurveyDataset& data, int k, double eta_diag,
                         double alpha_fill) {
  if (k < 1) throw std::invalid_argument("default_priors: K must be >= 1");
  if (!(eta_diag > 0.0) || !(alpha_fill > 0.0)) {
    throw std::invalid_argument("default_priors: hyperparameters must be > 0");
  }
  PriorSpec spec;
  spec.alpha = MatD(std::size_t(data.n_labels), std::size_t(k), alpha_fill);
  for (int j = 1; j <= data.n_questions(); ++j) {
    const int l = data.n_categories(j);
    MatD e(std::size_t(k), std::size_t(l), 1.0);
    for (int t = 1; t <= std::min(k, l); ++t) {
      e(std::size_t(t - 1), std::size_t(t - 1)) = eta_diag;
    }
    if (k > l) {
      spec.warnings.push_back(
          "question '" + data.questions[std::size_t(j - 1)].name + "': only " +
          std::to_string(l) + " of " + std::to_string(k) +
          " types anchored (not enough categories); remaining rows left flat");
    }
    spec.eta.push_back(std::move(e));
  }
  return spec;
}

ModelConfig make_default_config(const SurveyDataset& data, int k) {
  ModelConfig config;
  config.mode = data.mode;
  config.k = k;
  PriorSpec priors = default_priors(data, k);
  config.alpha = std::move(priors.alpha);
  config.eta = std::move(priors.eta);
  return config;
}

}  // namespace surveymix
