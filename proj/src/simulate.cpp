#include "surveymix/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "surveymix/distributions.hpp"
#include "surveymix/posterior.hpp"
#include "surveymix/static_sampler.hpp"

namespace surveymix {

namespace {

// Substream blocks: truth, data and chain draws of a replication must not
// collide, so each consumes its own stream id offset from the base.
constexpr std::uint64_t kStreamsPerRep = 4;

MatD softmax_rows(const MatD& logits) {
  MatD out(logits.rows(), logits.cols());
  for (std::size_t t = 0; t < logits.rows(); ++t) {
    softmax_into(logits.row(t), out.row(t));
  }
  return out;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("pearson: need two vectors of equal length >= 2");
  }
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<MatD> random_anchored_beta(int k, const std::vector<int>& l,
                                       const RngStream& rng) {
  std::vector<MatD> beta;
  std::vector<double> ones;
  for (std::size_t j = 0; j < l.size(); ++j) {
    const int lj = l[j];
    if (lj < 2) throw std::invalid_argument("random_anchored_beta: L_j >= 2");
    MatD b(static_cast<std::size_t>(k), static_cast<std::size_t>(lj));
    for (int t = 0; t < k; ++t) {
      RngStream site = rng.at(std::uint64_t(j) * std::uint64_t(k) + std::uint64_t(t));
      ones.assign(std::size_t(lj), 1.0);
      auto row = sample_dirichlet(ones, site);
      if (t < lj) {
        const auto max_it = std::max_element(row.begin(), row.end());
        std::swap(*max_it, row[std::size_t(t)]);
      }
      for (int v = 0; v < lj; ++v) b(std::size_t(t), std::size_t(v)) = row[std::size_t(v)];
    }
    beta.push_back(std::move(b));
  }
  return beta;
}

TrueParams random_static_params(int g, int k, const std::vector<int>& l,
                                const RngStream& rng) {
  TrueParams params;
  params.mode = Mode::Static;
  params.k = k;
  params.beta = random_anchored_beta(k, l, rng);
  params.pi = MatD(std::size_t(g), std::size_t(k));
  const std::uint64_t base = l.size() * std::uint64_t(k);
  std::vector<double> ones(std::size_t(k), 1.0);
  for (int row = 0; row < g; ++row) {
    RngStream site = rng.at(base + std::uint64_t(row));
    const auto p = sample_dirichlet(ones, site);
    for (int t = 0; t < k; ++t) params.pi(std::size_t(row), std::size_t(t)) = p[std::size_t(t)];
  }
  return params;
}

MatD random_walk_logits(int t, int k, double sigma2, const RngStream& rng) {
  if (t < 1 || k < 1) throw std::invalid_argument("random_walk_logits: bad shape");
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("random_walk_logits: sigma2 >= 0");
  MatD path(std::size_t(t), std::size_t(k), 0.0);
  const double sd = std::sqrt(sigma2);
  for (int row = 1; row < t; ++row) {
    RngStream site = rng.at(std::uint64_t(row));
    for (int col = 0; col < k; ++col) {
      path(std::size_t(row), std::size_t(col)) =
          path(std::size_t(row - 1), std::size_t(col)) + sd * site.normal();
    }
  }
  return path;
}

SurveyDataset simulate_from(const TrueParams& params,
                            const std::vector<int>& n_per_label,
                            const RngStream& rng, std::uint64_t unit_offset) {
  const int n_labels = int(params.pi.rows());
  if (int(n_per_label.size()) != n_labels) {
    throw std::invalid_argument("simulate_from: need one count per group/period");
  }
  const int j_count = int(params.beta.size());

  SurveyDataset data;
  data.mode = params.mode;
  data.n_labels = n_labels;
  for (int g = 1; g <= n_labels; ++g) data.label_names.push_back(std::to_string(g));
  for (int j = 1; j <= j_count; ++j) {
    QuestionMeta meta;
    meta.name = "q" + std::to_string(j);
    meta.n_categories = int(params.beta[std::size_t(j - 1)].cols());
    for (int v = 1; v <= meta.n_categories; ++v) {
      meta.category_labels.push_back(std::to_string(v));
    }
    meta.missing_policy = MissingPolicy::own_category;
    data.questions.push_back(std::move(meta));
  }

  int n = 0;
  for (const int m : n_per_label) {
    if (m < 1) throw std::invalid_argument("simulate_from: counts must be >= 1");
    n += m;
  }
  data.responses = MatI(std::size_t(n), std::size_t(j_count));
  data.labels.resize(std::size_t(n));

  int i = 0;
  for (int g = 1; g <= n_labels; ++g) {
    for (int m = 0; m < n_per_label[std::size_t(g - 1)]; ++m, ++i) {
      data.labels[std::size_t(i)] = g;
      data.ids.push_back(std::to_string(i + 1));
      RngStream site = rng.at(unit_offset + std::uint64_t(i));
      const int zi = sample_categorical(params.pi.row(std::size_t(g - 1)), site);
      for (int j = 1; j <= j_count; ++j) {
        data.responses(std::size_t(i), std::size_t(j - 1)) = std::int32_t(
            sample_categorical(params.beta[std::size_t(j - 1)].row(std::size_t(zi - 1)), site));
      }
    }
  }
  data.validate();
  return data;
}

SurveyDataset simulate_static(const TrueParams& params,
                              const std::vector<int>& n_per_group,
                              const RngStream& rng) {
  if (params.mode != Mode::Static) {
    throw std::invalid_argument("simulate_static: static params required");
  }
  return simulate_from(params, n_per_group, rng);
}

std::pair<SurveyDataset, TrueParams> simulate_dynamic(
    const TrueParams& params, const std::vector<int>& n_per_period,
    double sigma2_true, const RngStream& rng) {
  TrueParams used = params;
  used.mode = Mode::Dynamic;
  const int t_count = int(n_per_period.size());
  used.pi_tilde = random_walk_logits(t_count, used.k, sigma2_true, rng);
  used.pi = softmax_rows(used.pi_tilde);
  used.sigma2.assign(std::size_t(used.k), sigma2_true);
  // Respondent draw sites sit in a block above the path-noise sites.
  SurveyDataset data =
      simulate_from(used, n_per_period, rng, std::uint64_t(t_count));
  return {std::move(data), std::move(used)};
}

RecoveryDesign identified_design() { return RecoveryDesign{}; }

RecoveryDesign under_identified_design() {
  // Violates the counting rule: bound is 1, yet a 2-type model is fitted.
  RecoveryDesign design;
  design.g = 2;
  design.j = 2;
  design.l = {3, 3};
  design.k = 2;
  return design;
}

RecoveryCurve recovery_experiment(const RecoveryDesign& design,
                                  const std::vector<int>& n_grid, int reps,
                                  const RecoveryOptions& options,
                                  const RngStream& rng, Exec exec) {
  if (reps < 1 || n_grid.empty()) {
    throw std::invalid_argument("recovery_experiment: need reps >= 1 and a grid");
  }
  const int n_max = *std::max_element(n_grid.begin(), n_grid.end());

  Matrix<double> corr(std::size_t(reps), n_grid.size(), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
#endif
  for (int rep = 0; rep < reps; ++rep) {
    const std::uint64_t base = rng.stream_id() + kStreamsPerRep * std::uint64_t(rep);
    const RngStream truth_rng(rng.seed(), base);
    const RngStream data_rng(rng.seed(), base + 1);
    const RngStream chain_rng(rng.seed(), base + 2);

    const TrueParams truth =
        random_static_params(design.g, design.k, design.l, truth_rng);
    const SurveyDataset full =
        simulate_static(truth, std::vector<int>(std::size_t(design.g), n_max / design.g),
                        data_rng);

    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
      const SurveyDataset data = subset_per_label(full, n_grid[ni] / design.g);
      ModelConfig config = make_default_config(data, design.k);
      config.iterations = options.iterations;
      config.burn_in = options.burn_in;
      config.thin = options.thin;
      const PosteriorDraws draws =
          run_gibbs(data, config, chain_rng, Exec::serial);
      const PointEstimates est = summarize(draws);
      corr(std::size_t(rep), ni) =
          pearson(est.beta_mean.front().row(0), truth.beta.front().row(0));
    }
  }

  RecoveryCurve curve;
  curve.n_grid = n_grid;
  for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
    double mean = 0.0;
    for (int rep = 0; rep < reps; ++rep) mean += corr(std::size_t(rep), ni);
    mean /= double(reps);
    double var = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      const double d = corr(std::size_t(rep), ni) - mean;
      var += d * d;
    }
    curve.mean_corr.push_back(mean);
    curve.sd_corr.push_back(reps > 1 ? std::sqrt(var / double(reps - 1)) : 0.0);
  }
  return curve;
}

void write_recovery_csv(const RecoveryCurve& curve,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_recovery_csv: cannot write " + path.string());
  out << "n,mean_corr,sd_corr\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.n_grid.size(); ++i) {
    out << curve.n_grid[i];
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", curve.mean_corr[i],
                  curve.sd_corr[i]);
    out << buf << "\n";
  }
}

}  // namespace surveymix
