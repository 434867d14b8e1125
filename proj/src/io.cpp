#include "surveymix/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace surveymix {

using nlohmann::json;

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

MatD mat_from_json(const json& doc) {
  const std::size_t rows = doc.at("rows").get<std::size_t>();
  const std::size_t cols = doc.at("cols").get<std::size_t>();
  MatD m(rows, cols);
  m.data() = doc.at("data").get<std::vector<double>>();
  if (m.data().size() != rows * cols) {
    throw std::runtime_error("matrix json: size mismatch");
  }
  return m;
}

json mat_to_json(const MatD& m) {
  json doc;
  doc["rows"] = m.rows();
  doc["cols"] = m.cols();
  doc["data"] = m.data();
  return doc;
}

void open_or_throw(std::ofstream& out, const std::filesystem::path& p) {
  out.open(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json config_to_json(const ModelConfig& config) {
  json doc;
  doc["mode"] = config.mode == Mode::Static ? "static" : "dynamic";
  doc["k"] = config.k;
  doc["alpha"] = mat_to_json(config.alpha);
  doc["eta"] = json::array();
  for (const MatD& e : config.eta) doc["eta"].push_back(mat_to_json(e));
  doc["v0"] = config.v0;
  doc["s0"] = config.s0;
  doc["schedule"] = {{"a", config.schedule.a},
                     {"b", config.schedule.b},
                     {"c", config.schedule.c}};
  doc["iterations"] = config.iterations;
  doc["burn_in"] = config.burn_in;
  doc["thin"] = config.thin;
  return doc;
}

ModelConfig config_from_json(const json& doc) {
  ModelConfig config;
  config.mode = doc.at("mode").get<std::string>() == "dynamic" ? Mode::Dynamic
                                                               : Mode::Static;
  config.k = doc.at("k").get<int>();
  config.alpha = mat_from_json(doc.at("alpha"));
  for (const auto& e : doc.at("eta")) config.eta.push_back(mat_from_json(e));
  config.v0 = doc.at("v0").get<double>();
  config.s0 = doc.at("s0").get<double>();
  config.schedule.a = doc.at("schedule").at("a").get<double>();
  config.schedule.b = doc.at("schedule").at("b").get<double>();
  config.schedule.c = doc.at("schedule").at("c").get<double>();
  config.iterations = doc.at("iterations").get<std::uint32_t>();
  config.burn_in = doc.at("burn_in").get<std::uint32_t>();
  config.thin = doc.at("thin").get<std::uint32_t>();
  return config;
}

void write_draws(const PosteriorDraws& draws, const std::filesystem::path& dir) {
  if (draws.snapshots.empty()) {
    throw std::invalid_argument("write_draws: no snapshots");
  }
  std::filesystem::create_directories(dir);
  const auto& first = draws.snapshots.front().state;
  const std::size_t k_count = first.pi.cols();
  const std::size_t n = first.z.size();

  json meta;
  meta["mode"] = draws.mode == Mode::Static ? "static" : "dynamic";
  meta["seed"] = draws.seed;
  meta["stream_id"] = draws.stream_id;
  meta["snapshots"] = draws.snapshots.size();
  meta["config"] = config_to_json(draws.config);
  write_json(meta, dir / "meta.json");

  {
    std::ofstream out;
    open_or_throw(out, dir / "loglik.csv");
    out << "snapshot,iteration,loglik\n";
    for (std::size_t s = 0; s < draws.snapshots.size(); ++s) {
      out << s << "," << draws.snapshots[s].iteration << ","
          << format_double(draws.snapshots[s].loglik) << "\n";
    }
  }
  {
    std::ofstream out;
    open_or_throw(out, dir / "pi.csv");
    out << "snapshot,iteration";
    for (std::size_t g = 0; g < first.pi.rows(); ++g) {
      for (std::size_t k = 0; k < k_count; ++k) {
        out << ",pi_" << (g + 1) << "_" << (k + 1);
      }
    }
    out << "\n";
    for (std::size_t s = 0; s < draws.snapshots.size(); ++s) {
      out << s << "," << draws.snapshots[s].iteration;
      for (const double x : draws.snapshots[s].state.pi.data()) {
        out << "," << format_double(x);
      }
      out << "\n";
    }
  }
  for (std::size_t j = 0; j < first.beta.size(); ++j) {
    std::ofstream out;
    open_or_throw(out, dir / ("beta_q" + std::to_string(j + 1) + ".csv"));
    out << "snapshot,iteration";
    for (std::size_t k = 0; k < first.beta[j].rows(); ++k) {
      for (std::size_t v = 0; v < first.beta[j].cols(); ++v) {
        out << ",beta_" << (k + 1) << "_" << (v + 1);
      }
    }
    out << "\n";
    for (std::size_t s = 0; s < draws.snapshots.size(); ++s) {
      out << s << "," << draws.snapshots[s].iteration;
      for (const double x : draws.snapshots[s].state.beta[j].data()) {
        out << "," << format_double(x);
      }
      out << "\n";
    }
  }
  {
    std::ofstream out;
    open_or_throw(out, dir / "z.csv");
    out << "snapshot,iteration";
    for (std::size_t i = 0; i < n; ++i) out << ",z_" << (i + 1);
    out << "\n";
    for (std::size_t s = 0; s < draws.snapshots.size(); ++s) {
      out << s << "," << draws.snapshots[s].iteration;
      for (const std::int32_t z : draws.snapshots[s].state.z) out << "," << z;
      out << "\n";
    }
  }
  if (draws.mode == Mode::Dynamic) {
    std::ofstream out;
    open_or_throw(out, dir / "sigma2.csv");
    out << "snapshot,iteration";
    for (std::size_t k = 0; k < k_count; ++k) out << ",sigma2_" << (k + 1);
    out << "\n";
    for (std::size_t s = 0; s < draws.snapshots.size(); ++s) {
      out << s << "," << draws.snapshots[s].iteration;
      for (const double x : draws.snapshots[s].state.sigma2) {
        out << "," << format_double(x);
      }
      out << "\n";
    }
    std::ofstream outp;
    open_or_throw(outp, dir / "pi_tilde.csv");
    outp << "snapshot,iteration";
    for (std::size_t t = 0; t < first.pi_tilde.rows(); ++t) {
      for (std::size_t k = 0; k < k_count; ++k) {
        outp << ",pi_tilde_" << (t + 1) << "_" << (k + 1);
      }
    }
    outp << "\n";
    for (std::size_t s = 0; s < draws.snapshots.size(); ++s) {
      outp << s << "," << draws.snapshots[s].iteration;
      for (const double x : draws.snapshots[s].state.pi_tilde.data()) {
        outp << "," << format_double(x);
      }
      outp << "\n";
    }
  }
}

PosteriorDraws read_draws(const std::filesystem::path& dir) {
  const json meta = read_json(dir / "meta.json");
  PosteriorDraws draws;
  draws.mode = meta.at("mode").get<std::string>() == "dynamic" ? Mode::Dynamic
                                                               : Mode::Static;
  draws.seed = meta.at("seed").get<std::uint64_t>();
  draws.stream_id = meta.at("stream_id").get<std::uint64_t>();
  draws.config = config_from_json(meta.at("config"));
  const std::size_t s_count = meta.at("snapshots").get<std::size_t>();
  draws.snapshots.resize(s_count);

  auto read_block = [&](const std::string& file, auto&& handler) {
    std::ifstream in(dir / file);
    if (!in) throw std::runtime_error("read_draws: missing " + (dir / file).string());
    std::string line;
    std::getline(in, line);  // header
    std::size_t s = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (s >= s_count) throw std::runtime_error("read_draws: extra rows in " + file);
      const auto fields = split_line(line);
      draws.snapshots[s].iteration = std::uint32_t(std::stoul(fields.at(1)));
      handler(s, fields);
      ++s;
    }
    if (s != s_count) throw std::runtime_error("read_draws: short file " + file);
  };

  read_block("loglik.csv", [&](std::size_t s, const std::vector<std::string>& f) {
    draws.snapshots[s].loglik = std::stod(f.at(2));
  });

  const int k_count = draws.config.k;
  read_block("pi.csv", [&](std::size_t s, const std::vector<std::string>& f) {
    const std::size_t values = f.size() - 2;
    const std::size_t rows = values / std::size_t(k_count);
    MatD pi(rows, std::size_t(k_count));
    for (std::size_t idx = 0; idx < values; ++idx) {
      pi.data()[idx] = std::stod(f[idx + 2]);
    }
    draws.snapshots[s].state.pi = std::move(pi);
  });

  for (std::size_t j = 0;; ++j) {
    const auto file = dir / ("beta_q" + std::to_string(j + 1) + ".csv");
    if (!std::filesystem::exists(file)) break;
    read_block("beta_q" + std::to_string(j + 1) + ".csv",
               [&](std::size_t s, const std::vector<std::string>& f) {
                 const std::size_t values = f.size() - 2;
                 MatD b(std::size_t(k_count), values / std::size_t(k_count));
                 for (std::size_t idx = 0; idx < values; ++idx) {
                   b.data()[idx] = std::stod(f[idx + 2]);
                 }
                 if (draws.snapshots[s].state.beta.size() <= j) {
                   draws.snapshots[s].state.beta.resize(j + 1);
                 }
                 draws.snapshots[s].state.beta[j] = std::move(b);
               });
  }

  read_block("z.csv", [&](std::size_t s, const std::vector<std::string>& f) {
    auto& z = draws.snapshots[s].state.z;
    z.resize(f.size() - 2);
    for (std::size_t i = 0; i + 2 < f.size(); ++i) {
      z[i] = std::int32_t(std::stol(f[i + 2]));
    }
  });

  if (draws.mode == Mode::Dynamic) {
    read_block("sigma2.csv", [&](std::size_t s, const std::vector<std::string>& f) {
      auto& sig = draws.snapshots[s].state.sigma2;
      sig.resize(f.size() - 2);
      for (std::size_t k = 0; k + 2 < f.size(); ++k) sig[k] = std::stod(f[k + 2]);
    });
    read_block("pi_tilde.csv", [&](std::size_t s, const std::vector<std::string>& f) {
      const std::size_t values = f.size() - 2;
      const std::size_t rows = values / std::size_t(k_count);
      MatD pt(rows, std::size_t(k_count));
      for (std::size_t idx = 0; idx < values; ++idx) {
        pt.data()[idx] = std::stod(f[idx + 2]);
      }
      draws.snapshots[s].state.pi_tilde = std::move(pt);
    });
  }
  return draws;
}

void write_sgld_diagnostics(const SgldDiagnostics& diag,
                            const std::filesystem::path& path) {
  std::ofstream out;
  open_or_throw(out, path);
  const std::size_t t_count = diag.drift.empty() ? 0 : diag.drift.front().size();
  out << "iteration,epsilon,grad_rms,noise_var";
  for (std::size_t t = 0; t < t_count; ++t) out << ",drift_t" << (t + 1);
  out << "\n";
  for (std::size_t r = 0; r < diag.iteration.size(); ++r) {
    out << diag.iteration[r] << "," << format_double(diag.epsilon[r]) << ","
        << format_double(diag.grad_rms[r]) << ","
        << format_double(diag.noise_var[r]);
    for (const double d : diag.drift[r]) out << "," << format_double(d);
    out << "\n";
  }
}

json estimates_to_json(const PointEstimates& est) {
  json doc;
  doc["level"] = est.level;
  doc["pi_mean"] = mat_to_json(est.pi_mean);
  doc["pi_lo"] = mat_to_json(est.pi_lo);
  doc["pi_hi"] = mat_to_json(est.pi_hi);
  doc["beta_mean"] = json::array();
  doc["beta_lo"] = json::array();
  doc["beta_hi"] = json::array();
  for (std::size_t j = 0; j < est.beta_mean.size(); ++j) {
    doc["beta_mean"].push_back(mat_to_json(est.beta_mean[j]));
    doc["beta_lo"].push_back(mat_to_json(est.beta_lo[j]));
    doc["beta_hi"].push_back(mat_to_json(est.beta_hi[j]));
  }
  return doc;
}

json selection_to_json(const SelectionReport& report) {
  json doc;
  doc["k_max_counting"] = report.k_max_counting;
  doc["eigenvalues"] = report.eigenvalues;
  doc["k_scree"] = report.k_scree;
  json bic = json::object();
  for (const auto& [k, value] : report.bic_by_k) {
    bic[std::to_string(k)] = value;
  }
  doc["bic_by_k"] = bic;
  doc["recommended_k"] = report.recommended_k;
  return doc;
}

void write_json(const json& doc, const std::filesystem::path& path) {
  std::ofstream out;
  open_or_throw(out, path);
  out << doc.dump(2) << "\n";
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("fnv1a_file: cannot open " + path.string());
  std::uint64_t hash = 0xCBF29CE484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= std::uint64_t(std::uint8_t(buf[i]));
      hash *= 0x100000001B3ull;
    }
  }
  return hash;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace surveymix
