#include "experiments.hpp"

#include "runners.hpp"
#include "tracelab/linop.hpp"
#include "tracelab/probes.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tracelab::cli {

// ---------------------------------------------------------------------------------------------
// Parameter reading

namespace {

std::string describe(const Json& v) { return v.dump(); }

}  // namespace

std::int64_t ParamReader::integer(const std::string& key, std::int64_t min, std::int64_t max) {
  const Json& v = params_.at(key);
  if (!v.is_number_integer()) {
    require(false, key, "expected an integer, got " + describe(v));
    return min;
  }
  const auto x = v.get<std::int64_t>();
  require(x >= min && x <= max, key,
          "must lie in [" + std::to_string(min) + ", " +
              (max == std::numeric_limits<std::int64_t>::max() ? std::string("inf") : std::to_string(max)) +
              "], got " + std::to_string(x));
  return std::clamp(x, min, max);
}

double ParamReader::real(const std::string& key, double min, double max, bool min_exclusive) {
  const Json& v = params_.at(key);
  if (!v.is_number()) {
    require(false, key, "expected a number, got " + describe(v));
    return min_exclusive ? 1.0 : min;
  }
  const double x = v.get<double>();
  const bool ok = std::isfinite(x) && (min_exclusive ? x > min : x >= min) && x <= max;
  require(ok, key, std::string("must be ") + (min_exclusive ? "> " : ">= ") + describe(Json(min)) +
                       (std::isfinite(max) ? " and <= " + describe(Json(max)) : std::string()) +
                       ", got " + describe(v));
  return ok ? x : (min_exclusive ? min + 1.0 : min);
}

std::vector<std::int64_t> ParamReader::integers(const std::string& key, std::int64_t min,
                                                std::int64_t max) {
  const Json& v = params_.at(key);
  std::vector<std::int64_t> out;
  if (!v.is_array() || v.empty()) {
    require(false, key, "expected a non-empty list of integers");
    return out;
  }
  for (const Json& e : v) {
    if (!e.is_number_integer()) {
      require(false, key, "expected integers, got " + describe(e));
      continue;
    }
    const auto x = e.get<std::int64_t>();
    if (x < min || x > max) {
      require(false, key, "entry " + std::to_string(x) + " is out of range");
      continue;
    }
    out.push_back(x);
  }
  return out;
}

std::vector<double> ParamReader::reals(const std::string& key, double min, bool min_exclusive) {
  const Json& v = params_.at(key);
  std::vector<double> out;
  if (!v.is_array() || v.empty()) {
    require(false, key, "expected a non-empty list of numbers");
    return out;
  }
  for (const Json& e : v) {
    const bool ok = e.is_number() && std::isfinite(e.get<double>()) &&
                    (min_exclusive ? e.get<double>() > min : e.get<double>() >= min);
    if (!ok) {
      require(false, key, "entry " + describe(e) + " is out of range");
      continue;
    }
    out.push_back(e.get<double>());
  }
  return out;
}

void ParamReader::require(bool ok, const std::string& key, const std::string& why) {
  if (!ok) problems_.push_back(key + ": " + why);
}

void ParamReader::finish() const {
  if (problems_.empty()) return;
  std::string msg = "invalid parameters";
  for (const auto& p : problems_) msg += "\n  " + p;
  throw ConfigError(msg);
}

// ---------------------------------------------------------------------------------------------
// Registry

const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> registry = {
      {"convergence", "KL relative error vs matvec budget for Hutchinson, BOLT and Hutch++",
       Json{{"n", 200}, {"sigma", 2.0}, {"shift1", 0.1}, {"shift2", 0.2},
            {"budgets", {60, 120, 240, 480, 960}}, {"k", 10}, {"reps", 20}},
       run_convergence},
      {"flat-spectrum", "BOLT vs Hutch++ absolute errors on tr(D^2), D = diag(Unif[1,2])",
       Json{{"n", 1000}, {"trials", 150}, {"budgets", {18, 36, 72, 144, 288, 576}}},
       run_flat_spectrum},
      {"trace-recovery", "Subblock trace of a Gram matrix vs sampling ratio",
       Json{{"m", 2048}, {"n", 1000000}, {"s", 64}, {"blocks", 1562}}, run_trace_recovery},
      {"localization", "Chebyshev filter localization residual vs buffer radius",
       Json{{"n", 100}, {"bandwidth", 1}, {"degree", 8}, {"s", 8}, {"trials", 100}, {"r_max", 10}},
       run_localization},
      {"wishart", "Subblock full-rank probability and scaled minimum eigenvalue law",
       Json{{"n", 200}, {"m", 50}, {"s_max", 100}, {"s_step", 5}, {"trials", 1000}, {"draws", 10000},
            {"hist_m", 50}, {"bins", 60}},
       run_wishart},
      {"hodlr", "Peeled HODLR builds of an oscillatory kernel, with proxy-KL certification",
       Json{{"n", 256}, {"ell", 0.03}, {"nu", 2.0}, {"levels", {1, 2}}, {"ranks", {1}},
            {"oversample", 8}, {"power_iterations", 1}, {"t", 64}, {"s", 32}, {"q", 1}, {"k", 4},
            {"b", 8}},
       run_hodlr},
      {"variance-check", "Closed-form vs empirical BOLT variance",
       Json{{"n", {12}}, {"b", {2, 4, 8}}, {"draws", 20000}}, run_variance_check},
      {"w2-demo", "W2 estimates vs the dense oracle",
       Json{{"n_small", 8}, {"n", 200}, {"sigma1", 0.01}, {"shift1", 0.1}, {"sigma2", 2.0},
            {"shift2", 0.0}, {"b", 100}, {"k", 2}, {"q", 5}, {"reps", 30}},
       run_w2_demo},
      {"kl-demo", "KL estimates vs the dense oracle",
       Json{{"n_small", 8}, {"n", 200}, {"sigma", 2.0}, {"shift1", 0.1}, {"shift2", 0.2},
            {"budgets", {60, 120, 240, 480, 960}}, {"k", 10}, {"reps", 20}},
       run_kl_demo},
  };
  return registry;
}

const ExperimentInfo& find_experiment(const std::string& name) {
  for (const auto& e : experiments())
    if (e.name == name) return e;
  std::string known;
  for (const auto& e : experiments()) known += (known.empty() ? "" : ", ") + e.name;
  throw ConfigError("unknown experiment '" + name + "' (known: " + known + ")");
}

Json resolve_params(const ExperimentInfo& info, const Json& overrides) {
  Json out = info.defaults;
  if (overrides.is_null()) return out;
  if (!overrides.is_object()) throw ConfigError("params: expected an object");
  std::vector<std::string> problems;
  for (const auto& [key, value] : overrides.items()) {
    if (!out.contains(key)) {
      problems.push_back(key + ": unknown parameter for " + info.name);
      continue;
    }
    const Json& def = out.at(key);
    const bool compatible = (def.is_number() && value.is_number()) ||
                            (def.is_array() && value.is_array()) ||
                            (def.is_string() && value.is_string());
    if (!compatible) {
      problems.push_back(key + ": expected " + std::string(def.type_name()) + ", got " + value.dump());
      continue;
    }
    out[key] = value;
  }
  if (!problems.empty()) {
    std::string msg = "invalid parameters";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  return out;
}

ExperimentResult run_experiment(RunConfig& config) {
  const ExperimentInfo& info = find_experiment(config.experiment);
  if (config.threads < 1) throw ConfigError("threads: must be >= 1");
  config.params = resolve_params(info, config.params);
  return info.run(config);
}

// ---------------------------------------------------------------------------------------------
// Artifacts

Json make_manifest(const RunConfig& config, const ExperimentResult& result) {
  Json outputs = Json::array({config.experiment + ".csv", config.experiment + ".svg"});
  for (const auto& t : result.extra_tables) outputs.push_back(t.file);
  for (const auto& f : result.extra_figures) outputs.push_back(f.file);
  outputs.push_back("manifest.json");
  return Json{
      {"experiment", config.experiment},
      {"seed", config.seed},
      {"threads", config.threads},
      {"params", config.params},
      {"counters", {{"matvecs", result.matvecs}, {"entries", result.entries}}},
      {"versions",
       {{"tracelab", TRACELAB_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", __VERSION__},
        {"cxx", __cplusplus}}},
      {"outputs", outputs},
      {"summary", result.summary},
  };
}

RunConfig config_from_manifest(const Json& manifest) {
  try {
    RunConfig c;
    c.experiment = manifest.at("experiment").get<std::string>();
    c.seed = manifest.at("seed").get<std::uint64_t>();
    c.threads = manifest.value("threads", 1);
    c.params = manifest.at("params");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << content;
  os.flush();
  if (!os) throw ConfigError("failed while writing " + path.string());
}

}  // namespace

void write_artifacts(const RunConfig& config, const ExperimentResult& result,
                     const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw ConfigError("output directory " + out_dir.string() + " is not writable");
  write_file(out_dir / (config.experiment + ".csv"), result.table.str());
  write_file(out_dir / (config.experiment + ".svg"), result.svg);
  for (const auto& t : result.extra_tables) write_file(out_dir / t.file, t.table.str());
  for (const auto& f : result.extra_figures) write_file(out_dir / f.file, f.svg);
  write_file(out_dir / "manifest.json", make_manifest(config, result).dump(2) + "\n");
}

// ---------------------------------------------------------------------------------------------
// Helpers

Matrix random_spd(Index n, RngStream& stream, double lo, double hi) {
  const Matrix Q = orthonormalize(draw_block(n, n, ProbeDistribution::gaussian, stream));
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = lo + (hi - lo) * stream.uniform();
  Matrix A = Q * d.asDiagonal() * Q.transpose();
  return 0.5 * (A + A.transpose());
}

Matrix rbf_kernel(Index n, double sigma) {
  return KernelSpec{equispaced_grid(n), RbfKernel{sigma}}.kernel_matrix();
}

Matrix osc_kernel(Index n, double ell, double nu) {
  return KernelSpec{equispaced_grid(n), OscExpKernel{ell, nu}}.kernel_matrix();
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

}  // namespace tracelab::cli
