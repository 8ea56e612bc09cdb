#pragma once

#include "csv_table.hpp"
#include "json.hpp"
#include "tracelab/common.hpp"
#include "tracelab/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace tracelab::cli {

using Json = nlohmann::ordered_json;

// Invalid experiment name, parameter values or output location. Maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  int threads = 1;
  Json params = Json::object();  // fully resolved after resolve_params
};

struct NamedTable {
  std::string file;
  Table table;
};

struct NamedFigure {
  std::string file;
  std::string svg;
};

struct ExperimentResult {
  Table table;                     // <experiment>.csv
  std::string svg;                 // <experiment>.svg
  std::vector<NamedTable> extra_tables;
  std::vector<NamedFigure> extra_figures;
  Json summary = Json::object();
  std::uint64_t matvecs = 0;
  std::uint64_t entries = 0;
};

struct ExperimentInfo {
  std::string name;
  std::string description;
  Json defaults;
  std::function<ExperimentResult(const RunConfig&)> run;
};

const std::vector<ExperimentInfo>& experiments();
const ExperimentInfo& find_experiment(const std::string& name);

// Defaults overlaid with `overrides`; unknown keys and type mismatches raise ConfigError.
Json resolve_params(const ExperimentInfo& info, const Json& overrides);

// Resolves the parameters and runs the experiment. The result depends on the configuration but
// not on the thread count.
ExperimentResult run_experiment(RunConfig& config);

Json make_manifest(const RunConfig& config, const ExperimentResult& result);
RunConfig config_from_manifest(const Json& manifest);

// Writes <experiment>.csv, <experiment>.svg, any extra artifacts and manifest.json.
void write_artifacts(const RunConfig& config, const ExperimentResult& result,
                     const std::filesystem::path& out_dir);

// Shared helpers, also used by the acceptance suite.
Matrix random_spd(Index n, RngStream& stream, double lo = 0.5, double hi = 2.0);
Matrix rbf_kernel(Index n, double sigma);
Matrix osc_kernel(Index n, double ell, double nu);
double median(std::vector<double> values);
double quantile(std::vector<double> values, double p);

}  // namespace tracelab::cli
