#pragma once

#include "experiments.hpp"

#include <limits>

namespace tracelab::cli {

// Reads typed parameters and collects every validation problem before reporting them together.
class ParamReader {
 public:
  explicit ParamReader(const Json& params) : params_(params) {}

  std::int64_t integer(const std::string& key, std::int64_t min,
                       std::int64_t max = std::numeric_limits<std::int64_t>::max());
  double real(const std::string& key, double min, double max = std::numeric_limits<double>::infinity(),
              bool min_exclusive = false);
  std::vector<std::int64_t> integers(const std::string& key, std::int64_t min,
                                     std::int64_t max = std::numeric_limits<std::int64_t>::max());
  std::vector<double> reals(const std::string& key, double min, bool min_exclusive = false);

  void require(bool ok, const std::string& key, const std::string& why);
  // Throws ConfigError naming every offending field.
  void finish() const;

 private:
  const Json& params_;
  std::vector<std::string> problems_;
};

ExperimentResult run_convergence(const RunConfig& config);
ExperimentResult run_flat_spectrum(const RunConfig& config);
ExperimentResult run_trace_recovery(const RunConfig& config);
ExperimentResult run_localization(const RunConfig& config);
ExperimentResult run_wishart(const RunConfig& config);
ExperimentResult run_hodlr(const RunConfig& config);
ExperimentResult run_variance_check(const RunConfig& config);
ExperimentResult run_w2_demo(const RunConfig& config);
ExperimentResult run_kl_demo(const RunConfig& config);

}  // namespace tracelab::cli
