#pragma once

#include "tracelab/common.hpp"
#include "tracelab/linop.hpp"
#include "tracelab/probes.hpp"
#include "tracelab/rng.hpp"
#include "tracelab/spectral_function.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace tracelab {

enum class BlockStatus { ok, clamped, singular };

struct EstimateFlags {
  bool clamped_nodes = false;
  bool early_breakdown = false;
};

struct TraceEstimate {
  double value = 0.0;
  // Scaled per-sample estimates; value is their mean.
  std::vector<double> per_sample_values;
  Index q_effective = 0;
  std::uint64_t matvecs_used = 0;
  std::uint64_t entries_used = 0;
  EstimateFlags flags;
  // Subblock estimators only: status of each sampled block.
  std::vector<BlockStatus> block_status;

  double sample_variance() const;
  double standard_error() const;
};

// Hutchinson SLQ: q normalized Rademacher probes, k scalar Lanczos steps each.
TraceEstimate hutchinson_slq(const LinearOperator& op, const SpectralFunction& f, Index q, Index k,
                             const RngStream& stream, int threads = 1);

struct BoltOptions {
  Index q = 1;
  Index k = 10;
  Index b = 1;
  ProbeDistribution dist = ProbeDistribution::gaussian;
  int threads = 1;
};

// Block-orthonormal SLQ. Sample i is X(V_i) = (n/b) sum_j w_ij f(mu_ij). When b = n the probe
// block is the identity, so the estimate is deterministic.
TraceEstimate bolt(const LinearOperator& op, const SpectralFunction& f, const BoltOptions& opts,
                   const RngStream& stream);

// Hutch++ with m total probes: floor(m/3) sketch columns, floor(m/3) residual probes. f-actions use
// k-step Lanczos unless f is the identity.
TraceEstimate hutchpp(const LinearOperator& op, const SpectralFunction& f, Index m, Index k,
                      const RngStream& stream);

// (n/s) tr(A_S) from s diagonal reads.
double subblock_trace(const LinearOperator& op, const IndexSet& S);

enum class SubsetPolicy { independent, disjoint };

struct SubblockOptions {
  Index q = 1;
  Index t = 1;
  Index s = 1;
  Index b = 1;
  std::optional<Index> k;     // Lanczos steps, defaults to s
  std::optional<double> eps;  // support threshold, defaults to 1e-10 * max_i A_ii
  // Skip the diagonal scan and take every index as supported.
  bool assume_full_support = false;
  SubsetPolicy policy = SubsetPolicy::independent;
  // Blocks whose quadrature leaves the domain of f are recorded as singular and excluded
  // instead of aborting the estimate.
  bool tolerate_singular_blocks = false;
  ProbeDistribution dist = ProbeDistribution::gaussian;
  int threads = 1;
};

// Unified subblock SLQ over principal subblocks of the supported index set.
TraceEstimate subblock_slq(const OperatorHandle& op, const SpectralFunction& f,
                           const SubblockOptions& opts, const RngStream& stream);

// --- closed forms ---------------------------------------------------------------------------

struct SpectrumSummary {
  Vector eigvals;  // sorted decreasing

  static SpectrumSummary from_values(Vector values);
  static SpectrumSummary from_matrix(const Matrix& A);
  Index size() const { return eigvals.size(); }
};

double bolt_variance_closed_form(const SpectrumSummary& spec, const SpectralFunction& f, Index b);

struct ScalarProbeMoments {
  double variance = 0.0;    // Var[v^T f(A) v] for v uniform on the unit sphere
  double covariance = 0.0;  // Cov between two columns of a Haar orthonormal block
};
ScalarProbeMoments orthonormal_covariance(const SpectrumSummary& spec, const SpectralFunction& f);

// (6/m) sum_{i>k} lambda_i^2 with k = floor(m/3).
double hutchpp_variance_lower_bound(const SpectrumSummary& spec, Index m);

// Upper bound on Var[BOLT]/Var[Hutch++]; +infinity when the tail energy vanishes.
double variance_ratio(const SpectrumSummary& spec, Index b, Index m);

double hoeffding_epsilon(double l_min, double l_max, Index q, double delta);

}  // namespace tracelab
