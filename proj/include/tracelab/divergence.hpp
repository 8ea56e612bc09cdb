#pragma once

#include "tracelab/common.hpp"
#include "tracelab/estimators.hpp"
#include "tracelab/linop.hpp"

#include <optional>

namespace tracelab {

// Dense oracles for zero-mean Gaussians N(0, Sigma1), N(0, Sigma2).
double kl_exact(const Matrix& Sigma1, const Matrix& Sigma2);
double w2_exact(const Matrix& Sigma1, const Matrix& Sigma2);

// Factor with Sigma = R^T R for a symmetric PSD matrix (pivoted LDL^T, tiny negative pivots
// clamped). Throws NumericalError when the matrix is not PSD.
Matrix psd_root(const Matrix& Sigma);

struct GaussianPair {
  OperatorHandle sigma1;
  OperatorHandle sigma2;
  OperatorHandle precision_factor;  // L with L L^T = Sigma2^{-1}; null when Sigma2 is singular
  Matrix sigma1_root;               // R with Sigma1 = R^T R

  static GaussianPair from_dense(const Matrix& Sigma1, const Matrix& Sigma2);
};

struct KlEstimate {
  double value = 0.0;
  TraceEstimate estimate;  // of tr f(L^T Sigma1 L)
};

// 1/2 tr f(L^T Sigma1 L) with f(x) = x - ln x - 1, estimated by BOLT.
KlEstimate kl_slq(const GaussianPair& pair, const BoltOptions& opts, const RngStream& stream);

struct ProxyKlOptions {
  Index t = 1;
  Index s = 1;
  Index q = 1;
  std::optional<Index> k;  // defaults to s
  Index b = 1;
  // When the operator is a sample covariance built from m samples, s is capped at m.
  std::optional<Index> sample_count;
  bool assume_full_support = false;
  int threads = 1;
};

struct ProxyKlEstimate {
  // Mean of the per-block KL functionals; +infinity when some sampled block is singular.
  double value = 0.0;
  TraceEstimate estimate;  // of tr f over the regular blocks
  Index s_used = 0;
  Index singular_blocks = 0;
  Index clamped_blocks = 0;
};

ProxyKlEstimate proxy_kl(const OperatorHandle& op, const ProxyKlOptions& opts, const RngStream& stream);

struct W2Estimate {
  double value = 0.0;
  double tau = 0.0;
  double trace_term = 0.0;
  TraceEstimate tau_estimate;
};

// tr(Sigma1 + Sigma2) - 2 tr((R Sigma2 R^T)^{1/2}), Sigma1 = R^T R. Sigma2 may be singular.
W2Estimate w2_slq(const GaussianPair& pair, const BoltOptions& opts, const RngStream& stream);

}  // namespace tracelab
