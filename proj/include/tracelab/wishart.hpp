#pragma once

#include "tracelab/common.hpp"
#include "tracelab/index_set.hpp"
#include "tracelab/rng.hpp"

#include <vector>

namespace tracelab {

struct WishartSample {
  Matrix sigma_tilde;  // sum_i u_i u_i^T
  Matrix factor;       // n x m, columns u_i
  Index m = 0;
};

// u_i = R^T g_i with Sigma = R^T R and g_i standard normal.
WishartSample sample_wishart(const Matrix& Sigma, Index m, RngStream& stream);

// True when the s x m factor rows Y_S have full row rank s, i.e. Sigma_tilde_S = Y_S Y_S^T is
// invertible. Rank is decided on the singular values of Y_S with the usual floating point
// tolerance max(s, m) * eps * sigma_max.
bool subblock_full_rank(const Matrix& factor, const IndexSet& S, double* min_eig = nullptr);

struct RankExperiment {
  double fraction = 0.0;          // share of trials with an invertible subblock
  std::vector<double> min_eigs;   // lambda_min(Sigma_tilde_S) per trial
};

// Each trial draws Sigma_tilde with m samples of N(0, Sigma) (identity when Sigma is empty) and a
// uniform subset S of size s.
RankExperiment subblock_rank_experiment(Index n, Index m, Index s, Index trials,
                                        const RngStream& stream, const Matrix& Sigma = Matrix(),
                                        int threads = 1);

// Limit density of m * lambda_min(W(m, m)) and its distribution function.
double min_eig_density(double x);
double min_eig_cdf(double x);

// m * lambda_min of `draws` independent real W(m, m) matrices.
std::vector<double> scaled_min_eigenvalues(Index m, Index draws, const RngStream& stream,
                                           int threads = 1);

// sup_x |F_empirical(x) - F(x)|.
double ks_distance(std::vector<double> sample, double (*cdf)(double));

}  // namespace tracelab
