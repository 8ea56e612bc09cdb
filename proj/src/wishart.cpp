#include "tracelab/wishart.hpp"

#include "tracelab/parallel.hpp"
#include "tracelab/probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tracelab {

WishartSample sample_wishart(const Matrix& Sigma, Index m, RngStream& stream) {
  if (Sigma.rows() != Sigma.cols() || Sigma.rows() == 0)
    throw DimensionError("sample_wishart: scale matrix must be square");
  if (m < 1) throw DimensionError("sample_wishart: need m >= 1");
  Eigen::LLT<Matrix> llt(0.5 * (Sigma + Sigma.transpose()));
  if (llt.info() != Eigen::Success) throw NumericalError("sample_wishart: scale matrix is not SPD");
  const Index n = Sigma.rows();
  Matrix G(n, m);
  for (Index c = 0; c < m; ++c)
    for (Index i = 0; i < n; ++i) G(i, c) = stream.normal();
  WishartSample w;
  w.m = m;
  w.factor = llt.matrixL() * G;  // R^T = L
  w.sigma_tilde = w.factor * w.factor.transpose();
  return w;
}

bool subblock_full_rank(const Matrix& factor, const IndexSet& S, double* min_eig) {
  const Index s = S.size(), m = factor.cols();
  const Matrix Y = factor(S.indices(), Eigen::all);
  Eigen::JacobiSVD<Matrix> svd(Y);
  const Vector& sv = svd.singularValues();
  const double tol = static_cast<double>(std::max(s, m)) * std::numeric_limits<double>::epsilon() * sv(0);
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  if (min_eig) *min_eig = s <= m ? sv(s - 1) * sv(s - 1) : 0.0;
  return rank == s;
}

RankExperiment subblock_rank_experiment(Index n, Index m, Index s, Index trials,
                                        const RngStream& stream, const Matrix& Sigma, int threads) {
  if (s < 1 || s > n) throw DimensionError("rank experiment: need 1 <= s <= n");
  if (trials < 1) throw DimensionError("rank experiment: need trials >= 1");
  const Matrix scale = Sigma.size() ? Sigma : Matrix(Matrix::Identity(n, n));
  if (scale.rows() != n) throw DimensionError("rank experiment: scale matrix size differs from n");
  std::vector<char> full(static_cast<std::size_t>(trials));
  RankExperiment out;
  out.min_eigs.resize(static_cast<std::size_t>(trials));
  parallel_for(full.size(), threads, [&](std::size_t i) {
    RngStream rs = stream.substream(i);
    const WishartSample w = sample_wishart(scale, m, rs);
    const IndexSet S = sample_index_set(n, s, rs);
    full[i] = subblock_full_rank(w.factor, S, &out.min_eigs[i]) ? 1 : 0;
  });
  out.fraction = static_cast<double>(std::count(full.begin(), full.end(), 1)) / trials;
  return out;
}

double min_eig_density(double x) {
  if (!(x > 0.0)) throw DomainError("min_eig_density: x must be positive", x);
  const double r = std::sqrt(x);
  return (1.0 + r) / (2.0 * r) * std::exp(-(0.5 * x + r));
}

double min_eig_cdf(double x) {
  if (x <= 0.0) return 0.0;
  return 1.0 - std::exp(-(0.5 * x + std::sqrt(x)));
}

std::vector<double> scaled_min_eigenvalues(Index m, Index draws, const RngStream& stream, int threads) {
  if (m < 1 || draws < 1) throw DimensionError("scaled_min_eigenvalues: sizes must be positive");
  std::vector<double> out(static_cast<std::size_t>(draws));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    RngStream rs = stream.substream(i);
    const Matrix G = draw_block(m, m, ProbeDistribution::gaussian, rs);
    Eigen::SelfAdjointEigenSolver<Matrix> es(G * G.transpose(), Eigen::EigenvaluesOnly);
    out[i] = static_cast<double>(m) * es.eigenvalues()(0);
  });
  return out;
}

double ks_distance(std::vector<double> sample, double (*cdf)(double)) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    worst = std::max({worst, std::abs(F - i / n), std::abs((i + 1) / n - F)});
  }
  return worst;
}

}  // namespace tracelab
