#include "tracelab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace tracelab {

SpectrumSummary SpectrumSummary::from_values(Vector values) {
  std::sort(values.data(), values.data() + values.size(), std::greater<double>());
  return SpectrumSummary{std::move(values)};
}

SpectrumSummary SpectrumSummary::from_matrix(const Matrix& A) {
  if (A.rows() != A.cols()) throw DimensionError("spectrum: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
  return from_values(es.eigenvalues());
}

namespace {

Vector mapped(const SpectrumSummary& spec, const SpectralFunction& f) {
  Vector out(spec.size());
  for (Index i = 0; i < spec.size(); ++i) out(i) = f(spec.eigvals(i));
  return out;
}

// sum f^2 - (sum f)^2 / n, computed around the mean for accuracy.
double centered_energy(const Vector& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().sum();
}

// Squared eigenvalues beyond the k largest in magnitude.
double tail_energy(const SpectrumSummary& spec, Index k) {
  std::vector<double> sq(static_cast<std::size_t>(spec.size()));
  for (Index i = 0; i < spec.size(); ++i) sq[i] = spec.eigvals(i) * spec.eigvals(i);
  std::sort(sq.begin(), sq.end(), std::greater<double>());
  double tail = 0.0;
  for (std::size_t i = static_cast<std::size_t>(std::min(k, spec.size())); i < sq.size(); ++i) tail += sq[i];
  return tail;
}

}  // namespace

double bolt_variance_closed_form(const SpectrumSummary& spec, const SpectralFunction& f, Index b) {
  const Index n = spec.size();
  if (b < 1 || b > n) throw DimensionError("variance: block size must lie in [1, n]");
  if (n == 1) return 0.0;
  const double nd = static_cast<double>(n), bd = static_cast<double>(b);
  const double block_factor = 1.0 - (bd - 1.0) / (nd - 1.0);
  return 2.0 * nd / (bd * (nd + 2.0)) * block_factor * centered_energy(mapped(spec, f));
}

ScalarProbeMoments orthonormal_covariance(const SpectrumSummary& spec, const SpectralFunction& f) {
  const Index n = spec.size();
  if (n < 2) throw DimensionError("orthonormal_covariance: need n >= 2");
  const double nd = static_cast<double>(n);
  ScalarProbeMoments out;
  // 2/(n(n+2)) sum f^2 - 2/(n^2(n+2)) (sum f)^2
  out.variance = 2.0 / (nd * (nd + 2.0)) * centered_energy(mapped(spec, f));
  out.covariance = -out.variance / (nd - 1.0);
  return out;
}

double hutchpp_variance_lower_bound(const SpectrumSummary& spec, Index m) {
  if (m < 3) throw DimensionError("hutchpp bound: need m >= 3");
  return 6.0 / static_cast<double>(m) * tail_energy(spec, m / 3);
}

double variance_ratio(const SpectrumSummary& spec, Index b, Index m) {
  const Index n = spec.size();
  if (b < 1 || b > n) throw DimensionError("variance ratio: block size must lie in [1, n]");
  if (m < 3) throw DimensionError("variance ratio: need m >= 3");
  const double tail = tail_energy(spec, m / 3);
  if (tail <= 0.0) return std::numeric_limits<double>::infinity();
  if (n == 1) return 0.0;
  const double nd = static_cast<double>(n), bd = static_cast<double>(b), md = static_cast<double>(m);
  return md * nd / (3.0 * bd * (nd + 2.0)) * (1.0 - (bd - 1.0) / (nd - 1.0)) *
         centered_energy(spec.eigvals) / tail;
}

double hoeffding_epsilon(double l_min, double l_max, Index q, double delta) {
  if (q < 1) throw DimensionError("hoeffding: q must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("hoeffding: delta must lie in (0, 1)", delta);
  if (l_max < l_min) throw DomainError("hoeffding: l_max below l_min", l_max);
  return (l_max - l_min) * std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(q)));
}

}  // namespace tracelab
