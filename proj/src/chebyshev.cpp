#include "tracelab/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <sstream>

namespace tracelab {

namespace {

double to_reference(double x, double lo, double hi) { return (2.0 * x - hi - lo) / (hi - lo); }

}  // namespace

double ChebFilter::operator()(double x) const {
  const double t = to_reference(x, lo, hi);
  double b1 = 0.0, b2 = 0.0;
  for (Index k = degree(); k >= 1; --k) {
    const double b0 = coeffs[k] + 2.0 * t * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return coeffs[0] + t * b1 - b2;
}

double ChebFilter::eval_direct(double x) const {
  const double t = std::clamp(to_reference(x, lo, hi), -1.0, 1.0);
  const double theta = std::acos(t);
  double sum = 0.0;
  for (Index k = 0; k <= degree(); ++k) sum += coeffs[k] * std::cos(static_cast<double>(k) * theta);
  return sum;
}

Matrix ChebFilter::apply_to(const Matrix& A) const {
  const Index n = A.rows();
  if (A.cols() != n) throw DimensionError("apply_to: matrix must be square");
  const Matrix I = Matrix::Identity(n, n);
  const Matrix T = (2.0 * A - (hi + lo) * I) / (hi - lo);
  Matrix b1 = Matrix::Zero(n, n), b2 = Matrix::Zero(n, n);
  for (Index k = degree(); k >= 1; --k) {
    Matrix b0 = coeffs[k] * I + 2.0 * T * b1 - b2;
    b2 = std::move(b1);
    b1 = std::move(b0);
  }
  return coeffs[0] * I + T * b1 - b2;
}

ChebFilter cheb_fit(const SpectralFunction& f, double lam_min, double lam_max, Index m) {
  if (!(lam_min < lam_max)) throw DomainError("cheb_fit: need lam_min < lam_max", lam_min);
  if (m < 0) throw DimensionError("cheb_fit: degree must be nonnegative");
  ChebFilter p;
  p.lo = lam_min;
  p.hi = lam_max;
  const Index N = m + 1;
  std::vector<double> values(static_cast<std::size_t>(N));
  for (Index j = 0; j < N; ++j) {
    const double theta = std::numbers::pi * (j + 0.5) / N;
    const double x = 0.5 * (lam_max + lam_min) + 0.5 * (lam_max - lam_min) * std::cos(theta);
    values[j] = f(x);
    if (!std::isfinite(values[j])) {
      std::ostringstream os;
      os << "cheb_fit: " << f.name << " is not finite at " << x;
      throw DomainError(os.str(), x);
    }
  }
  p.coeffs.assign(static_cast<std::size_t>(N), 0.0);
  for (Index k = 0; k < N; ++k) {
    double sum = 0.0;
    for (Index j = 0; j < N; ++j) sum += values[j] * std::cos(std::numbers::pi * k * (j + 0.5) / N);
    p.coeffs[k] = (k == 0 ? 1.0 : 2.0) * sum / N;
  }
  constexpr Index grid = 10000;
  double worst = 0.0;
  for (Index g = 0; g < grid; ++g) {
    const double x = lam_min + (lam_max - lam_min) * static_cast<double>(g) / (grid - 1);
    const double fx = f(x);
    if (!std::isfinite(fx)) throw DomainError("cheb_fit: f is not finite on the interval", x);
    worst = std::max(worst, std::abs(fx - p(x)));
  }
  p.sup_error = worst;
  return p;
}

std::pair<double, double> gershgorin_interval(const Matrix& A, double padding) {
  if (A.rows() != A.cols() || A.rows() == 0) throw DimensionError("gershgorin: matrix must be square");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Index i = 0; i < A.rows(); ++i) {
    const double radius = A.row(i).cwiseAbs().sum() - std::abs(A(i, i));
    lo = std::min(lo, A(i, i) - radius);
    hi = std::max(hi, A(i, i) + radius);
  }
  double width = hi - lo;
  if (width <= 0.0) width = std::max(std::abs(hi), 1.0);
  return {lo - padding * width, hi + padding * width};
}

SparsityPattern::SparsityPattern(std::vector<std::vector<Index>> adjacency) : adj_(std::move(adjacency)) {
  const Index n = size();
  for (auto& list : adj_) {
    for (Index j : list)
      if (j < 0 || j >= n) throw DimensionError("sparsity pattern: neighbor out of range");
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

SparsityPattern SparsityPattern::from_matrix(const Matrix& A, double tol) {
  if (A.rows() != A.cols()) throw DimensionError("sparsity pattern: matrix must be square");
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(A.rows()));
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j)
      if (i != j && (std::abs(A(i, j)) > tol || std::abs(A(j, i)) > tol)) adj[i].push_back(j);
  return SparsityPattern(std::move(adj));
}

SparsityPattern SparsityPattern::banded(Index n, Index bandwidth) {
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    for (Index j = std::max<Index>(0, i - bandwidth); j <= std::min(n - 1, i + bandwidth); ++j)
      if (j != i) adj[i].push_back(j);
  return SparsityPattern(std::move(adj));
}

IndexSet graph_ball(const SparsityPattern& pattern, const IndexSet& S, Index r) {
  if (r < 0) throw DimensionError("graph_ball: radius must be nonnegative");
  const Index n = pattern.size();
  std::vector<Index> dist(static_cast<std::size_t>(n), -1);
  std::deque<Index> frontier;
  for (Index v : S) {
    if (v >= n) throw DimensionError("graph_ball: index out of range");
    dist[v] = 0;
    frontier.push_back(v);
  }
  while (!frontier.empty()) {
    const Index v = frontier.front();
    frontier.pop_front();
    if (dist[v] == r) continue;
    for (Index w : pattern.neighbors(v))
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        frontier.push_back(w);
      }
  }
  std::vector<Index> ball;
  for (Index v = 0; v < n; ++v)
    if (dist[v] >= 0) ball.push_back(v);
  return IndexSet(std::move(ball));
}

namespace {

std::vector<Index> positions_in(const IndexSet& outer, const IndexSet& inner) {
  std::vector<Index> pos;
  pos.reserve(inner.indices().size());
  for (Index v : inner) pos.push_back(outer.position(v));
  return pos;
}

}  // namespace

LocalizedBlock localized_filter_block(const Matrix& A, const ChebFilter& filter, const IndexSet& S,
                                      Index r) {
  if (A.rows() != A.cols()) throw DimensionError("localized_filter_block: matrix must be square");
  LocalizedBlock out;
  out.buffered = graph_ball(SparsityPattern::from_matrix(A), S, r);
  const Matrix sub = A(out.buffered.indices(), out.buffered.indices());
  const Matrix P = filter.apply_to(sub);
  const std::vector<Index> pos = positions_in(out.buffered, S);
  out.block = P(pos, pos);
  // A walk of length <= m between two points of S never leaves the radius floor(m/2) ball.
  out.exact = r >= filter.degree() / 2;
  return out;
}

double localization_trace_gap(const Matrix& A, const SpectralFunction& f, const IndexSet& S, Index r) {
  const IndexSet ball = graph_ball(SparsityPattern::from_matrix(A), S, r);
  const Matrix full = matrix_function(A, f);
  const Matrix local = matrix_function(A(ball.indices(), ball.indices()), f);
  const std::vector<Index> pos = positions_in(ball, S);
  double tr_full = 0.0, tr_local = 0.0;
  for (std::size_t a = 0; a < pos.size(); ++a) {
    tr_full += full(S[static_cast<Index>(a)], S[static_cast<Index>(a)]);
    tr_local += local(pos[a], pos[a]);
  }
  return std::abs(tr_full - tr_local);
}

}  // namespace tracelab
