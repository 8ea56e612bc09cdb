#pragma once

#include "tracelab/common.hpp"
#include "tracelab/index_set.hpp"
#include "tracelab/spectral_function.hpp"

#include <utility>
#include <vector>

namespace tracelab {

// p(x) = sum_k c_k T_k(t), t = (2x - hi - lo) / (hi - lo).
struct ChebFilter {
  std::vector<double> coeffs;
  double lo = -1.0;
  double hi = 1.0;
  double sup_error = 0.0;  // max |f - p| on a 10^4 point grid over [lo, hi]

  Index degree() const { return static_cast<Index>(coeffs.size()) - 1; }
  double operator()(double x) const;     // Clenshaw
  double eval_direct(double x) const;    // explicit cosine sum
  Matrix apply_to(const Matrix& A) const;  // p(A) by the matrix Clenshaw recurrence
};

// Interpolant at the m+1 first-kind Chebyshev points.
ChebFilter cheb_fit(const SpectralFunction& f, double lam_min, double lam_max, Index m);

// Gershgorin enclosure of the spectrum, widened by `padding` times its width on each side.
std::pair<double, double> gershgorin_interval(const Matrix& A, double padding = 0.05);

// Undirected adjacency structure of a symmetric sparsity pattern.
class SparsityPattern {
 public:
  explicit SparsityPattern(std::vector<std::vector<Index>> adjacency);
  static SparsityPattern from_matrix(const Matrix& A, double tol = 0.0);
  static SparsityPattern banded(Index n, Index bandwidth);

  Index size() const { return static_cast<Index>(adj_.size()); }
  const std::vector<Index>& neighbors(Index i) const { return adj_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<std::vector<Index>> adj_;
};

// S_r = { v : dist(v, S) <= r } by breadth-first search.
IndexSet graph_ball(const SparsityPattern& pattern, const IndexSet& S, Index r);

struct LocalizedBlock {
  Matrix block;      // [p(A_{S_r,S_r})]_{S,S}
  IndexSet buffered; // S_r
  bool exact = false;  // r >= floor(degree/2): the block equals [p(A)]_{S,S}
};

LocalizedBlock localized_filter_block(const Matrix& A, const ChebFilter& filter, const IndexSet& S,
                                      Index r);

// |tr f(A)_{S,S} - tr [f(A_{S_r,S_r})]_{S,S}| by dense evaluation; r = 0 compares against f(A_S).
double localization_trace_gap(const Matrix& A, const SpectralFunction& f, const IndexSet& S, Index r);

}  // namespace tracelab
