#pragma once

#include "tracelab/common.hpp"
#include "tracelab/divergence.hpp"
#include "tracelab/linop.hpp"
#include "tracelab/rng.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

namespace tracelab {

// Node of a symmetric HODLR tree stored in heap order (children of i are 2i+1 and 2i+2).
// Internal nodes hold A(left, right) ~ U diag(S) V^T; leaves hold their dense diagonal block.
struct HodlrNode {
  Index begin = 0;
  Index size = 0;
  Matrix U, V;
  Vector S;
  Matrix D;
};

class HodlrMatrix {
 public:
  HodlrMatrix(Index n, Index levels);
  HodlrMatrix(const HodlrMatrix& other);
  HodlrMatrix& operator=(const HodlrMatrix& other);

  Index size() const { return n_; }
  Index levels() const { return levels_; }
  Index leaf_size() const { return n_ >> levels_; }
  Index node_count() const { return static_cast<Index>(nodes_.size()); }
  HodlrNode& node(Index i) { return nodes_[static_cast<std::size_t>(i)]; }
  const HodlrNode& node(Index i) const { return nodes_[static_cast<std::size_t>(i)]; }
  bool is_leaf(Index i) const { return i >= (Index{1} << levels_) - 1; }
  // Heap index range [first, last) of the nodes at depth d.
  static std::pair<Index, Index> level_range(Index depth) {
    return {(Index{1} << depth) - 1, (Index{1} << (depth + 1)) - 1};
  }

  Matrix apply(const Matrix& X) const;
  // Off-diagonal couplings stored at depths < max_depth only (leaves excluded).
  Matrix apply_offdiagonal(const Matrix& X, Index max_depth) const;
  Matrix dense() const;

  std::uint64_t stored_entries() const;
  Index max_rank() const;
  std::uint64_t flop_count() const { return flops_.load(); }
  void reset_flop_count() const { flops_.store(0); }

 private:
  Index n_;
  Index levels_;
  std::vector<HodlrNode> nodes_;
  mutable std::atomic<std::uint64_t> flops_{0};
};

struct PeelOptions {
  Index levels = 1;
  Index rank = 1;
  Index oversample = 8;
  Index power_iterations = 1;
  int threads = 1;
};

// Builds a symmetric HODLR approximation from matvecs with `op` only. Level by level, the
// couplings recovered so far are subtracted and every sibling pair of the current depth is
// sketched at once with random blocks supported on the right children (randomized SVD with
// power iteration). Leaves are read off by one batch of stacked coordinate vectors.
HodlrMatrix peel_build(const LinearOperator& op, const PeelOptions& opts, const RngStream& stream);

// Source-operator matvecs charged by peel_build.
std::uint64_t peel_matvec_budget(Index n, const PeelOptions& opts);

// Hierarchical solver: LU on the leaves, Woodbury on every internal node with
// Z = [[U,0],[0,V]] and K = [[0,S],[S,0]]. Keeps a reference to H, which must outlive it.
class HodlrSolver {
 public:
  explicit HodlrSolver(const HodlrMatrix& H);
  Matrix solve(const Matrix& Y) const;
  Vector solve(const Vector& y) const;

 private:
  struct Factor;
  Matrix solve_node(Index i, const Matrix& Y) const;
  const HodlrMatrix& H_;
  std::vector<std::shared_ptr<Factor>> factors_;
};

Matrix hodlr_solve(const HodlrMatrix& H, const Matrix& Y);

// B_sym = R^{-T} A R^{-1} with H = R^T R from a dense Cholesky of the reconstruction; when H is not
// SPD an eigenvalue-clamped root is used and `fallback` is set.
struct CertifyOperator {
  OperatorHandle bsym;
  bool fallback = false;
};
CertifyOperator make_bsym(const HodlrMatrix& H, OperatorHandle op);

struct HodlrProxyKl {
  double value = 0.0;
  ProxyKlEstimate estimate;
  bool fallback = false;
};
HodlrProxyKl hodlr_proxy_kl(const HodlrMatrix& H, OperatorHandle op, Index t, Index s, Index q,
                            Index k, const RngStream& stream, Index b = 1);

// Dense diagnostics: eigenvalues of B_sym and 1/2 tr f(B_sym) for the KL integrand.
Vector bsym_spectrum(const HodlrMatrix& H, const LinearOperator& op);
std::pair<double, double> eig_span(const HodlrMatrix& H, const LinearOperator& op);
double dense_proxy_kl(const HodlrMatrix& H, const LinearOperator& op);

}  // namespace tracelab
