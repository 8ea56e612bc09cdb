#pragma once

#include "tracelab/common.hpp"
#include "tracelab/index_set.hpp"
#include "tracelab/rng.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <variant>

namespace tracelab {

struct Capabilities {
  bool block_apply = true;
  bool entry_access = false;
  bool subblock_extract = false;
};

struct CounterSnapshot {
  std::uint64_t matvecs = 0;
  std::uint64_t entries = 0;
};

// Logical access counts: a block apply of width b adds b matvecs, a subblock of size s adds s*s
// entry reads and a diagonal request of size s adds s.
class AccessCounters {
 public:
  void add_matvecs(std::uint64_t count) const { matvecs_.fetch_add(count, std::memory_order_relaxed); }
  void add_entries(std::uint64_t count) const { entries_.fetch_add(count, std::memory_order_relaxed); }
  CounterSnapshot snapshot() const { return {matvecs_.load(), entries_.load()}; }
  void reset() const {
    matvecs_.store(0);
    entries_.store(0);
  }

 private:
  mutable std::atomic<std::uint64_t> matvecs_{0};
  mutable std::atomic<std::uint64_t> entries_{0};
};

// Immutable square operator. Public entry points validate shapes and update counters before
// dispatching to the protected *_impl hooks.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  LinearOperator(const LinearOperator&) = delete;
  LinearOperator& operator=(const LinearOperator&) = delete;

  Index size() const noexcept { return n_; }
  const Capabilities& capabilities() const noexcept { return caps_; }
  virtual bool is_symmetric() const { return true; }

  Matrix apply(const Matrix& X) const;
  Vector apply(const Vector& x) const;
  Matrix apply_transpose(const Matrix& X) const;

  double entry(Index i, Index j) const;
  Vector diagonal(const IndexSet& S) const;
  Vector diagonal() const;
  Matrix principal_subblock(const IndexSet& S) const;

  CounterSnapshot counters() const { return counters_.snapshot(); }
  void reset_counters() const { counters_.reset(); }

 protected:
  LinearOperator(Index n, Capabilities caps);

  virtual Matrix apply_impl(const Matrix& X) const = 0;
  virtual Matrix apply_transpose_impl(const Matrix& X) const;
  virtual double entry_impl(Index i, Index j) const;
  // Default: gathers entries one by one, or applies to coordinate columns when only
  // subblock_extract is advertised.
  virtual Matrix subblock_impl(const IndexSet& S) const;
  virtual double diagonal_entry_impl(Index i) const;

 private:
  Index n_;
  Capabilities caps_;
  AccessCounters counters_;
};

using OperatorHandle = std::shared_ptr<const LinearOperator>;

// Symmetric dense matrix. Asymmetric input is symmetrized with a warning.
OperatorHandle make_dense(const Matrix& M);
// Square matrix without symmetry assumption; apply_transpose is available.
OperatorHandle make_general(const Matrix& M);

// A = B^T B where B is m x n with i.i.d. standard normal entries. Column j is regenerated from
// the stream (seed, "gram", j) on every access, so nothing of size n*m is stored.
class GramOperator final : public LinearOperator {
 public:
  GramOperator(Index m, Index n, std::uint64_t seed);

  Index rows() const noexcept { return m_; }
  std::uint64_t column_seed() const noexcept { return seed_; }
  Vector column(Index j) const;
  // ||b_j||^2 from the Box-Muller radii alone; agrees with column(j).squaredNorm() to rounding.
  double column_norm_squared(Index j) const;
  // ||B||_F^2 = tr(A), summed in index order.
  double frobenius_squared() const;

 protected:
  Matrix apply_impl(const Matrix& X) const override;
  double entry_impl(Index i, Index j) const override;
  Matrix subblock_impl(const IndexSet& S) const override;
  double diagonal_entry_impl(Index i) const override;

 private:
  Index m_;
  std::uint64_t seed_;
};

std::shared_ptr<const GramOperator> make_gram(Index m, Index n, std::uint64_t seed);

// Symmetric A = L^T Sigma L.
OperatorHandle make_sandwich(OperatorHandle L, OperatorHandle Sigma);

// L = C^{-T} for the Cholesky factor Sigma2 = C C^T, so that L L^T = Sigma2^{-1}. Applied with
// triangular solves; no inverse is formed.
OperatorHandle make_precision_factor(const Matrix& Sigma2);

// Operator defined by a callback; symmetric unless stated otherwise.
OperatorHandle make_function_operator(Index n, std::function<Matrix(const Matrix&)> apply,
                                      bool symmetric = true);

// P_S^T A P_S acting on R^s. Entry and subblock access are forwarded when available.
OperatorHandle make_restricted(OperatorHandle op, IndexSet S);

// Dense realization by applying to the identity (charges n matvecs).
Matrix to_dense(const LinearOperator& op);

// max over trials of |x^T A y - y^T A x| / (|x| |y| |A|_est).
double symmetry_defect(const LinearOperator& op, int trials, RngStream& stream);

std::vector<double> equispaced_grid(Index n, double a = 0.0, double b = 1.0);

struct RbfKernel {
  double sigma = 2.0;
};
struct OscExpKernel {
  double ell = 0.03;
  double nu = 2.0;
};

struct KernelSpec {
  std::vector<double> points;
  std::variant<RbfKernel, OscExpKernel> family;

  double operator()(double xi, double xj) const;
  Matrix kernel_matrix() const;
};

}  // namespace tracelab
