#include "tracelab/linop.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tracelab {

// ---------------------------------------------------------------------------------------------
// IndexSet

IndexSet::IndexSet(std::vector<Index> indices, Index n) : indices_(std::move(indices)) {
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 0 || (n >= 0 && indices_[i] >= n)) {
      std::ostringstream os;
      os << "index " << indices_[i] << " out of range";
      if (n >= 0) os << " [0, " << n << ")";
      throw DimensionError(os.str());
    }
    if (i > 0 && indices_[i] <= indices_[i - 1])
      throw DimensionError("index set must be strictly increasing");
  }
}

IndexSet IndexSet::range(Index begin, Index end) {
  std::vector<Index> idx;
  for (Index i = begin; i < end; ++i) idx.push_back(i);
  return IndexSet(std::move(idx));
}

bool IndexSet::contains(Index i) const { return position(i) >= 0; }

Index IndexSet::position(Index i) const {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), i);
  if (it == indices_.end() || *it != i) return -1;
  return static_cast<Index>(it - indices_.begin());
}

// ---------------------------------------------------------------------------------------------
// LinearOperator

LinearOperator::LinearOperator(Index n, Capabilities caps) : n_(n), caps_(caps) {
  if (n < 1) throw DimensionError("operator dimension must be positive");
}

Matrix LinearOperator::apply(const Matrix& X) const {
  if (X.rows() != n_) {
    std::ostringstream os;
    os << "apply: input has " << X.rows() << " rows, operator dimension is " << n_;
    throw DimensionError(os.str());
  }
  counters_.add_matvecs(static_cast<std::uint64_t>(X.cols()));
  return apply_impl(X);
}

Vector LinearOperator::apply(const Vector& x) const {
  Matrix X = x;
  return apply(X).col(0);
}

Matrix LinearOperator::apply_transpose(const Matrix& X) const {
  if (X.rows() != n_) throw DimensionError("apply_transpose: input rows differ from dimension");
  counters_.add_matvecs(static_cast<std::uint64_t>(X.cols()));
  return apply_transpose_impl(X);
}

Matrix LinearOperator::apply_transpose_impl(const Matrix& X) const {
  if (is_symmetric()) return apply_impl(X);
  throw CapabilityError("operator does not provide a transpose");
}

double LinearOperator::entry(Index i, Index j) const {
  if (!caps_.entry_access) throw CapabilityError("operator has no entry access");
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw DimensionError("entry index out of range");
  counters_.add_entries(1);
  return entry_impl(i, j);
}

double LinearOperator::entry_impl(Index, Index) const {
  throw CapabilityError("operator has no entry access");
}

double LinearOperator::diagonal_entry_impl(Index i) const { return entry_impl(i, i); }

Vector LinearOperator::diagonal(const IndexSet& S) const {
  if (!caps_.entry_access && !caps_.subblock_extract)
    throw CapabilityError("operator has neither entry access nor subblock extraction");
  if (!S.empty() && S.indices().back() >= n_) throw DimensionError("index set exceeds dimension");
  Vector d(S.size());
  if (caps_.entry_access) {
    for (Index i = 0; i < S.size(); ++i) d(i) = diagonal_entry_impl(S[i]);
  } else {
    d = subblock_impl(S).diagonal();
  }
  counters_.add_entries(static_cast<std::uint64_t>(S.size()));
  return d;
}

Vector LinearOperator::diagonal() const { return diagonal(IndexSet::range(0, n_)); }

Matrix LinearOperator::principal_subblock(const IndexSet& S) const {
  if (!caps_.entry_access && !caps_.subblock_extract)
    throw CapabilityError("operator has neither entry access nor subblock extraction");
  if (!S.empty() && S.indices().back() >= n_) throw DimensionError("index set exceeds dimension");
  Matrix block = subblock_impl(S);
  counters_.add_entries(static_cast<std::uint64_t>(S.size() * S.size()));
  return block;
}

Matrix LinearOperator::subblock_impl(const IndexSet& S) const {
  const Index s = S.size();
  if (caps_.entry_access) {
    Matrix block(s, s);
    for (Index a = 0; a < s; ++a)
      for (Index c = 0; c < s; ++c) block(a, c) = entry_impl(S[a], S[c]);
    return block;
  }
  Matrix E = Matrix::Zero(n_, s);
  for (Index a = 0; a < s; ++a) E(S[a], a) = 1.0;
  counters_.add_matvecs(static_cast<std::uint64_t>(s));
  const Matrix AE = apply_impl(E);
  Matrix block(s, s);
  for (Index a = 0; a < s; ++a) block.row(a) = AE.row(S[a]);
  return block;
}

// ---------------------------------------------------------------------------------------------
// Dense operators

namespace {

class DenseOperator final : public LinearOperator {
 public:
  DenseOperator(Matrix M, bool symmetric)
      : LinearOperator(M.rows(), {true, true, true}), M_(std::move(M)), symmetric_(symmetric) {}

  bool is_symmetric() const override { return symmetric_; }

 protected:
  Matrix apply_impl(const Matrix& X) const override { return M_ * X; }
  Matrix apply_transpose_impl(const Matrix& X) const override { return M_.transpose() * X; }
  double entry_impl(Index i, Index j) const override { return M_(i, j); }
  Matrix subblock_impl(const IndexSet& S) const override {
    return M_(S.indices(), S.indices());
  }

 private:
  Matrix M_;
  bool symmetric_;
};

void require_square(const Matrix& M, const char* who) {
  if (M.rows() != M.cols() || M.rows() == 0) {
    std::ostringstream os;
    os << who << ": expected a non-empty square matrix, got " << M.rows() << "x" << M.cols();
    throw DimensionError(os.str());
  }
}

}  // namespace

OperatorHandle make_dense(const Matrix& M) {
  require_square(M, "make_dense");
  const double scale = M.norm();
  const double asym = (M - M.transpose()).norm();
  if (scale > 0 && asym > 1e-12 * scale) {
    std::ostringstream os;
    os << "make_dense: input asymmetric (relative defect " << asym / scale << "), symmetrizing";
    warn(os.str());
  }
  Matrix S = 0.5 * (M + M.transpose());
  return std::make_shared<DenseOperator>(std::move(S), true);
}

OperatorHandle make_general(const Matrix& M) {
  require_square(M, "make_general");
  return std::make_shared<DenseOperator>(M, false);
}

// ---------------------------------------------------------------------------------------------
// Gram operator

namespace {
const std::uint64_t kGramExperiment = experiment_id("gram");
}

GramOperator::GramOperator(Index m, Index n, std::uint64_t seed)
    : LinearOperator(n, {true, true, true}), m_(m), seed_(seed) {
  if (m < 1) throw DimensionError("gram: m must be positive");
}

Vector GramOperator::column(Index j) const {
  RngStream stream(seed_, kGramExperiment, static_cast<std::uint64_t>(j));
  Vector b(m_);
  for (Index i = 0; i < m_; ++i) b(i) = stream.normal();
  return b;
}

double GramOperator::column_norm_squared(Index j) const {
  // A Box-Muller pair (r cos t, r sin t) has squared norm r^2 = -2 ln u1, so the angle draw can
  // be skipped.
  RngStream stream(seed_, kGramExperiment, static_cast<std::uint64_t>(j));
  double sum = 0.0;
  for (Index p = 0; p < m_ / 2; ++p) {
    const double u1 = 1.0 - stream.uniform();
    stream.uniform();
    sum += -2.0 * std::log(u1);
  }
  if (m_ % 2 == 1) {
    const double z = stream.normal();
    sum += z * z;
  }
  return sum;
}

double GramOperator::frobenius_squared() const {
  double total = 0.0;
  for (Index j = 0; j < size(); ++j) total += column_norm_squared(j);
  return total;
}

Matrix GramOperator::apply_impl(const Matrix& X) const {
  Matrix BX = Matrix::Zero(m_, X.cols());
  for (Index j = 0; j < size(); ++j) BX.noalias() += column(j) * X.row(j);
  Matrix Y(size(), X.cols());
  for (Index j = 0; j < size(); ++j) Y.row(j) = column(j).transpose() * BX;
  return Y;
}

double GramOperator::entry_impl(Index i, Index j) const {
  if (i == j) return column_norm_squared(i);
  return column(i).dot(column(j));
}

double GramOperator::diagonal_entry_impl(Index i) const { return column_norm_squared(i); }

Matrix GramOperator::subblock_impl(const IndexSet& S) const {
  Matrix BS(m_, S.size());
  for (Index a = 0; a < S.size(); ++a) BS.col(a) = column(S[a]);
  Matrix G = BS.transpose() * BS;
  return 0.5 * (G + G.transpose());
}

std::shared_ptr<const GramOperator> make_gram(Index m, Index n, std::uint64_t seed) {
  return std::make_shared<GramOperator>(m, n, seed);
}

// ---------------------------------------------------------------------------------------------
// Composite operators

namespace {

class SandwichOperator final : public LinearOperator {
 public:
  SandwichOperator(OperatorHandle L, OperatorHandle Sigma)
      : LinearOperator(L->size(), {}), L_(std::move(L)), Sigma_(std::move(Sigma)) {}

 protected:
  Matrix apply_impl(const Matrix& X) const override {
    return L_->apply_transpose(Sigma_->apply(L_->apply(X)));
  }

 private:
  OperatorHandle L_;
  OperatorHandle Sigma_;
};

class PrecisionFactor final : public LinearOperator {
 public:
  explicit PrecisionFactor(Eigen::LLT<Matrix> llt)
      : LinearOperator(llt.matrixL().rows(), {}), llt_(std::move(llt)) {}

  bool is_symmetric() const override { return false; }

 protected:
  // L X = C^{-T} X
  Matrix apply_impl(const Matrix& X) const override { return llt_.matrixU().solve(X); }
  // L^T X = C^{-1} X
  Matrix apply_transpose_impl(const Matrix& X) const override { return llt_.matrixL().solve(X); }

 private:
  Eigen::LLT<Matrix> llt_;
};

class FunctionOperator final : public LinearOperator {
 public:
  FunctionOperator(Index n, std::function<Matrix(const Matrix&)> fn, bool symmetric)
      : LinearOperator(n, {}), fn_(std::move(fn)), symmetric_(symmetric) {}

  bool is_symmetric() const override { return symmetric_; }

 protected:
  Matrix apply_impl(const Matrix& X) const override {
    Matrix Y = fn_(X);
    if (Y.rows() != X.rows() || Y.cols() != X.cols())
      throw DimensionError("function operator returned a block of the wrong shape");
    return Y;
  }

 private:
  std::function<Matrix(const Matrix&)> fn_;
  bool symmetric_;
};

class RestrictedOperator final : public LinearOperator {
 public:
  RestrictedOperator(OperatorHandle op, IndexSet S)
      : LinearOperator(S.size(), restricted_caps(*op)), op_(std::move(op)), S_(std::move(S)) {}

  bool is_symmetric() const override { return op_->is_symmetric(); }

 protected:
  Matrix apply_impl(const Matrix& X) const override {
    Matrix full = Matrix::Zero(op_->size(), X.cols());
    for (Index a = 0; a < S_.size(); ++a) full.row(S_[a]) = X.row(a);
    const Matrix Y = op_->apply(full);
    Matrix out(S_.size(), X.cols());
    for (Index a = 0; a < S_.size(); ++a) out.row(a) = Y.row(S_[a]);
    return out;
  }
  double entry_impl(Index i, Index j) const override { return op_->entry(S_[i], S_[j]); }
  double diagonal_entry_impl(Index i) const override { return op_->entry(S_[i], S_[i]); }
  Matrix subblock_impl(const IndexSet& T) const override {
    std::vector<Index> mapped;
    mapped.reserve(T.indices().size());
    for (Index a : T) mapped.push_back(S_[a]);
    return op_->principal_subblock(IndexSet(std::move(mapped)));
  }

 private:
  static Capabilities restricted_caps(const LinearOperator& op) {
    Capabilities c = op.capabilities();
    c.block_apply = true;
    return c;
  }

  OperatorHandle op_;
  IndexSet S_;
};

}  // namespace

OperatorHandle make_sandwich(OperatorHandle L, OperatorHandle Sigma) {
  if (!L || !Sigma) throw DimensionError("make_sandwich: null operator");
  if (L->size() != Sigma->size()) throw DimensionError("make_sandwich: dimension mismatch");
  return std::make_shared<SandwichOperator>(std::move(L), std::move(Sigma));
}

OperatorHandle make_precision_factor(const Matrix& Sigma2) {
  require_square(Sigma2, "make_precision_factor");
  Eigen::LLT<Matrix> llt(0.5 * (Sigma2 + Sigma2.transpose()));
  if (llt.info() != Eigen::Success)
    throw NumericalError("make_precision_factor: Cholesky failed, matrix is not SPD");
  return std::make_shared<PrecisionFactor>(std::move(llt));
}

OperatorHandle make_function_operator(Index n, std::function<Matrix(const Matrix&)> apply,
                                      bool symmetric) {
  return std::make_shared<FunctionOperator>(n, std::move(apply), symmetric);
}

OperatorHandle make_restricted(OperatorHandle op, IndexSet S) {
  if (S.empty()) throw DimensionError("make_restricted: empty index set");
  if (S.indices().back() >= op->size()) throw DimensionError("make_restricted: index out of range");
  return std::make_shared<RestrictedOperator>(std::move(op), std::move(S));
}

Matrix to_dense(const LinearOperator& op) {
  return op.apply(Matrix(Matrix::Identity(op.size(), op.size())));
}

double symmetry_defect(const LinearOperator& op, int trials, RngStream& stream) {
  const Index n = op.size();
  Matrix X(n, trials), Y(n, trials);
  for (Index c = 0; c < trials; ++c)
    for (Index i = 0; i < n; ++i) {
      X(i, c) = stream.normal();
      Y(i, c) = stream.normal();
    }
  const Matrix AX = op.apply(X);
  const Matrix AY = op.apply(Y);
  double norm_est = 0.0;
  for (Index c = 0; c < trials; ++c) {
    norm_est = std::max(norm_est, AX.col(c).norm() / X.col(c).norm());
    norm_est = std::max(norm_est, AY.col(c).norm() / Y.col(c).norm());
  }
  if (norm_est == 0.0) return 0.0;
  double worst = 0.0;
  for (Index c = 0; c < trials; ++c) {
    const double gap = std::abs(X.col(c).dot(AY.col(c)) - Y.col(c).dot(AX.col(c)));
    worst = std::max(worst, gap / (X.col(c).norm() * Y.col(c).norm() * norm_est));
  }
  return worst;
}

// ---------------------------------------------------------------------------------------------
// Kernels

std::vector<double> equispaced_grid(Index n, double a, double b) {
  if (n < 1) throw DimensionError("grid size must be positive");
  std::vector<double> x(static_cast<std::size_t>(n));
  if (n == 1) {
    x[0] = a;
    return x;
  }
  for (Index i = 0; i < n; ++i) x[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  return x;
}

double KernelSpec::operator()(double xi, double xj) const {
  const double d = std::abs(xi - xj);
  if (const auto* rbf = std::get_if<RbfKernel>(&family))
    return std::exp(-d * d / (2.0 * rbf->sigma * rbf->sigma));
  const auto& osc = std::get<OscExpKernel>(family);
  return std::exp(-d / osc.ell) * std::cos(2.0 * std::numbers::pi * osc.nu * d);
}

Matrix KernelSpec::kernel_matrix() const {
  const Index n = static_cast<Index>(points.size());
  Matrix K(n, n);
  for (Index i = 0; i < n; ++i) {
    K(i, i) = (*this)(points[i], points[i]);
    for (Index j = 0; j < i; ++j) K(i, j) = K(j, i) = (*this)(points[i], points[j]);
  }
  return K;
}

}  // namespace tracelab
