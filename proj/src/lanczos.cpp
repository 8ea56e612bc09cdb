#include "tracelab/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tracelab {

Vector JacobiMatrix::weights() const {
  return eigvecs.topRows(block_size).colwise().squaredNorm().transpose();
}

namespace {

void require_symmetric(const LinearOperator& op) {
  if (!op.is_symmetric()) throw Error("Lanczos requires a symmetric operator");
}

void finish(JacobiMatrix& J) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(J.T);
  if (es.info() != Eigen::Success) throw NumericalError("Jacobi matrix eigendecomposition failed");
  J.nodes = es.eigenvalues();
  J.eigvecs = es.eigenvectors();
}

}  // namespace

JacobiMatrix block_lanczos(const LinearOperator& op, const Matrix& V0, Index k,
                           const LanczosOptions& opts) {
  require_symmetric(op);
  const Index n = op.size();
  const Index b = V0.cols();
  if (V0.rows() != n) throw DimensionError("block_lanczos: start block has wrong row count");
  if (b < 1 || b > n) throw DimensionError("block_lanczos: need 1 <= b <= n");
  if (k < 1) throw DimensionError("block_lanczos: need k >= 1");

  JacobiMatrix J;
  J.block_size = b;
  Matrix Q(n, std::min(n, k * b));
  std::vector<Matrix> diag_blocks, off_blocks;  // A_j, and B_j with W_j = Q_{j+1} B_j
  Index filled = 0;
  Matrix current = V0;
  double norm_est = 0.0;

  for (Index j = 0; j < k; ++j) {
    const Index w = current.cols();
    Q.middleCols(filled, w) = current;
    const Index start = filled;
    filled += w;
    J.widths.push_back(w);

    Matrix W = op.apply(current);
    J.applies += w;
    Matrix Aj = current.transpose() * W;
    const double aj_norm = Aj.norm();
    if ((Aj - Aj.transpose()).norm() > 1e-8 * std::max(aj_norm, 1e-300) && aj_norm > 0)
      throw Error("Lanczos detected a non-symmetric operator");
    Aj = 0.5 * (Aj + Aj.transpose());
    diag_blocks.push_back(Aj);
    norm_est = std::max(norm_est, aj_norm);
    if (j == k - 1) break;

    W.noalias() -= current * Aj;
    if (j > 0) W.noalias() -= Q.middleCols(start - J.widths[j - 1], J.widths[j - 1]) *
                             off_blocks.back().transpose();
    for (int pass = 0; pass < 2; ++pass) {
      const auto basis = Q.leftCols(filled);
      W.noalias() -= basis * (basis.transpose() * W);
    }
    norm_est = std::max(norm_est, W.norm());

    Eigen::ColPivHouseholderQR<Matrix> qr(W);
    const Matrix R = qr.matrixR().topRows(std::min(n, w)).triangularView<Eigen::Upper>();
    Index rank = 0;
    const Index room = n - filled;
    for (Index i = 0; i < std::min(R.rows(), R.cols()); ++i)
      if (std::abs(R(i, i)) > opts.breakdown_tol * norm_est) ++rank;
    rank = std::min(rank, room);
    if (rank == 0) {
      J.early_breakdown = true;
      break;
    }
    Matrix Qn = qr.householderQ() * Matrix::Identity(n, rank);
    Matrix Bj = R.topRows(rank) * qr.colsPermutation().transpose();
    for (Index i = 0; i < rank; ++i)
      if (R(i, i) < 0) {
        Qn.col(i) = -Qn.col(i);
        Bj.row(i) = -Bj.row(i);
      }
    // Keep the new block orthogonal to everything before it.
    for (int pass = 0; pass < 2; ++pass) {
      const auto basis = Q.leftCols(filled);
      Qn.noalias() -= basis * (basis.transpose() * Qn);
    }
    Eigen::HouseholderQR<Matrix> reqr(Qn);
    Matrix Qfix = reqr.householderQ() * Matrix::Identity(n, rank);
    const Matrix Rfix = reqr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
    for (Index i = 0; i < rank; ++i)
      if (Rfix(i, i) < 0) Qfix.col(i) = -Qfix.col(i);
    off_blocks.push_back(Bj);
    current = Qfix;
    if (rank < w) J.early_breakdown = true;
  }

  J.steps = static_cast<Index>(diag_blocks.size());
  J.T = Matrix::Zero(filled, filled);
  Index offset = 0;
  for (std::size_t j = 0; j < diag_blocks.size(); ++j) {
    const Index w = J.widths[j];
    J.T.block(offset, offset, w, w) = diag_blocks[j];
    if (j + 1 < diag_blocks.size()) {
      const Matrix& B = off_blocks[j];  // widths[j+1] x w
      J.T.block(offset + w, offset, B.rows(), w) = B;
      J.T.block(offset, offset + w, w, B.rows()) = B.transpose();
    }
    offset += w;
  }
  if (J.steps < k) J.early_breakdown = true;
  if (opts.keep_basis) J.basis = Q.leftCols(filled);
  finish(J);
  return J;
}

JacobiMatrix lanczos(const LinearOperator& op, const Vector& v, Index k, const LanczosOptions& opts) {
  require_symmetric(op);
  const Index n = op.size();
  if (v.size() != n) throw DimensionError("lanczos: start vector has wrong length");
  if (k < 1) throw DimensionError("lanczos: need k >= 1");

  JacobiMatrix J;
  J.block_size = 1;
  const Index kmax = std::min(k, n);
  Matrix Q(n, kmax);
  std::vector<double> alpha, beta;
  Q.col(0) = v;
  double norm_est = 0.0;
  for (Index j = 0; j < kmax; ++j) {
    Vector w = op.apply(Vector(Q.col(j)));
    ++J.applies;
    J.widths.push_back(1);
    const double a = Q.col(j).dot(w);
    alpha.push_back(a);
    norm_est = std::max(norm_est, std::abs(a));
    if (j == k - 1) break;
    w -= a * Q.col(j);
    if (j > 0) w -= beta.back() * Q.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) {
      const auto basis = Q.leftCols(j + 1);
      w.noalias() -= basis * (basis.transpose() * w);
    }
    const double bnorm = w.norm();
    norm_est = std::max(norm_est, bnorm);
    if (!(bnorm > opts.breakdown_tol * norm_est) || j + 1 >= n) {
      J.early_breakdown = true;
      break;
    }
    beta.push_back(bnorm);
    Q.col(j + 1) = w / bnorm;
  }
  const Index m = static_cast<Index>(alpha.size());
  J.steps = m;
  J.T = Matrix::Zero(m, m);
  for (Index j = 0; j < m; ++j) {
    J.T(j, j) = alpha[j];
    if (j + 1 < m) J.T(j, j + 1) = J.T(j + 1, j) = beta[j];
  }
  if (m < k) J.early_breakdown = true;
  if (opts.keep_basis) J.basis = Q.leftCols(m);
  finish(J);
  return J;
}

QuadratureResult quadrature(const JacobiMatrix& J, const SpectralFunction& f) {
  QuadratureResult out;
  const Vector w = J.weights();
  const double scale = J.nodes.cwiseAbs().maxCoeff();
  out.min_node = J.nodes.minCoeff();
  for (Index j = 0; j < J.nodes.size(); ++j)
    out.value += w(j) * f(clamp_to_domain(J.nodes(j), scale, f, out.clamped));
  return out;
}

Vector function_action(const LinearOperator& op, const Vector& x, const SpectralFunction& f,
                       Index k, bool* clamped, Index* applies) {
  const double xn = x.norm();
  if (xn == 0.0) return Vector::Zero(x.size());
  LanczosOptions opts;
  opts.keep_basis = true;
  const JacobiMatrix J = lanczos(op, x / xn, k, opts);
  if (applies) *applies += J.applies;
  const double scale = J.nodes.cwiseAbs().maxCoeff();
  bool c = false;
  Vector fmu(J.nodes.size());
  for (Index j = 0; j < fmu.size(); ++j) fmu(j) = f(clamp_to_domain(J.nodes(j), scale, f, c));
  if (clamped && c) *clamped = true;
  const Vector coeffs = J.eigvecs * fmu.cwiseProduct(J.eigvecs.row(0).transpose());
  return xn * (J.basis * coeffs);
}

}  // namespace tracelab
