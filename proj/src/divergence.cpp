#include "tracelab/divergence.hpp"

#include "tracelab/spectral_function.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace tracelab {

namespace {

void require_same_square(const Matrix& A, const Matrix& B, const char* who) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows() || A.rows() == 0) {
    std::ostringstream os;
    os << who << ": expected two square matrices of equal size";
    throw DimensionError(os.str());
  }
}

Vector symmetric_eigenvalues(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double spd_logdet(const Matrix& A, const char* name) {
  const Vector ev = symmetric_eigenvalues(A);
  if (!(ev.minCoeff() > 1e-12 * ev.cwiseAbs().maxCoeff())) {
    std::ostringstream os;
    os << "kl_exact: " << name << " is not positive definite";
    throw DomainError(os.str(), ev.minCoeff());
  }
  return ev.array().log().sum();
}

Matrix psd_sqrt(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double kl_exact(const Matrix& Sigma1, const Matrix& Sigma2) {
  require_same_square(Sigma1, Sigma2, "kl_exact");
  const double logdet1 = spd_logdet(Sigma1, "Sigma1");
  const double logdet2 = spd_logdet(Sigma2, "Sigma2");
  Eigen::LLT<Matrix> llt(0.5 * (Sigma2 + Sigma2.transpose()));
  if (llt.info() != Eigen::Success) throw DomainError("kl_exact: Sigma2 Cholesky failed", 0.0);
  const double tr = llt.solve(Sigma1).trace();
  return 0.5 * (tr + logdet2 - logdet1 - static_cast<double>(Sigma1.rows()));
}

double w2_exact(const Matrix& Sigma1, const Matrix& Sigma2) {
  require_same_square(Sigma1, Sigma2, "w2_exact");
  const Matrix root1 = psd_sqrt(Sigma1);
  const Vector ev = symmetric_eigenvalues(root1 * Sigma2 * root1);
  const double tau = ev.cwiseMax(0.0).cwiseSqrt().sum();
  return Sigma1.trace() + Sigma2.trace() - 2.0 * tau;
}

Matrix psd_root(const Matrix& Sigma) {
  if (Sigma.rows() != Sigma.cols()) throw DimensionError("psd_root: matrix must be square");
  const Index n = Sigma.rows();
  const Matrix S = 0.5 * (Sigma + Sigma.transpose());
  const double norm = std::max(S.cwiseAbs().maxCoeff(), 1e-300);
  // Eigen flags rank-deficient inputs (a zero pivot above a nonzero column) as a numerical issue
  // even though the factors are usable, so the result is judged by its residual instead.
  Eigen::LDLT<Matrix> ldlt(S);
  Vector d = ldlt.vectorD();
  const double scale = std::max(d.cwiseAbs().maxCoeff(), 1e-300);
  for (Index i = 0; i < n; ++i) {
    if (d(i) < -1e-10 * scale) throw NumericalError("psd_root: matrix is not positive semidefinite");
    d(i) = std::sqrt(std::max(d(i), 0.0));
  }
  // Sigma = P^T L D L^T P  =>  R = D^{1/2} L^T P
  const Matrix LtP = Matrix(ldlt.matrixU()) * (ldlt.transpositionsP() * Matrix(Matrix::Identity(n, n)));
  Matrix R = d.asDiagonal() * LtP;
  if ((R.transpose() * R - S).cwiseAbs().maxCoeff() <= 1e-10 * norm) return R;

  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  Vector lam = es.eigenvalues();
  const double top = std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  for (Index i = 0; i < n; ++i) {
    if (lam(i) < -1e-10 * top) throw NumericalError("psd_root: matrix is not positive semidefinite");
    lam(i) = std::sqrt(std::max(lam(i), 0.0));
  }
  return lam.asDiagonal() * es.eigenvectors().transpose();
}

GaussianPair GaussianPair::from_dense(const Matrix& Sigma1, const Matrix& Sigma2) {
  require_same_square(Sigma1, Sigma2, "GaussianPair");
  GaussianPair pair;
  pair.sigma1 = make_dense(Sigma1);
  pair.sigma2 = make_dense(Sigma2);
  try {
    pair.precision_factor = make_precision_factor(Sigma2);
  } catch (const NumericalError&) {
    pair.precision_factor = nullptr;
  }
  pair.sigma1_root = psd_root(Sigma1);
  return pair;
}

KlEstimate kl_slq(const GaussianPair& pair, const BoltOptions& opts, const RngStream& stream) {
  if (!pair.precision_factor)
    throw DomainError("kl_slq: Sigma2 has no Cholesky factor (singular)", 0.0);
  const OperatorHandle A = make_sandwich(pair.precision_factor, pair.sigma1);
  KlEstimate out;
  out.estimate = bolt(*A, functions::kl(), opts, stream);
  out.value = 0.5 * out.estimate.value;
  return out;
}

ProxyKlEstimate proxy_kl(const OperatorHandle& op, const ProxyKlOptions& opts, const RngStream& stream) {
  ProxyKlEstimate out;
  out.s_used = opts.sample_count ? std::min(opts.s, *opts.sample_count) : opts.s;
  SubblockOptions so;
  so.t = opts.t;
  so.s = out.s_used;
  so.q = opts.q;
  so.k = opts.k.value_or(out.s_used);
  so.b = std::min(opts.b, out.s_used);
  so.assume_full_support = opts.assume_full_support;
  so.tolerate_singular_blocks = true;
  so.threads = opts.threads;
  out.estimate = subblock_slq(op, functions::kl(), so, stream);
  for (BlockStatus st : out.estimate.block_status) {
    if (st == BlockStatus::singular) ++out.singular_blocks;
    if (st == BlockStatus::clamped) ++out.clamped_blocks;
  }
  out.value = out.singular_blocks > 0 ? std::numeric_limits<double>::infinity()
                                      : 0.5 * out.estimate.value;
  return out;
}

W2Estimate w2_slq(const GaussianPair& pair, const BoltOptions& opts, const RngStream& stream) {
  const Matrix& R = pair.sigma1_root;
  if (R.rows() != pair.sigma2->size()) throw DimensionError("w2_slq: missing or mismatched root of Sigma1");
  const OperatorHandle sigma2 = pair.sigma2;
  const OperatorHandle C = make_function_operator(
      R.rows(), [R, sigma2](const Matrix& X) { return Matrix(R * sigma2->apply(Matrix(R.transpose() * X))); });

  W2Estimate out;
  out.tau_estimate = bolt(*C, functions::square_root(), opts, stream.substream(0));
  out.tau = out.tau_estimate.value;

  auto trace_of = [&](const LinearOperator& S, std::uint64_t id) {
    if (S.capabilities().entry_access || S.capabilities().subblock_extract) return S.diagonal().sum();
    BoltOptions id_opts = opts;
    id_opts.k = 1;
    return bolt(S, functions::identity(), id_opts, stream.substream(id)).value;
  };
  out.trace_term = trace_of(*pair.sigma1, 1) + trace_of(*pair.sigma2, 2);
  out.value = out.trace_term - 2.0 * out.tau;
  return out;
}

}  // namespace tracelab
