#include "tracelab/hodlr.hpp"

#include "tracelab/lanczos.hpp"
#include "tracelab/parallel.hpp"
#include "tracelab/probes.hpp"
#include "tracelab/spectral_function.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tracelab {

// ---------------------------------------------------------------------------------------------
// Storage and apply

HodlrMatrix::HodlrMatrix(Index n, Index levels) : n_(n), levels_(levels) {
  if (n < 1 || levels < 0) throw DimensionError("hodlr: invalid size or level count");
  if (levels > 30 || n % (Index{1} << levels) != 0) {
    std::ostringstream os;
    os << "hodlr: n = " << n << " is not divisible by 2^" << levels;
    throw DimensionError(os.str());
  }
  nodes_.resize(static_cast<std::size_t>((Index{1} << (levels + 1)) - 1));
  nodes_[0].begin = 0;
  nodes_[0].size = n;
  for (Index i = 0; !is_leaf(i); ++i) {
    const HodlrNode& p = nodes_[i];
    const Index half = p.size / 2;
    nodes_[2 * i + 1].begin = p.begin;
    nodes_[2 * i + 1].size = half;
    nodes_[2 * i + 2].begin = p.begin + half;
    nodes_[2 * i + 2].size = half;
  }
  for (Index i = 0; i < node_count(); ++i) {
    HodlrNode& nd = nodes_[i];
    if (is_leaf(i)) {
      nd.D = Matrix::Zero(nd.size, nd.size);
    } else {
      nd.U = Matrix::Zero(nd.size / 2, 0);
      nd.V = Matrix::Zero(nd.size / 2, 0);
      nd.S = Vector::Zero(0);
    }
  }
}

HodlrMatrix::HodlrMatrix(const HodlrMatrix& other)
    : n_(other.n_), levels_(other.levels_), nodes_(other.nodes_), flops_(other.flops_.load()) {}

HodlrMatrix& HodlrMatrix::operator=(const HodlrMatrix& other) {
  n_ = other.n_;
  levels_ = other.levels_;
  nodes_ = other.nodes_;
  flops_.store(other.flops_.load());
  return *this;
}

Matrix HodlrMatrix::apply_offdiagonal(const Matrix& X, Index max_depth) const {
  if (X.rows() != n_) throw DimensionError("hodlr apply: row count differs from dimension");
  Matrix Y = Matrix::Zero(n_, X.cols());
  const Index last = std::min(max_depth, levels_);
  std::uint64_t flops = 0;
  for (Index i = 0; i < (Index{1} << last) - 1; ++i) {
    const HodlrNode& nd = nodes_[i];
    const Index r = nd.S.size();
    if (r == 0) continue;
    const Index h = nd.size / 2;
    const auto xl = X.middleRows(nd.begin, h);
    const auto xr = X.middleRows(nd.begin + h, h);
    Y.middleRows(nd.begin, h).noalias() += nd.U * (nd.S.asDiagonal() * (nd.V.transpose() * xr));
    Y.middleRows(nd.begin + h, h).noalias() += nd.V * (nd.S.asDiagonal() * (nd.U.transpose() * xl));
    flops += static_cast<std::uint64_t>(2 * (4 * h * r + 2 * r) * X.cols());
  }
  flops_.fetch_add(flops, std::memory_order_relaxed);
  return Y;
}

Matrix HodlrMatrix::apply(const Matrix& X) const {
  Matrix Y = apply_offdiagonal(X, levels_);
  std::uint64_t flops = 0;
  const auto [first, stop] = level_range(levels_);
  for (Index i = first; i < stop; ++i) {
    const HodlrNode& nd = nodes_[i];
    Y.middleRows(nd.begin, nd.size).noalias() += nd.D * X.middleRows(nd.begin, nd.size);
    flops += static_cast<std::uint64_t>(2 * nd.size * nd.size * X.cols());
  }
  flops_.fetch_add(flops, std::memory_order_relaxed);
  return Y;
}

Matrix HodlrMatrix::dense() const {
  Matrix A = Matrix::Zero(n_, n_);
  for (Index i = 0; i < node_count(); ++i) {
    const HodlrNode& nd = nodes_[i];
    if (is_leaf(i)) {
      A.block(nd.begin, nd.begin, nd.size, nd.size) = nd.D;
    } else if (nd.S.size() > 0) {
      const Index h = nd.size / 2;
      const Matrix block = nd.U * nd.S.asDiagonal() * nd.V.transpose();
      A.block(nd.begin, nd.begin + h, h, h) = block;
      A.block(nd.begin + h, nd.begin, h, h) = block.transpose();
    }
  }
  return A;
}

std::uint64_t HodlrMatrix::stored_entries() const {
  std::uint64_t total = 0;
  for (const HodlrNode& nd : nodes_)
    total += static_cast<std::uint64_t>(nd.U.size() + nd.V.size() + nd.S.size() + nd.D.size());
  return total;
}

Index HodlrMatrix::max_rank() const {
  Index r = 0;
  for (const HodlrNode& nd : nodes_) r = std::max(r, static_cast<Index>(nd.S.size()));
  return r;
}

// ---------------------------------------------------------------------------------------------
// Peeling

namespace {

Index sketch_width(Index half, const PeelOptions& opts) {
  return std::min(opts.rank + opts.oversample, half);
}

Matrix thin_q(const Matrix& Y) {
  Eigen::HouseholderQR<Matrix> qr(Y);
  return qr.householderQ() * Matrix::Identity(Y.rows(), Y.cols());
}

}  // namespace

std::uint64_t peel_matvec_budget(Index n, const PeelOptions& opts) {
  std::uint64_t total = 0;
  for (Index d = 0; d < opts.levels; ++d) {
    const Index half = n >> (d + 1);
    total += static_cast<std::uint64_t>((2 + 2 * opts.power_iterations) * sketch_width(half, opts));
  }
  return total + static_cast<std::uint64_t>(n >> opts.levels);
}

HodlrMatrix peel_build(const LinearOperator& op, const PeelOptions& opts, const RngStream& stream) {
  if (!op.is_symmetric()) throw Error("peel_build: operator must be symmetric");
  if (opts.rank < 0 || opts.oversample < 0 || opts.power_iterations < 0)
    throw DimensionError("peel_build: rank, oversample and power iterations must be nonnegative");
  const Index n = op.size();
  HodlrMatrix H(n, opts.levels);

  for (Index depth = 0; depth < opts.levels; ++depth) {
    const auto [first, stop] = HodlrMatrix::level_range(depth);
    const Index count = stop - first;
    const Index half = n >> (depth + 1);
    const Index w = sketch_width(half, opts);
    const Index r = std::min(opts.rank, w);
    if (w < opts.rank + opts.oversample) {
      std::ostringstream os;
      os << "peel_build: rank + oversample exceeds block size " << half << " at level " << depth + 1
         << ", sketching with " << w << " columns";
      warn(os.str());
    }
    if (w == 0) continue;

    // Residual operator: op minus the couplings recovered at coarser levels.
    auto residual = [&](const Matrix& X) { return Matrix(op.apply(X) - H.apply_offdiagonal(X, depth)); };
    auto left_of = [&](Index i) { return H.node(i).begin; };
    auto right_of = [&](Index i) { return H.node(i).begin + half; };

    RngStream level_stream = stream.substream(static_cast<std::uint64_t>(depth));
    Matrix Omega = Matrix::Zero(n, w);
    for (Index i = first; i < stop; ++i)
      Omega.middleRows(right_of(i), half) = draw_block(half, w, ProbeDistribution::gaussian, level_stream);
    Matrix Y = residual(Omega);
    std::vector<Matrix> Q(static_cast<std::size_t>(count));
    for (Index i = first; i < stop; ++i) Q[i - first] = thin_q(Y.middleRows(left_of(i), half));

    for (Index it = 0; it < opts.power_iterations; ++it) {
      Matrix X = Matrix::Zero(n, w);
      for (Index i = first; i < stop; ++i) X.middleRows(left_of(i), half) = Q[i - first];
      const Matrix Z = residual(X);
      Matrix X2 = Matrix::Zero(n, w);
      for (Index i = first; i < stop; ++i) X2.middleRows(right_of(i), half) = thin_q(Z.middleRows(right_of(i), half));
      const Matrix Y2 = residual(X2);
      for (Index i = first; i < stop; ++i) Q[i - first] = thin_q(Y2.middleRows(left_of(i), half));
    }

    Matrix X = Matrix::Zero(n, w);
    for (Index i = first; i < stop; ++i) X.middleRows(left_of(i), half) = Q[i - first];
    const Matrix Z = residual(X);  // rows of right child i hold M_i^T Q_i

    parallel_for(static_cast<std::size_t>(count), opts.threads, [&](std::size_t c) {
      const Index i = first + static_cast<Index>(c);
      const Matrix B = Z.middleRows(right_of(i), half).transpose();  // Q_i^T M_i
      Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
      HodlrNode& nd = H.node(i);
      nd.U = Q[c] * svd.matrixU().leftCols(r);
      nd.S = svd.singularValues().head(r);
      nd.V = svd.matrixV().leftCols(r);
    });
  }

  // Leaves: one batch of stacked coordinate vectors against the fully peeled residual.
  const Index leaf = n >> opts.levels;
  Matrix E = Matrix::Zero(n, leaf);
  const auto [lfirst, lstop] = HodlrMatrix::level_range(opts.levels);
  for (Index i = lfirst; i < lstop; ++i)
    E.middleRows(H.node(i).begin, leaf) = Matrix::Identity(leaf, leaf);
  const Matrix Y = op.apply(E) - H.apply_offdiagonal(E, opts.levels);
  for (Index i = lfirst; i < lstop; ++i) {
    const Matrix D = Y.middleRows(H.node(i).begin, leaf);
    H.node(i).D = 0.5 * (D + D.transpose());
  }
  H.reset_flop_count();
  return H;
}

// ---------------------------------------------------------------------------------------------
// Solve

struct HodlrSolver::Factor {
  Eigen::PartialPivLU<Matrix> lu;  // leaf block, or capacitance I + K Z^T D^{-1} Z
  Matrix W;                        // D^{-1} Z for internal nodes
};

namespace {

std::string node_label(const HodlrMatrix& H, Index i) {
  Index depth = 0;
  while ((Index{1} << (depth + 1)) - 1 <= i) ++depth;
  std::ostringstream os;
  os << (H.is_leaf(i) ? "leaf" : "capacitance") << " at level " << depth << ", block "
     << i - ((Index{1} << depth) - 1);
  return os.str();
}

void check_conditioning(const Eigen::PartialPivLU<Matrix>& lu, const HodlrMatrix& H, Index i) {
  const double rc = lu.rcond();
  if (!(rc > 1e-12)) {
    std::ostringstream os;
    os << "hodlr_solve: singular or ill-conditioned " << node_label(H, i) << " (rcond " << rc << ")";
    throw NumericalError(os.str());
  }
}

// K Z^T X with Z = [[U,0],[0,V]], K = [[0,S],[S,0]].
Matrix coupling(const HodlrNode& nd, const Matrix& X) {
  const Index h = nd.size / 2, r = nd.S.size();
  Matrix out(2 * r, X.cols());
  out.topRows(r) = nd.S.asDiagonal() * (nd.V.transpose() * X.bottomRows(h));
  out.bottomRows(r) = nd.S.asDiagonal() * (nd.U.transpose() * X.topRows(h));
  return out;
}

}  // namespace

HodlrSolver::HodlrSolver(const HodlrMatrix& H) : H_(H) {
  factors_.resize(static_cast<std::size_t>(H.node_count()));
  for (Index i = H.node_count() - 1; i >= 0; --i) {
    auto f = std::make_shared<Factor>();
    const HodlrNode& nd = H.node(i);
    if (H.is_leaf(i)) {
      f->lu.compute(nd.D);
      check_conditioning(f->lu, H, i);
    } else if (nd.S.size() > 0) {
      const Index h = nd.size / 2, r = nd.S.size();
      factors_[i] = f;  // children are complete; W is filled before this node is used
      Matrix W = Matrix::Zero(nd.size, 2 * r);
      W.block(0, 0, h, r) = solve_node(2 * i + 1, nd.U);
      W.block(h, r, h, r) = solve_node(2 * i + 2, nd.V);
      Matrix C = Matrix::Identity(2 * r, 2 * r) + coupling(nd, W);
      f->W = std::move(W);
      f->lu.compute(C);
      check_conditioning(f->lu, H, i);
    }
    factors_[i] = f;
  }
}

Matrix HodlrSolver::solve_node(Index i, const Matrix& Y) const {
  const Factor& f = *factors_[i];
  if (H_.is_leaf(i)) return f.lu.solve(Y);
  const HodlrNode& nd = H_.node(i);
  const Index h = nd.size / 2;
  Matrix X(nd.size, Y.cols());
  X.topRows(h) = solve_node(2 * i + 1, Y.topRows(h));
  X.bottomRows(h) = solve_node(2 * i + 2, Y.bottomRows(h));
  if (nd.S.size() == 0) return X;
  X.noalias() -= f.W * f.lu.solve(coupling(nd, X));
  return X;
}

Matrix HodlrSolver::solve(const Matrix& Y) const {
  if (Y.rows() != H_.size()) throw DimensionError("hodlr_solve: right-hand side has wrong row count");
  return solve_node(0, Y);
}

Vector HodlrSolver::solve(const Vector& y) const { return solve(Matrix(y)).col(0); }

Matrix hodlr_solve(const HodlrMatrix& H, const Matrix& Y) { return HodlrSolver(H).solve(Y); }

// ---------------------------------------------------------------------------------------------
// Certification through B_sym = R^{-T} A R^{-1}

namespace {

class BsymOperator final : public LinearOperator {
 public:
  BsymOperator(OperatorHandle op, Matrix left_inverse)
      : LinearOperator(op->size(), {true, false, true}), op_(std::move(op)), Rinv_t_(std::move(left_inverse)) {}

 protected:
  // R^{-T} A R^{-1} X with Rinv_t_ = R^{-T}
  Matrix apply_impl(const Matrix& X) const override {
    return Rinv_t_ * op_->apply(Matrix(Rinv_t_.transpose() * X));
  }

 private:
  OperatorHandle op_;
  Matrix Rinv_t_;
};

struct Root {
  Matrix Rinv_t;
  bool fallback = false;
};

Root inverse_root(const HodlrMatrix& H) {
  const Matrix Hd = H.dense();
  const Index n = Hd.rows();
  Root out;
  Eigen::LLT<Matrix> llt(Hd);
  if (llt.info() == Eigen::Success) {
    // H = L L^T, R = L^T, R^{-T} = L^{-1}
    out.Rinv_t = llt.matrixL().solve(Matrix(Matrix::Identity(n, n)));
    return out;
  }
  warn("hodlr: reconstruction is not SPD, using an eigenvalue-clamped square root");
  Eigen::SelfAdjointEigenSolver<Matrix> es(Hd);
  const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  const Vector clamped = es.eigenvalues().cwiseMax(1e-12 * top);
  // R = diag(sqrt(l)) Q^T  =>  R^{-T} = diag(1/sqrt(l)) Q^T
  out.Rinv_t = clamped.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  out.fallback = true;
  return out;
}

}  // namespace

CertifyOperator make_bsym(const HodlrMatrix& H, OperatorHandle op) {
  if (op->size() != H.size()) throw DimensionError("make_bsym: size mismatch");
  Root root = inverse_root(H);
  CertifyOperator out;
  out.fallback = root.fallback;
  out.bsym = std::make_shared<BsymOperator>(std::move(op), std::move(root.Rinv_t));
  return out;
}

HodlrProxyKl hodlr_proxy_kl(const HodlrMatrix& H, OperatorHandle op, Index t, Index s, Index q,
                            Index k, const RngStream& stream, Index b) {
  const CertifyOperator cert = make_bsym(H, std::move(op));
  ProxyKlOptions opts;
  opts.t = t;
  opts.s = s;
  opts.q = q;
  opts.k = k;
  opts.b = b;
  opts.assume_full_support = true;
  HodlrProxyKl out;
  out.estimate = proxy_kl(cert.bsym, opts, stream);
  out.value = out.estimate.value;
  out.fallback = cert.fallback;
  return out;
}

Vector bsym_spectrum(const HodlrMatrix& H, const LinearOperator& op) {
  const Root root = inverse_root(H);
  const Matrix A = to_dense(op);
  const Matrix B = root.Rinv_t * A * root.Rinv_t.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (B + B.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

std::pair<double, double> eig_span(const HodlrMatrix& H, const LinearOperator& op) {
  const Vector ev = bsym_spectrum(H, op);
  return {ev.minCoeff(), ev.maxCoeff()};
}

double dense_proxy_kl(const HodlrMatrix& H, const LinearOperator& op) {
  const Vector ev = bsym_spectrum(H, op);
  const SpectralFunction f = functions::kl();
  const double scale = ev.cwiseAbs().maxCoeff();
  bool clamped = false;
  double total = 0.0;
  for (Index i = 0; i < ev.size(); ++i) total += f(clamp_to_domain(ev(i), scale, f, clamped));
  return 0.5 * total;
}

}  // namespace tracelab
