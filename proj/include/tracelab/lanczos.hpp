#pragma once

#include "tracelab/common.hpp"
#include "tracelab/linop.hpp"
#include "tracelab/spectral_function.hpp"

#include <vector>

namespace tracelab {

struct LanczosOptions {
  bool keep_basis = false;
  // Residual directions whose pivoted-QR diagonal falls below tol * |A|_est are deflated.
  double breakdown_tol = 1e-12;
};

// Block tridiagonal Jacobi matrix of a (block) Lanczos run and its eigendecomposition.
struct JacobiMatrix {
  Matrix T;
  Index block_size = 0;
  Index steps = 0;            // Lanczos steps actually taken
  Vector nodes;               // eigenvalues of T, ascending
  Matrix eigvecs;             // columns are eigenvectors of T
  Matrix basis;               // n x dim(T), only when keep_basis was requested
  std::vector<Index> widths;  // width of each basis block (shrinks under deflation)
  bool early_breakdown = false;
  Index applies = 0;          // single-vector applications of the operator

  // w_j = sum over the first block_size rows of U(r, j)^2.
  Vector weights() const;
};

// Golub-Underwood block Lanczos from an orthonormal start block, with full reorthogonalization
// applied twice per step.
JacobiMatrix block_lanczos(const LinearOperator& op, const Matrix& V0, Index k,
                           const LanczosOptions& opts = {});

// Scalar three-term Lanczos (alpha/beta) from a unit vector, fully reorthogonalized.
JacobiMatrix lanczos(const LinearOperator& op, const Vector& v, Index k,
                     const LanczosOptions& opts = {});

struct QuadratureResult {
  double value = 0.0;
  bool clamped = false;
  double min_node = 0.0;
};

// eta = sum_j w_j f(mu_j), an estimate of tr(V0^T f(A) V0).
QuadratureResult quadrature(const JacobiMatrix& J, const SpectralFunction& f);

// |x| Q f(T) e_1, the k-step Lanczos approximation of f(A) x.
Vector function_action(const LinearOperator& op, const Vector& x, const SpectralFunction& f,
                       Index k, bool* clamped = nullptr, Index* applies = nullptr);

}  // namespace tracelab
