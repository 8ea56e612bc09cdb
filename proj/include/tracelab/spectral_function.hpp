#pragma once

#include "tracelab/common.hpp"

#include <functional>
#include <string>
#include <vector>

namespace tracelab {

// Scalar function applied to a spectrum, together with the part of the real line where it is
// defined. The domain drives node clamping in quadrature and dense evaluation.
struct SpectralFunction {
  enum class Domain { real_line, nonnegative, positive };

  std::string name;
  std::function<double(double)> eval;
  Domain domain = Domain::real_line;

  double operator()(double x) const { return eval(x); }
};

namespace functions {
SpectralFunction identity();
SpectralFunction square();
SpectralFunction power(int d);
SpectralFunction exponential();
// lambda - ln(lambda) - 1, the KL integrand.
SpectralFunction kl();
SpectralFunction square_root();
SpectralFunction log();
// sum_i c_i x^i
SpectralFunction polynomial(std::vector<double> coeffs);
}  // namespace functions

// Maps a spectral value into the domain of f. Values slightly outside (relative to `scale`, the
// largest magnitude in the spectrum) are clamped and `clamped` is set; anything further out
// raises DomainError carrying the offending value.
double clamp_to_domain(double x, double scale, const SpectralFunction& f, bool& clamped);

// Dense symmetric evaluations through an eigendecomposition.
Matrix matrix_function(const Matrix& A, const SpectralFunction& f);
double trace_function(const Matrix& A, const SpectralFunction& f);

}  // namespace tracelab
