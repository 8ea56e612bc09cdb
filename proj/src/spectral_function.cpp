#include "tracelab/spectral_function.hpp"

#include <cmath>
#include <sstream>

namespace tracelab {

namespace functions {

SpectralFunction identity() { return {"identity", [](double x) { return x; }}; }

SpectralFunction square() { return {"square", [](double x) { return x * x; }}; }

SpectralFunction power(int d) {
  if (d < 0) throw DomainError("power: negative exponent", d);
  return {"power" + std::to_string(d), [d](double x) { return std::pow(x, d); }};
}

SpectralFunction exponential() { return {"exp", [](double x) { return std::exp(x); }}; }

SpectralFunction kl() {
  return {"kl", [](double x) { return x - std::log(x) - 1.0; }, SpectralFunction::Domain::positive};
}

SpectralFunction square_root() {
  return {"sqrt", [](double x) { return std::sqrt(x); }, SpectralFunction::Domain::nonnegative};
}

SpectralFunction log() {
  return {"log", [](double x) { return std::log(x); }, SpectralFunction::Domain::positive};
}

SpectralFunction polynomial(std::vector<double> coeffs) {
  return {"polynomial", [c = std::move(coeffs)](double x) {
            double acc = 0.0;
            for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
            return acc;
          }};
}

}  // namespace functions

double clamp_to_domain(double x, double scale, const SpectralFunction& f, bool& clamped) {
  using Domain = SpectralFunction::Domain;
  switch (f.domain) {
    case Domain::real_line:
      return x;
    case Domain::positive: {
      const double floor = 1e-12 * scale;
      if (!(x > 0.0)) {
        std::ostringstream os;
        os << f.name << ": spectral value " << x << " is not positive";
        throw DomainError(os.str(), x);
      }
      if (x <= floor) {
        clamped = true;
        return floor;
      }
      return x;
    }
    case Domain::nonnegative: {
      if (x >= 0.0) return x;
      if (x >= -1e-8 * scale) {
        clamped = true;
        return 0.0;
      }
      std::ostringstream os;
      os << f.name << ": spectral value " << x << " is negative";
      throw DomainError(os.str(), x);
    }
  }
  return x;
}

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> symmetric_eig(const Matrix& A) {
  if (A.rows() != A.cols()) throw DimensionError("matrix function: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigendecomposition failed");
  return es;
}

Vector mapped_spectrum(const Vector& lambda, const SpectralFunction& f) {
  const double scale = lambda.size() ? lambda.cwiseAbs().maxCoeff() : 0.0;
  bool clamped = false;
  Vector out(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) out(i) = f(clamp_to_domain(lambda(i), scale, f, clamped));
  return out;
}

}  // namespace

Matrix matrix_function(const Matrix& A, const SpectralFunction& f) {
  const auto es = symmetric_eig(A);
  const Vector fl = mapped_spectrum(es.eigenvalues(), f);
  return es.eigenvectors() * fl.asDiagonal() * es.eigenvectors().transpose();
}

double trace_function(const Matrix& A, const SpectralFunction& f) {
  return mapped_spectrum(symmetric_eig(A).eigenvalues(), f).sum();
}

}  // namespace tracelab
