#include <doctest.h>

#include "tracelab/linop.hpp"
#include "tracelab/probes.hpp"
#include "tracelab/spectral_function.hpp"

#include <cmath>
#include <numbers>

using namespace tracelab;

namespace {

Matrix random_spd(Index n, RngStream& s) {
  const Matrix G = draw_block(n, n, ProbeDistribution::gaussian, s);
  return G * G.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
}

double min_eig_ratio(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() / es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("dense operator basics") {
  const auto I = make_dense(Matrix::Identity(3, 3));
  Vector e1 = Vector::Zero(3);
  e1(0) = 1;
  CHECK(I->apply(e1) == e1);

  Matrix D = Vector(Vector::LinSpaced(3, 1, 3)).asDiagonal();
  CHECK(make_dense(D)->entry(1, 1) == 2.0);

  CHECK_THROWS_AS(make_dense(Matrix::Zero(2, 3)), DimensionError);
  CHECK_THROWS_AS(I->apply(Matrix(Matrix::Zero(4, 1))), DimensionError);
  CHECK_THROWS_AS(I->entry(3, 0), DimensionError);
}

TEST_CASE("asymmetric input is symmetrized") {
  Matrix M(2, 2);
  M << 1, 2, 0, 1;
  const auto op = make_dense(M);
  CHECK(op->entry(0, 1) == doctest::Approx(1.0));
  CHECK(op->entry(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("RBF kernel operator is symmetric and PSD") {
  const KernelSpec spec{equispaced_grid(200), RbfKernel{2.0}};
  const Matrix K = spec.kernel_matrix();
  CHECK((K - K.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(min_eig_ratio(K) >= -1e-8);
  const auto op = make_dense(K);
  RngStream s(1);
  CHECK(symmetry_defect(*op, 100, s) <= 1e-10);
}

TEST_CASE("oscillatory kernel entries") {
  const KernelSpec spec{{0.0, 0.1}, OscExpKernel{0.5, 2.0}};
  const Matrix K = spec.kernel_matrix();
  CHECK(K(0, 0) == 1.0);
  CHECK(K(0, 1) == doctest::Approx(std::exp(-0.2) * std::cos(2 * std::numbers::pi * 0.2)));
  CHECK(K(1, 0) == K(0, 1));
}

TEST_CASE("counters") {
  RngStream s(2);
  const auto op = make_dense(random_spd(6, s));
  op->reset_counters();
  for (int i = 0; i < 5; ++i) op->apply(Matrix(Matrix::Ones(6, 3)));
  CHECK(op->counters().matvecs == 15);
  op->principal_subblock(IndexSet({0, 2, 4}));
  CHECK(op->counters().entries == 9);
  op->diagonal(IndexSet({1, 3}));
  CHECK(op->counters().entries == 11);
  op->entry(0, 0);
  CHECK(op->counters().entries == 12);
  op->reset_counters();
  CHECK(op->counters().matvecs == 0);
  CHECK(op->counters().entries == 0);
}

TEST_CASE("principal_subblock") {
  Matrix D = Vector(Vector::LinSpaced(4, 1, 4)).asDiagonal();
  Matrix expect(2, 2);
  expect << 1, 0, 0, 3;
  CHECK(make_dense(D)->principal_subblock(IndexSet({0, 2})) == expect);

  RngStream s(3);
  const Matrix A = random_spd(6, s);
  const auto op = make_dense(A);
  const Matrix sub = op->principal_subblock(IndexSet({1, 3, 5}));
  for (Index a = 0; a < 3; ++a)
    for (Index b = 0; b < 3; ++b) CHECK(sub(a, b) == doctest::Approx(A(2 * a + 1, 2 * b + 1)).epsilon(1e-15));

  const auto noaccess = make_function_operator(4, [](const Matrix& X) { return X; });
  CHECK_THROWS_AS(noaccess->principal_subblock(IndexSet({0})), CapabilityError);
  CHECK_THROWS_AS(op->principal_subblock(IndexSet({1, 7})), DimensionError);
}

TEST_CASE("Gram operator") {
  SUBCASE("scalar case") {
    const auto g = make_gram(1, 1, 99);
    const double c = g->column(0)(0);
    CHECK(g->entry(0, 0) == doctest::Approx(c * c).epsilon(1e-14));
    CHECK(g->diagonal().sum() == doctest::Approx(c * c).epsilon(1e-14));
  }
  SUBCASE("trace equals the Frobenius norm of the regenerated factor") {
    const auto g = make_gram(4, 8, 7);
    double brute = 0.0;
    for (Index j = 0; j < 8; ++j) brute += g->column(j).squaredNorm();
    CHECK(g->diagonal().sum() == doctest::Approx(brute).epsilon(1e-13));
    CHECK(g->frobenius_squared() == doctest::Approx(brute).epsilon(1e-13));
    // Odd row count exercises the unpaired normal draw.
    const auto odd = make_gram(5, 3, 7);
    for (Index j = 0; j < 3; ++j)
      CHECK(odd->column_norm_squared(j) == doctest::Approx(odd->column(j).squaredNorm()).epsilon(1e-13));
  }
  SUBCASE("dense realization is B^T B") {
    const auto g = make_gram(6, 5, 3);
    Matrix B(6, 5);
    for (Index j = 0; j < 5; ++j) B.col(j) = g->column(j);
    const Matrix A = B.transpose() * B;
    CHECK((to_dense(*g) - A).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g->principal_subblock(IndexSet::range(0, 5)) - A).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(g->entry(1, 3) == doctest::Approx(A(1, 3)));
    RngStream s(1);
    CHECK(symmetry_defect(*g, 100, s) <= 1e-10);
    CHECK(min_eig_ratio(A) >= -1e-8);
  }
  SUBCASE("large operator subblocks without forming A") {
    const auto g = make_gram(2048, 1000000, 1);
    RngStream s(5);
    const IndexSet S = sample_index_set(1000000, 64, s);
    const Matrix first = g->principal_subblock(S);
    const Matrix second = g->principal_subblock(S);
    CHECK(first == second);
    CHECK(first.rows() == 64);
    CHECK(min_eig_ratio(first) > 0.0);
    CHECK(g->counters().entries == 2 * 64 * 64);
  }
}

TEST_CASE("sandwich operator") {
  const auto I = make_dense(Matrix::Identity(3, 3));
  const auto A = make_sandwich(I, I);
  CHECK(trace_function(to_dense(*A), functions::kl()) == doctest::Approx(0.0));

  const auto two = make_dense(Matrix::Constant(1, 1, 2.0));
  const auto B = make_sandwich(make_dense(Matrix::Identity(1, 1)), two);
  CHECK(trace_function(to_dense(*B), functions::kl()) == doctest::Approx(1.0 - std::log(2.0)));

  // L from Sigma^{-1} = L L^T makes L^T Sigma L the identity.
  RngStream s(6);
  const Matrix Sigma = random_spd(5, s);
  const auto C = make_sandwich(make_precision_factor(Sigma), make_dense(Sigma));
  const Matrix Cd = to_dense(*C);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Cd + Cd.transpose()));
  CHECK((es.eigenvalues().array() - 1.0).abs().maxCoeff() < 1e-10);
  CHECK(std::abs(trace_function(Cd, functions::kl())) < 1e-10);

  CHECK_THROWS_AS(make_sandwich(I, make_dense(Matrix::Identity(2, 2))), DimensionError);
}

TEST_CASE("sandwich spectrum equals spec(L L^T Sigma)") {
  RngStream s(12);
  const Matrix S1 = random_spd(7, s), S2 = random_spd(7, s);
  const auto L = make_precision_factor(S2);
  const Matrix A = to_dense(*make_sandwich(L, make_dense(S1)));
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()));
  Eigen::EigenSolver<Matrix> ges(S2.inverse() * S1);
  std::vector<double> ref;
  for (Index i = 0; i < 7; ++i) ref.push_back(ges.eigenvalues()(i).real());
  std::sort(ref.begin(), ref.end());
  for (Index i = 0; i < 7; ++i) CHECK(es.eigenvalues()(i) == doctest::Approx(ref[i]).epsilon(1e-8));
}

TEST_CASE("restricted operator") {
  RngStream s(13);
  const Matrix A = random_spd(6, s);
  const IndexSet S({0, 2, 5});
  const auto R = make_restricted(make_dense(A), S);
  CHECK((to_dense(*R) - A(S.indices(), S.indices())).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(R->entry(1, 2) == A(2, 5));
}

TEST_CASE("symmetry probe flags non-symmetric operators") {
  Matrix M(2, 2);
  M << 1, 5, 0, 1;
  RngStream s(1);
  CHECK(symmetry_defect(*make_general(M), 20, s) > 1e-3);
  CHECK_FALSE(make_general(M)->is_symmetric());
}
