#include <doctest.h>

#include "test_support.hpp"
#include "tracelab/chebyshev.hpp"

#include <cmath>
#include <set>

using namespace tracelab;
using namespace tracelab::testing;

namespace {

Matrix random_tridiagonal(Index n, RngStream& s) {
  Matrix A = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    A(i, i) = 2.0 * s.uniform() - 1.0;
    if (i + 1 < n) A(i, i + 1) = A(i + 1, i) = 0.5 * s.normal();
  }
  return A;
}

}  // namespace

TEST_CASE("Chebyshev fits") {
  CHECK(cheb_fit(functions::identity(), -1.0, 3.0, 1).sup_error <= 1e-14);
  CHECK(cheb_fit(functions::exponential(), 0.0, 2.0, 20).sup_error <= 1e-12);
  CHECK(cheb_fit(functions::kl(), 0.5, 2.0, 30).sup_error < 1e-10);
  CHECK_THROWS_AS(cheb_fit(functions::log(), 0.0, 1.0, 5), DomainError);
  CHECK_THROWS_AS(cheb_fit(functions::identity(), 1.0, 1.0, 5), DomainError);
}

TEST_CASE("Clenshaw agrees with the direct cosine sum") {
  const ChebFilter p = cheb_fit(functions::exponential(), -2.0, 1.0, 15);
  for (int g = 0; g <= 1000; ++g) {
    const double x = -2.0 + 3.0 * g / 1000.0;
    CHECK(std::abs(p(x) - p.eval_direct(x)) <= 1e-12);
  }
}

TEST_CASE("property: matrix Clenshaw matches eigendecomposition") {
  RngStream s(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 5 + static_cast<Index>(s.below(60));
    const Matrix A = random_spd(n, s, -1.0, 2.0);
    const auto [lo, hi] = gershgorin_interval(A);
    const ChebFilter p = cheb_fit(functions::exponential(), lo, hi, 12);
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    Vector pv(n);
    for (Index i = 0; i < n; ++i) pv(i) = p(es.eigenvalues()(i));
    const Matrix ref = es.eigenvectors() * pv.asDiagonal() * es.eigenvectors().transpose();
    CHECK((p.apply_to(A) - ref).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("Gershgorin interval encloses the spectrum") {
  RngStream s(2);
  const Matrix A = random_tridiagonal(30, s);
  const auto [lo, hi] = gershgorin_interval(A);
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  CHECK(lo < es.eigenvalues().minCoeff());
  CHECK(hi > es.eigenvalues().maxCoeff());
}

TEST_CASE("graph balls") {
  const SparsityPattern path = SparsityPattern::banded(10, 1);
  CHECK(graph_ball(path, IndexSet({5}), 0) == IndexSet({5}));
  CHECK(graph_ball(path, IndexSet({5}), 2) == IndexSet({3, 4, 5, 6, 7}));
  CHECK(graph_ball(path, IndexSet({0, 9}), 1) == IndexSet({0, 1, 8, 9}));
}

TEST_CASE("property: graph balls match Floyd-Warshall distances") {
  RngStream s(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 20 + static_cast<Index>(s.below(45));
    Matrix A = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (s.uniform() < 2.0 / n) A(i, j) = A(j, i) = 1.0;
    const Index inf = n + 1;
    std::vector<std::vector<Index>> d(n, std::vector<Index>(n, inf));
    for (Index i = 0; i < n; ++i) {
      d[i][i] = 0;
      for (Index j = 0; j < n; ++j)
        if (A(i, j) != 0.0) d[i][j] = 1;
    }
    for (Index k = 0; k < n; ++k)
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    const IndexSet S = sample_index_set(n, 3, s);
    for (Index r = 0; r <= 4; ++r) {
      std::vector<Index> expect;
      for (Index v = 0; v < n; ++v) {
        Index best = inf;
        for (Index u : S) best = std::min(best, d[u][v]);
        if (best <= r) expect.push_back(v);
      }
      CHECK(graph_ball(SparsityPattern::from_matrix(A), S, r).indices() == expect);
    }
  }
}

TEST_CASE("localized filter blocks") {
  RngStream s(4);
  const Matrix A = random_tridiagonal(100, s);
  const auto [lo, hi] = gershgorin_interval(A);

  SUBCASE("constant filter") {
    const ChebFilter c0 = cheb_fit(functions::polynomial({2.5}), lo, hi, 0);
    const LocalizedBlock blk = localized_filter_block(A, c0, IndexSet({3, 50, 70}), 1);
    CHECK((blk.block - 2.5 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("buffer radius of half the degree is exact") {
    const ChebFilter p = cheb_fit(functions::exponential(), lo, hi, 5);
    const IndexSet S = sample_index_set(100, 10, s);
    const Matrix full = p.apply_to(A)(S.indices(), S.indices());
    const LocalizedBlock blk = localized_filter_block(A, p, S, 5);
    CHECK(blk.exact);
    CHECK((blk.block - full).cwiseAbs().maxCoeff() <= 1e-10);

    // Walks of length <= 5 between points of S stay within distance 2 of S.
    const LocalizedBlock half = localized_filter_block(A, p, S, 2);
    CHECK(half.exact);
    CHECK((half.block - full).cwiseAbs().maxCoeff() <= 1e-10);

    const LocalizedBlock shallow = localized_filter_block(A, p, S, 1);
    CHECK_FALSE(shallow.exact);
    CHECK((shallow.block - full).cwiseAbs().maxCoeff() > 1e-10);
  }
}

TEST_CASE("property: exact localization on random banded matrices") {
  RngStream s(5);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 40 + static_cast<Index>(s.below(40));
    const Matrix A = random_tridiagonal(n, s);
    const auto [lo, hi] = gershgorin_interval(A);
    const Index m = 1 + static_cast<Index>(s.below(8));
    const Index r = m / 2 + static_cast<Index>(s.below(3));
    const ChebFilter p = cheb_fit(functions::exponential(), lo, hi, m);
    const IndexSet S = sample_index_set(n, 1 + static_cast<Index>(s.below(8)), s);
    const Matrix full = p.apply_to(A)(S.indices(), S.indices());
    CHECK((localized_filter_block(A, p, S, r).block - full).cwiseAbs().maxCoeff() <= 1e-10);
    if (m >= 2) CHECK((localized_filter_block(A, p, S, m / 2 - 1).block - full).cwiseAbs().maxCoeff() > 1e-12);
  }
}

TEST_CASE("trace gap bound") {
  RngStream s(6);
  SUBCASE("diagonal matrices have no gap") {
    const Matrix D = diagonal({0.5, 1.5, 2.0, 3.0});
    CHECK(localization_trace_gap(D, functions::exponential(), IndexSet({1, 3}), 0) == 0.0);
  }
  SUBCASE("tridiagonal, s = 8, degree 20") {
    const Matrix A = random_tridiagonal(100, s);
    const auto [lo, hi] = gershgorin_interval(A);
    const ChebFilter p = cheb_fit(functions::exponential(), lo, hi, 20);
    const IndexSet S = sample_index_set(100, 8, s);
    CHECK(localization_trace_gap(A, functions::exponential(), S, 20) <= 2.0 * 8.0 * p.sup_error);
  }
  SUBCASE("buffered partition recovers the full trace") {
    const Matrix A = random_tridiagonal(100, s);
    const auto [lo, hi] = gershgorin_interval(A);
    const Index m = 10;
    const ChebFilter p = cheb_fit(functions::exponential(), lo, hi, m);
    double gap = 0.0;
    for (Index b = 0; b < 5; ++b) gap += localization_trace_gap(A, functions::exponential(), IndexSet::range(20 * b, 20 * b + 20), m);
    CHECK(gap <= 5 * 2.0 * 20.0 * p.sup_error);
  }
}
