#include <doctest.h>

#include "test_support.hpp"
#include "tracelab/hodlr.hpp"

#include <cmath>

using namespace tracelab;
using namespace tracelab::testing;

namespace {

Matrix osc_kernel(Index n, double ell = 0.03, double nu = 2.0) {
  return KernelSpec{equispaced_grid(n), OscExpKernel{ell, nu}}.kernel_matrix();
}

double rel_frobenius(const Matrix& A, const Matrix& B) { return (A - B).norm() / B.norm(); }

// Symmetric matrix whose off-diagonal blocks at every level have rank <= r.
Matrix hodlr_toy(Index n, Index levels, Index r, RngStream& s) {
  HodlrMatrix H(n, levels);
  for (Index i = 0; i < H.node_count(); ++i) {
    HodlrNode& nd = H.node(i);
    if (H.is_leaf(i)) {
      const Matrix G = draw_block(nd.size, nd.size, ProbeDistribution::gaussian, s);
      nd.D = G * G.transpose() + 4.0 * static_cast<double>(nd.size) * Matrix::Identity(nd.size, nd.size);
    } else {
      nd.U = orthonormalize(draw_block(nd.size / 2, r, ProbeDistribution::gaussian, s));
      nd.V = orthonormalize(draw_block(nd.size / 2, r, ProbeDistribution::gaussian, s));
      nd.S = Vector::LinSpaced(r, 1.0, 0.5);
    }
  }
  return H.dense();
}

}  // namespace

TEST_CASE("tree layout") {
  const HodlrMatrix H(64, 3);
  CHECK(H.node_count() == 15);
  CHECK(H.leaf_size() == 8);
  for (Index i = 0; i < 7; ++i) {
    CHECK(H.node(2 * i + 1).begin == H.node(i).begin);
    CHECK(H.node(2 * i + 1).size + H.node(2 * i + 2).size == H.node(i).size);
    CHECK(H.node(2 * i + 2).begin == H.node(i).begin + H.node(i).size / 2);
  }
  CHECK_THROWS_AS(HodlrMatrix(100, 3), DimensionError);
}

TEST_CASE("peeling a block-diagonal operator") {
  RngStream s(1);
  Matrix A = Matrix::Zero(32, 32);
  A.topLeftCorner(16, 16) = random_spd(16, s);
  A.bottomRightCorner(16, 16) = random_spd(16, s);
  const HodlrMatrix H = peel_build(*make_dense(A), {1, 2, 4, 1}, RngStream(2));
  CHECK(H.node(0).S.cwiseAbs().maxCoeff() < 1e-12);
  CHECK((H.node(1).D - A.topLeftCorner(16, 16)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((H.node(2).D - A.bottomRightCorner(16, 16)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rank-1 off-diagonal toy is reconstructed exactly") {
  RngStream s(3);
  const Matrix A = hodlr_toy(8, 1, 1, s);
  const HodlrMatrix H = peel_build(*make_dense(A), {1, 1, 2, 1}, RngStream(4));
  CHECK((H.dense() - A).cwiseAbs().maxCoeff() <= 1e-10 * A.cwiseAbs().maxCoeff());
}

TEST_CASE("multi-level exact recovery and matvec budget") {
  RngStream s(5);
  const Matrix A = hodlr_toy(128, 3, 3, s);
  const auto op = make_dense(A);
  const PeelOptions opts{3, 3, 5, 1};
  const HodlrMatrix H = peel_build(*op, opts, RngStream(6));
  CHECK(rel_frobenius(H.dense(), A) < 1e-10);
  const std::uint64_t used = op->counters().matvecs;
  CHECK(used == peel_matvec_budget(128, opts));
  const std::uint64_t bound = 3 * 2 * (3 + 5) * (1 + 1) * 2 + 128 / 8;
  CHECK(used <= bound);
}

TEST_CASE("apply agrees with the dense reconstruction") {
  const HodlrMatrix H = peel_build(*make_dense(osc_kernel(128)), {3, 4, 6, 1}, RngStream(7));
  RngStream s(8);
  const Matrix X = draw_block(128, 3, ProbeDistribution::gaussian, s);
  const Matrix ref = H.dense() * X;
  CHECK((H.apply(X) - ref).norm() <= 1e-8 * ref.norm());

  HodlrMatrix I(16, 2);
  for (Index i = 3; i < 7; ++i) I.node(i).D = Matrix::Identity(4, 4);
  CHECK(I.apply(X.topRows(16)) == X.topRows(16));
}

TEST_CASE("apply cost and storage grow like n log n") {
  for (Index n : {128, 256, 512}) {
    const Index levels = 4, rank = 4;
    const HodlrMatrix H = peel_build(*make_dense(osc_kernel(n)), {levels, rank, 4, 1}, RngStream(9));
    H.reset_flop_count();
    H.apply(Matrix(Matrix::Ones(n, 1)));
    const double leaf = static_cast<double>(n >> levels);
    CHECK(static_cast<double>(H.flop_count()) <= 10.0 * n * levels * rank + 2.0 * n * leaf);
    CHECK(static_cast<double>(H.stored_entries()) <= 2.0 * n * levels * rank + n * leaf);
  }
}

TEST_CASE("reconstruction improves with rank") {
  const Matrix K = osc_kernel(256);
  const auto op = make_dense(K);
  double previous = 1e300;
  for (Index r : {1, 2, 3}) {
    const double err = rel_frobenius(peel_build(*op, {2, r, 8, 1}, RngStream(10)).dense(), K);
    CHECK(err <= 1.2 * previous + 1e-14);
    previous = err;
  }
  CHECK(previous < 1e-8);  // the 1D kernel has rank-2 off-diagonal blocks
}

TEST_CASE("hierarchical solve") {
  SUBCASE("identity") {
    HodlrMatrix I(16, 2);
    for (Index i = 3; i < 7; ++i) I.node(i).D = Matrix::Identity(4, 4);
    const Vector y = Vector::LinSpaced(16, -1, 1);
    CHECK((HodlrSolver(I).solve(y) - y).norm() < 1e-14);
  }
  SUBCASE("matches dense solves") {
    RngStream s(11);
    for (Index n : {64, 256, 512}) {
      const Matrix A = hodlr_toy(n, 3, 2, s);
      const HodlrMatrix H = peel_build(*make_dense(A), {3, 2, 4, 1}, RngStream(12));
      const Matrix Y = draw_block(n, 2, ProbeDistribution::gaussian, s);
      const Matrix X = hodlr_solve(H, Y);
      const Matrix ref = H.dense().lu().solve(Y);
      CHECK((X - ref).norm() <= 1e-8 * ref.norm());
      CHECK((H.apply(X) - Y).norm() <= 1e-7 * Y.norm());
    }
  }
  SUBCASE("singular leaves are reported with their position") {
    HodlrMatrix H(8, 1);
    H.node(1).D = Matrix::Identity(4, 4);
    H.node(2).D = Matrix::Zero(4, 4);
    try {
      HodlrSolver solver(H);
      FAIL("expected a NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("level 1, block 1") != std::string::npos);
    }
  }
}

TEST_CASE("certification of the compressed operator") {
  SUBCASE("exact compression gives B = I") {
    RngStream s(13);
    const Matrix A = hodlr_toy(64, 2, 2, s);
    const auto op = make_dense(A);
    const HodlrMatrix H = peel_build(*op, {2, 2, 4, 1}, RngStream(14));
    const auto [lo, hi] = eig_span(H, *op);
    CHECK(lo == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(hi == doctest::Approx(1.0).epsilon(1e-8));
    const HodlrProxyKl kl = hodlr_proxy_kl(H, op, 4, 16, 2, 16, RngStream(15));
    CHECK(std::abs(kl.value) < 1e-6);
  }
  SUBCASE("rank-starved build widens the span") {
    RngStream s(16);
    const Matrix A = hodlr_toy(64, 1, 5, s);
    const auto op = make_dense(A);
    const auto good = eig_span(peel_build(*op, {1, 5, 4, 1}, RngStream(17)), *op);
    const auto poor = eig_span(peel_build(*op, {1, 1, 4, 1}, RngStream(17)), *op);
    CHECK(poor.second - poor.first > 1e-3);
    CHECK(poor.second - poor.first > 100.0 * (good.second - good.first));
  }
  SUBCASE("subblock proxy matches its expectation on a small problem") {
    const Matrix K = osc_kernel(64, 0.1, 2.0) + 0.05 * Matrix::Identity(64, 64);
    const auto op = make_dense(K);
    const HodlrMatrix H = peel_build(*op, {1, 1, 4, 1}, RngStream(18));
    const HodlrProxyKl kl = hodlr_proxy_kl(H, op, 200, 16, 1, 16, RngStream(19), 16);

    // Reference: the subset average of (n/s) tr f(B_S) over many uniform subsets, from dense B.
    const Matrix B = to_dense(*make_bsym(H, op).bsym);
    RngStream rs(20);
    std::vector<double> block_values;
    for (int i = 0; i < 4000; ++i) {
      const IndexSet S = sample_index_set(64, 16, rs);
      block_values.push_back(0.5 * 4.0 * trace_function(B(S.indices(), S.indices()), functions::kl()));
    }
    const double ref = mean(block_values);
    const double ref_se = std::sqrt(variance(block_values) / 4000.0);
    CHECK(kl.value > 0.0);
    CHECK(std::abs(kl.value - ref) <= 4.0 * (0.5 * kl.estimate.estimate.standard_error() + ref_se));
    // Compressions of the operator convex KL integrand never exceed the full functional.
    CHECK(ref <= dense_proxy_kl(H, *op) * (1.0 + 1e-9));
  }
}
