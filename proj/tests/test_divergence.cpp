#include <doctest.h>

#include "test_support.hpp"
#include "tracelab/divergence.hpp"
#include "tracelab/wishart.hpp"

#include <cmath>

using namespace tracelab;
using namespace tracelab::testing;

TEST_CASE("kl_exact") {
  RngStream s(1);
  const Matrix S = random_spd(5, s);
  CHECK(std::abs(kl_exact(S, S)) < 1e-12);
  CHECK(kl_exact(Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 1.0)) ==
        doctest::Approx(0.5 * (2.0 - std::log(2.0) - 1.0)));

  const Matrix S1 = random_spd(5, s), S2 = random_spd(5, s);
  const auto A = make_sandwich(make_precision_factor(S2), make_dense(S1));
  CHECK(kl_exact(S1, S2) == doctest::Approx(0.5 * trace_function(to_dense(*A), functions::kl())).epsilon(1e-8));
  CHECK(kl_exact(S1, S2) >= -1e-10);

  Matrix singular = Matrix::Identity(3, 3);
  singular(2, 2) = 0.0;
  CHECK_THROWS_AS(kl_exact(singular, Matrix::Identity(3, 3)), DomainError);
}

TEST_CASE("kl_slq") {
  RngStream s(2);
  SUBCASE("equal covariances") {
    const Matrix S = random_spd(30, s);
    const KlEstimate est = kl_slq(GaussianPair::from_dense(S, S), {3, 6, 4}, RngStream(3));
    CHECK(std::abs(est.value) < 1e-8);
  }
  SUBCASE("exact regime") {
    const Matrix S1 = random_spd(8, s), S2 = random_spd(8, s);
    const KlEstimate est = kl_slq(GaussianPair::from_dense(S1, S2), {1, 8, 8}, RngStream(4));
    CHECK(est.value == doctest::Approx(kl_exact(S1, S2)).epsilon(1e-8));
  }
  SUBCASE("singular Sigma2 is rejected") {
    Matrix S2 = Matrix::Identity(4, 4);
    S2(0, 0) = 0.0;
    CHECK_THROWS_AS(kl_slq(GaussianPair::from_dense(Matrix::Identity(4, 4), S2), {1, 2, 2}, RngStream(1)),
                    DomainError);
  }
}

TEST_CASE("w2_exact") {
  CHECK(std::abs(w2_exact(Matrix::Identity(4, 4), Matrix::Identity(4, 4))) < 1e-12);
  CHECK(w2_exact(Matrix::Constant(1, 1, 4.0), Matrix::Constant(1, 1, 9.0)) == doctest::Approx(1.0));

  // Brute-force check: for commuting (simultaneously diagonal) covariances the optimal coupling is
  // coordinatewise, W2^2 = sum (sqrt a_i - sqrt b_i)^2, here with one singular matrix.
  RngStream s(3);
  const Matrix Q = draw_orthonormal_block(6, 6, ProbeDistribution::gaussian, s);
  Vector a(6), b(6);
  a << 1, 2, 0, 4, 0.5, 3;
  b << 2, 0.1, 1, 1, 0.5, 0;
  const double expected = (a.cwiseSqrt() - b.cwiseSqrt()).squaredNorm();
  const Matrix S1 = Q * a.asDiagonal() * Q.transpose(), S2 = Q * b.asDiagonal() * Q.transpose();
  CHECK(w2_exact(S1, S2) == doctest::Approx(expected).epsilon(1e-8));
  CHECK(w2_exact(S1, S1) == doctest::Approx(0.0).scale(10.0));
}

TEST_CASE("w2_slq") {
  RngStream s(4);
  SUBCASE("equal diagonal covariances") {
    const Matrix D = diagonal({1, 2, 3, 4, 5, 6});
    const W2Estimate exact = w2_slq(GaussianPair::from_dense(D, D), {1, 1, 6}, RngStream(5));
    CHECK(std::abs(exact.value) < 1e-10);
    // Partial blocks are unbiased but random.
    const W2Estimate est = w2_slq(GaussianPair::from_dense(D, D), {400, 3, 2}, RngStream(5));
    CHECK(std::abs(est.value) <= 4.0 * 2.0 * est.tau_estimate.standard_error());
  }
  SUBCASE("exact regime") {
    const Matrix S1 = random_spd(8, s), S2 = random_spd(8, s);
    const W2Estimate est = w2_slq(GaussianPair::from_dense(S1, S2), {1, 8, 8}, RngStream(6));
    CHECK(std::abs(est.value - w2_exact(S1, S2)) < 1e-6);
  }
  SUBCASE("singular covariances need no inversion") {
    const Matrix G1 = draw_block(8, 3, ProbeDistribution::gaussian, s);
    const Matrix G2 = draw_block(8, 5, ProbeDistribution::gaussian, s);
    const Matrix S1 = G1 * G1.transpose(), S2 = G2 * G2.transpose();
    const W2Estimate est = w2_slq(GaussianPair::from_dense(S1, S2), {1, 8, 8}, RngStream(7));
    CHECK(std::abs(est.value - w2_exact(S1, S2)) < 1e-6);
  }
}

TEST_CASE("symmetrization identities") {
  RngStream s(8);
  const Matrix S1 = random_spd(7, s), S2 = random_spd(7, s);
  const Matrix R = psd_root(S1);
  CHECK((R.transpose() * R - S1).cwiseAbs().maxCoeff() < 1e-10);
  const Matrix C = R * S2 * R.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (C + C.transpose()));
  Eigen::EigenSolver<Matrix> ges(S2 * S1);
  std::vector<double> ref;
  for (Index i = 0; i < 7; ++i) ref.push_back(ges.eigenvalues()(i).real());
  std::sort(ref.begin(), ref.end());
  for (Index i = 0; i < 7; ++i) CHECK(es.eigenvalues()(i) == doctest::Approx(ref[i]).epsilon(1e-8));

  Matrix notpsd = Matrix::Identity(3, 3);
  notpsd(1, 1) = -1.0;
  CHECK_THROWS_AS(psd_root(notpsd), NumericalError);
}

TEST_CASE("proxy KL") {
  SUBCASE("identity operator") {
    ProxyKlOptions o;
    o.t = 4;
    o.s = 3;
    CHECK(std::abs(proxy_kl(make_dense(Matrix::Identity(10, 10)), o, RngStream(1)).value) < 1e-12);
  }
  SUBCASE("s = n reduces to the full functional") {
    RngStream s(2);
    const Matrix A = random_spd(16, s);
    ProxyKlOptions o;
    o.t = 3;
    o.s = 16;
    o.b = 16;
    o.k = 1;
    CHECK(proxy_kl(make_dense(A), o, RngStream(3)).value ==
          doctest::Approx(0.5 * trace_function(A, functions::kl())).epsilon(1e-10));
  }
  SUBCASE("unbiased for the full functional's subblock mean") {
    RngStream s(4);
    const Matrix A = random_spd(6, s);
    // E_S[(n/s) 1/2 tr f(A_S)] by enumerating all 3-subsets.
    double expected = 0.0;
    int count = 0;
    for (Index i = 0; i < 6; ++i)
      for (Index j = i + 1; j < 6; ++j)
        for (Index k = j + 1; k < 6; ++k) {
          const IndexSet S({i, j, k});
          expected += 2.0 * 0.5 * trace_function(A(S.indices(), S.indices()), functions::kl());
          ++count;
        }
    expected /= count;
    ProxyKlOptions o;
    o.t = 20000;
    o.s = 3;
    o.b = 1;
    o.q = 1;
    const ProxyKlEstimate est = proxy_kl(make_dense(A), o, RngStream(5));
    CHECK(std::abs(est.value - expected) <= 4.0 * 0.5 * est.estimate.standard_error());
  }
  SUBCASE("Wishart sample covariance: finite below the sample count, singular above") {
    RngStream s(6);
    const WishartSample w = sample_wishart(Matrix::Identity(200, 200), 50, s);
    const auto op = make_dense(w.sigma_tilde / 50.0);
    ProxyKlOptions o;
    o.t = 4;
    o.s = 50;
    o.b = 2;
    o.q = 2;
    const ProxyKlEstimate ok = proxy_kl(op, o, RngStream(7));
    CHECK(std::isfinite(ok.value));
    CHECK(ok.singular_blocks == 0);

    o.s = 64;
    const ProxyKlEstimate bad = proxy_kl(op, o, RngStream(8));
    CHECK(bad.singular_blocks > 0);
    CHECK(std::isinf(bad.value));

    o.sample_count = 50;
    const ProxyKlEstimate capped = proxy_kl(op, o, RngStream(9));
    CHECK(capped.s_used == 50);
    CHECK(capped.singular_blocks == 0);
  }
}
