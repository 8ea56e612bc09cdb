#include <doctest.h>

#include "test_support.hpp"
#include "tracelab/wishart.hpp"

#include <cmath>

using namespace tracelab;
using namespace tracelab::testing;

TEST_CASE("scalar Wishart is a squared normal") {
  RngStream a(1), b(1);
  const WishartSample w = sample_wishart(Matrix::Identity(1, 1), 1, a);
  const double g = b.normal();
  CHECK(w.sigma_tilde(0, 0) == doctest::Approx(g * g));
}

TEST_CASE("rank of a Wishart sample is the sample count") {
  RngStream s(2);
  const WishartSample w = sample_wishart(random_spd(10, s), 5, s);
  Eigen::JacobiSVD<Matrix> svd(w.sigma_tilde);
  const Vector& sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-10 * sv(0);
  CHECK(rank == 5);
}

TEST_CASE("Wishart mean and subblock mean") {
  RngStream s(3);
  const Matrix Sigma = random_spd(4, s);
  const Index m = 3, draws = 10000;
  Matrix sum = Matrix::Zero(4, 4), sumsq = Matrix::Zero(4, 4);
  for (Index d = 0; d < draws; ++d) {
    const Matrix W = sample_wishart(Sigma, m, s).sigma_tilde;
    sum += W;
    sumsq += W.cwiseProduct(W);
  }
  const Matrix mean = sum / draws;
  const Matrix se = ((sumsq / draws - mean.cwiseProduct(mean)) / (draws - 1.0)).cwiseSqrt();
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) CHECK(std::abs(mean(i, j) - m * Sigma(i, j)) <= 4.0 * se(i, j));
  // Principal subblocks of the sample are Wishart with the projected scale.
  const IndexSet S({1, 3});
  const Matrix sub = mean(S.indices(), S.indices()), target = m * Sigma(S.indices(), S.indices());
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) CHECK(std::abs(sub(i, j) - target(i, j)) <= 4.0 * se(S[i], S[j]));
}

TEST_CASE("full-rank phase transition at s = m") {
  const RngStream base(4);
  for (Index s : {10, 30, 50}) CHECK(subblock_rank_experiment(200, 50, s, 200, base.substream(s)).fraction == 1.0);
  for (Index s : {51, 64, 100}) CHECK(subblock_rank_experiment(200, 50, s, 200, base.substream(s)).fraction == 0.0);
}

TEST_CASE("minimum eigenvalue density") {
  // Composite Simpson on the substituted variable x = u^2 removes the 1/sqrt(x) singularity.
  const int N = 200000;
  const double U = 12.0;
  double integral = 0.0;
  for (int i = 0; i <= N; ++i) {
    const double u = U * i / N;
    const double g = u == 0.0 ? 1.0 : 2.0 * u * min_eig_density(u * u);
    const double w = (i == 0 || i == N) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    integral += w * g;
  }
  integral *= U / N / 3.0;
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));

  const double x = 1e-10;
  CHECK(min_eig_density(x) * 2.0 * std::sqrt(x) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(min_eig_cdf(0.0) == 0.0);
  CHECK(min_eig_cdf(1.0) == doctest::Approx(1.0 - std::exp(-1.5)));
  CHECK_THROWS_AS(min_eig_density(0.0), DomainError);
}

TEST_CASE("scaled minimum eigenvalues follow the limit law") {
  const std::vector<double> xs = scaled_min_eigenvalues(50, 2000, RngStream(5));
  CHECK(ks_distance(xs, &min_eig_cdf) < 0.05);
}
