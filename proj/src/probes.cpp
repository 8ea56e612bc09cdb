#include "tracelab/probes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace tracelab {

Matrix draw_block(Index n, Index b, ProbeDistribution dist, RngStream& stream) {
  if (n < 1 || b < 1) throw DimensionError("draw_block: sizes must be positive");
  if (b > n) throw DimensionError("draw_block: block width exceeds dimension");
  Matrix Z(n, b);
  for (Index c = 0; c < b; ++c)
    for (Index i = 0; i < n; ++i)
      Z(i, c) = dist == ProbeDistribution::gaussian ? stream.normal() : stream.rademacher();
  return Z;
}

Matrix orthonormalize(const Matrix& Z) {
  const Index n = Z.rows(), b = Z.cols();
  if (b < 1 || b > n) throw DimensionError("orthonormalize: need 1 <= b <= n");
  Eigen::HouseholderQR<Matrix> qr(Z);
  const Matrix R = qr.matrixQR().topRows(b).triangularView<Eigen::Upper>();
  const double scale = std::max(R.diagonal().cwiseAbs().maxCoeff(), Z.norm());
  Matrix Q = qr.householderQ() * Matrix::Identity(n, b);
  for (Index c = 0; c < b; ++c) {
    const double r = R(c, c);
    if (!(std::abs(r) > 1e-12 * scale))
      throw NumericalError("orthonormalize: input block is numerically rank deficient");
    if (r < 0) Q.col(c) = -Q.col(c);
  }
  return Q;
}

Matrix draw_orthonormal_block(Index n, Index b, ProbeDistribution dist, RngStream& stream) {
  for (int attempt = 0;; ++attempt) {
    try {
      return orthonormalize(draw_block(n, b, dist, stream));
    } catch (const NumericalError&) {
      if (attempt >= 3)
        throw NumericalError("draw_orthonormal_block: rank deficient after 3 redraws");
    }
  }
}

namespace {

// First s entries of a uniformly shuffled 0..N-1, touching only O(s) memory.
std::vector<Index> partial_shuffle(Index N, Index s, RngStream& stream) {
  std::unordered_map<Index, Index> swapped;
  swapped.reserve(static_cast<std::size_t>(2 * s));
  auto value_at = [&](Index i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  std::vector<Index> out(static_cast<std::size_t>(s));
  for (Index i = 0; i < s; ++i) {
    const Index j = i + static_cast<Index>(stream.below(static_cast<std::uint64_t>(N - i)));
    const Index vi = value_at(i), vj = value_at(j);
    out[i] = vj;
    swapped[j] = vi;
  }
  return out;
}

void check_subset_size(Index N, Index s) {
  if (s < 1 || s > N) {
    std::ostringstream os;
    os << "subset size " << s << " must lie in [1, " << N << "]";
    throw DimensionError(os.str());
  }
}

}  // namespace

IndexSet sample_index_set(Index n, Index s, RngStream& stream) {
  check_subset_size(n, s);
  std::vector<Index> idx = partial_shuffle(n, s, stream);
  std::sort(idx.begin(), idx.end());
  return IndexSet(std::move(idx));
}

IndexSet sample_index_set(const IndexSet& population, Index s, RngStream& stream) {
  check_subset_size(population.size(), s);
  std::vector<Index> pos = partial_shuffle(population.size(), s, stream);
  for (Index& p : pos) p = population[p];
  std::sort(pos.begin(), pos.end());
  return IndexSet(std::move(pos));
}

std::vector<IndexSet> sample_disjoint_index_sets(const IndexSet& population, Index s, Index t,
                                                 RngStream& stream) {
  if (t < 1) throw DimensionError("number of subsets must be positive");
  check_subset_size(population.size(), s);
  if (s * t > population.size())
    throw DimensionError("disjoint subsets: t*s exceeds the population size");
  const std::vector<Index> pos = partial_shuffle(population.size(), s * t, stream);
  std::vector<IndexSet> sets;
  sets.reserve(static_cast<std::size_t>(t));
  for (Index b = 0; b < t; ++b) {
    std::vector<Index> idx;
    idx.reserve(static_cast<std::size_t>(s));
    for (Index a = 0; a < s; ++a) idx.push_back(population[pos[b * s + a]]);
    std::sort(idx.begin(), idx.end());
    sets.emplace_back(std::move(idx));
  }
  return sets;
}

}  // namespace tracelab
