#pragma once

#include "tracelab/common.hpp"
#include "tracelab/index_set.hpp"
#include "tracelab/rng.hpp"

#include <vector>

namespace tracelab {

enum class ProbeDistribution { rademacher, gaussian };

// n x b block with i.i.d. entries, filled column by column from the stream.
Matrix draw_block(Index n, Index b, ProbeDistribution dist, RngStream& stream);

// Thin Householder QR with the diagonal of R forced positive; for Gaussian input the result is
// Haar distributed on the Stiefel manifold. Throws NumericalError on numerical rank deficiency.
Matrix orthonormalize(const Matrix& Z);

// draw_block followed by orthonormalize, redrawing up to three times on rank deficiency.
Matrix draw_orthonormal_block(Index n, Index b, ProbeDistribution dist, RngStream& stream);

// Uniform s-subset of {0..n-1} by a sparse partial Fisher-Yates shuffle, returned sorted.
IndexSet sample_index_set(Index n, Index s, RngStream& stream);
// Uniform s-subset of an arbitrary population.
IndexSet sample_index_set(const IndexSet& population, Index s, RngStream& stream);

// t mutually disjoint uniform s-subsets of the population (requires t*s <= population size).
std::vector<IndexSet> sample_disjoint_index_sets(const IndexSet& population, Index s, Index t,
                                                 RngStream& stream);

}  // namespace tracelab
