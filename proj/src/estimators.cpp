#include "tracelab/estimators.hpp"

#include "tracelab/lanczos.hpp"
#include "tracelab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tracelab {

double TraceEstimate::sample_variance() const {
  const std::size_t q = per_sample_values.size();
  if (q < 2) return 0.0;
  const double mean = std::accumulate(per_sample_values.begin(), per_sample_values.end(), 0.0) / q;
  double ss = 0.0;
  for (double x : per_sample_values) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(q - 1);
}

double TraceEstimate::standard_error() const {
  const std::size_t q = per_sample_values.size();
  return q < 2 ? 0.0 : std::sqrt(sample_variance() / static_cast<double>(q));
}

namespace {

struct SampleResult {
  double x = 0.0;
  bool clamped = false;
  bool breakdown = false;
};

void finalize(TraceEstimate& est, const std::vector<SampleResult>& samples) {
  est.per_sample_values.clear();
  est.per_sample_values.reserve(samples.size());
  double sum = 0.0;
  for (const auto& s : samples) {
    est.per_sample_values.push_back(s.x);
    sum += s.x;
    est.flags.clamped_nodes |= s.clamped;
    est.flags.early_breakdown |= s.breakdown;
  }
  est.q_effective = static_cast<Index>(samples.size());
  est.value = samples.empty() ? 0.0 : sum / static_cast<double>(samples.size());
}

void record_usage(TraceEstimate& est, const LinearOperator& op, const CounterSnapshot& before) {
  const CounterSnapshot after = op.counters();
  est.matvecs_used += after.matvecs - before.matvecs;
  est.entries_used += after.entries - before.entries;
}

bool is_identity(const SpectralFunction& f) { return f.name == "identity"; }

}  // namespace

TraceEstimate hutchinson_slq(const LinearOperator& op, const SpectralFunction& f, Index q, Index k,
                             const RngStream& stream, int threads) {
  if (q < 1 || k < 1) throw DimensionError("hutchinson_slq: q and k must be positive");
  const Index n = op.size();
  const CounterSnapshot before = op.counters();
  std::vector<SampleResult> samples(static_cast<std::size_t>(q));
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    RngStream s = stream.substream(i);
    Vector z = draw_block(n, 1, ProbeDistribution::rademacher, s).col(0);
    z /= z.norm();
    const JacobiMatrix J = lanczos(op, z, k);
    const QuadratureResult r = quadrature(J, f);
    samples[i] = {static_cast<double>(n) * r.value, r.clamped, J.early_breakdown};
  });
  TraceEstimate est;
  finalize(est, samples);
  record_usage(est, op, before);
  return est;
}

TraceEstimate bolt(const LinearOperator& op, const SpectralFunction& f, const BoltOptions& opts,
                   const RngStream& stream) {
  const Index n = op.size();
  if (opts.q < 1 || opts.k < 1) throw DimensionError("bolt: q and k must be positive");
  if (opts.b < 1 || opts.b > n) {
    std::ostringstream os;
    os << "bolt: block size " << opts.b << " must lie in [1, " << n << "]";
    throw DimensionError(os.str());
  }
  const CounterSnapshot before = op.counters();
  const double scale = static_cast<double>(n) / static_cast<double>(opts.b);
  std::vector<SampleResult> samples(static_cast<std::size_t>(opts.q));
  parallel_for(samples.size(), opts.threads, [&](std::size_t i) {
    Matrix V;
    if (opts.b == n) {
      V = Matrix::Identity(n, n);
    } else {
      RngStream s = stream.substream(i);
      V = draw_orthonormal_block(n, opts.b, opts.dist, s);
    }
    const JacobiMatrix J = block_lanczos(op, V, opts.k);
    const QuadratureResult r = quadrature(J, f);
    samples[i] = {scale * r.value, r.clamped, J.early_breakdown};
  });
  TraceEstimate est;
  finalize(est, samples);
  record_usage(est, op, before);
  return est;
}

TraceEstimate hutchpp(const LinearOperator& op, const SpectralFunction& f, Index m, Index k,
                      const RngStream& stream) {
  if (m < 3) throw DimensionError("hutchpp: need at least 3 probes");
  if (k < 1) throw DimensionError("hutchpp: k must be positive");
  const Index n = op.size();
  const Index s = std::min(m / 3, n);
  const Index g = m / 3;
  const CounterSnapshot before = op.counters();
  bool clamped = false;
  const bool plain = is_identity(f);

  auto f_action = [&](const Matrix& X) {
    if (plain) return op.apply(X);
    Matrix Y(n, X.cols());
    for (Index c = 0; c < X.cols(); ++c)
      Y.col(c) = function_action(op, X.col(c), f, k, &clamped);
    return Y;
  };

  RngStream sketch_stream = stream.substream(0);
  RngStream probe_stream = stream.substream(1);
  const Matrix G = draw_block(n, s, ProbeDistribution::gaussian, sketch_stream);
  const Matrix Y = f_action(G);

  // Orthonormal basis of range(Y); rank-deficient sketches keep only the live directions.
  Eigen::ColPivHouseholderQR<Matrix> qr(Y);
  qr.setThreshold(1e-12);
  const Index rank = qr.rank();
  Matrix Q = qr.householderQ() * Matrix::Identity(n, rank);

  double low_rank_part = 0.0;
  if (rank > 0) {
    const Matrix FQ = f_action(Q);
    low_rank_part = (Q.transpose() * FQ).trace();
  }

  Matrix P = draw_block(n, g, ProbeDistribution::gaussian, probe_stream);
  if (rank > 0) P -= Q * (Q.transpose() * P);
  const Matrix FP = f_action(P);

  std::vector<SampleResult> samples(static_cast<std::size_t>(g));
  for (Index i = 0; i < g; ++i) samples[i] = {low_rank_part + P.col(i).dot(FP.col(i)), clamped};

  TraceEstimate est;
  finalize(est, samples);
  record_usage(est, op, before);
  return est;
}

double subblock_trace(const LinearOperator& op, const IndexSet& S) {
  if (S.empty()) throw DimensionError("subblock_trace: empty index set");
  const Vector d = op.diagonal(S);
  return static_cast<double>(op.size()) / static_cast<double>(S.size()) * d.sum();
}

TraceEstimate subblock_slq(const OperatorHandle& op, const SpectralFunction& f,
                           const SubblockOptions& opts, const RngStream& stream) {
  const Index n = op->size();
  if (opts.eps && *opts.eps < 0) throw DomainError("subblock_slq: eps must be nonnegative", *opts.eps);
  if (opts.s < 1 || opts.t < 1 || opts.q < 1) throw DimensionError("subblock_slq: s, t, q must be positive");
  if (opts.b < 1 || opts.b > opts.s) throw DimensionError("subblock_slq: need 1 <= b <= s");
  const Index k = opts.k.value_or(opts.s);
  const CounterSnapshot before = op->counters();

  IndexSet support;
  if (opts.assume_full_support) {
    support = IndexSet::range(0, n);
  } else {
    const Vector d = op->diagonal();
    const double threshold = opts.eps.value_or(1e-10 * std::max(d.maxCoeff(), 0.0));
    std::vector<Index> idx;
    for (Index i = 0; i < n; ++i)
      if (d(i) > threshold) idx.push_back(i);
    support = IndexSet(std::move(idx));
  }
  const Index r_eff = support.size();

  TraceEstimate est;
  if (r_eff == 0) {
    record_usage(est, *op, before);
    return est;
  }

  if (opts.t == 1 || r_eff <= opts.s) {
    // Reduce to plain BOLT on the supported part of the operator.
    OperatorHandle target;
    if (r_eff == n)
      target = op;
    else if (r_eff <= opts.s && (op->capabilities().entry_access || op->capabilities().subblock_extract))
      target = make_dense(op->principal_subblock(support));
    else
      target = make_restricted(op, support);
    BoltOptions bo{opts.q, k, std::min(opts.b, r_eff), opts.dist, opts.threads};
    est = bolt(*target, f, bo, stream.substream(0));
    est.matvecs_used = 0;
    est.entries_used = 0;
    est.block_status.assign(1, est.flags.clamped_nodes ? BlockStatus::clamped : BlockStatus::ok);
    record_usage(est, *op, before);
    return est;
  }

  std::vector<IndexSet> blocks(static_cast<std::size_t>(opts.t));
  if (opts.policy == SubsetPolicy::disjoint) {
    RngStream s = stream.substream(0);
    blocks = sample_disjoint_index_sets(support, opts.s, opts.t, s);
  } else {
    for (Index i = 0; i < opts.t; ++i) {
      RngStream s = stream.substream(1 + static_cast<std::uint64_t>(i));
      blocks[i] = sample_index_set(support, opts.s, s);
    }
  }

  struct BlockResult {
    double eta = 0.0;
    BlockStatus status = BlockStatus::ok;
    bool breakdown = false;
  };
  std::vector<BlockResult> results(blocks.size());
  parallel_for(blocks.size(), opts.threads, [&](std::size_t i) {
    const OperatorHandle block = make_dense(op->principal_subblock(blocks[i]));
    BoltOptions bo{opts.q, k, opts.b, opts.dist, 1};
    const RngStream probe_stream = stream.substream(1 + static_cast<std::uint64_t>(i)).substream(1);
    try {
      const TraceEstimate inner = bolt(*block, f, bo, probe_stream);
      results[i].eta = inner.value;  // (s/b)-scaled block quadrature, estimates tr f(A_S)
      results[i].breakdown = inner.flags.early_breakdown;
      if (inner.flags.clamped_nodes)
        results[i].status = opts.tolerate_singular_blocks ? BlockStatus::singular : BlockStatus::clamped;
    } catch (const DomainError&) {
      if (!opts.tolerate_singular_blocks) throw;
      results[i].status = BlockStatus::singular;
    }
  });

  const double scale = static_cast<double>(r_eff) / static_cast<double>(opts.s);
  std::vector<SampleResult> samples;
  for (const auto& r : results) {
    est.block_status.push_back(r.status);
    if (r.status == BlockStatus::singular) continue;
    samples.push_back({scale * r.eta, r.status == BlockStatus::clamped, r.breakdown});
  }
  finalize(est, samples);
  record_usage(est, *op, before);
  return est;
}

}  // namespace tracelab
