#include "runners.hpp"

#include "svg_plot.hpp"
#include "tracelab/tracelab.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace tracelab::cli {

namespace {

RngStream root_stream(const RunConfig& c) { return RngStream(c.seed, experiment_id(c.experiment)); }

struct Accumulator {
  std::uint64_t matvecs = 0;
  std::uint64_t entries = 0;
  void add(const TraceEstimate& e) {
    matvecs += e.matvecs_used;
    entries += e.entries_used;
  }
};

void finish_counters(ExperimentResult& r, const Accumulator& a) {
  r.matvecs = a.matvecs;
  r.entries = a.entries;
}

// KL pair of shifted RBF kernels on an equispaced grid of [0, 1].
struct KlProblem {
  Matrix sigma1, sigma2;
  GaussianPair pair;
  OperatorHandle A;  // L^T Sigma1 L
  double exact = 0.0;
};

KlProblem make_kl_problem(Index n, double sigma, double shift1, double shift2) {
  KlProblem p;
  const Matrix K = rbf_kernel(n, sigma);
  p.sigma1 = K + shift1 * Matrix::Identity(n, n);
  p.sigma2 = K + shift2 * Matrix::Identity(n, n);
  p.pair = GaussianPair::from_dense(p.sigma1, p.sigma2);
  p.A = make_sandwich(p.pair.precision_factor, p.pair.sigma1);
  p.exact = kl_exact(p.sigma1, p.sigma2);
  return p;
}

enum class Method { hutchinson, bolt, hutchpp };
const char* method_name(Method m) {
  switch (m) {
    case Method::hutchinson: return "hutchinson";
    case Method::bolt: return "bolt";
    default: return "hutchpp";
  }
}

// One KL estimate spending `budget` matvecs with k Lanczos steps per probe column.
TraceEstimate kl_trace_at_budget(const KlProblem& p, Method method, Index budget, Index k,
                                 const RngStream& stream) {
  const Index columns = budget / k;
  switch (method) {
    case Method::hutchinson: return hutchinson_slq(*p.A, functions::kl(), columns, k, stream);
    case Method::bolt: {
      BoltOptions o;
      o.q = 1;
      o.k = k;
      o.b = columns;
      return kl_slq(p.pair, o, stream).estimate;
    }
    default: return hutchpp(*p.A, functions::kl(), columns, k, stream);
  }
}

}  // namespace

// ---------------------------------------------------------------------------------------------

ExperimentResult run_convergence(const RunConfig& c) {
  ParamReader pr(c.params);
  const Index n = pr.integer("n", 2, 5000);
  const double sigma = pr.real("sigma", 0.0, HUGE_VAL, true);
  const double shift1 = pr.real("shift1", 0.0, HUGE_VAL, true);
  const double shift2 = pr.real("shift2", 0.0, HUGE_VAL, true);
  const Index k = pr.integer("k", 1, 1000);
  const Index reps = pr.integer("reps", 1, 100000);
  const auto budgets = pr.integers("budgets", 1);
  for (auto N : budgets) {
    pr.require(N >= 3 * k, "budgets", "every budget must be at least 3k = " + std::to_string(3 * k));
    pr.require(N / k <= n, "budgets", "budget/k must not exceed n");
  }
  pr.finish();

  const KlProblem p = make_kl_problem(n, sigma, shift1, shift2);
  const RngStream root = root_stream(c);
  ExperimentResult r;
  r.table = Table({"method", "budget", "median_rel_error", "q25_rel_error", "q75_rel_error", "mean_matvecs"});
  Plot plot{"KL relative error vs matvec budget", "matrix-vector products", "median relative error",
            true, true, {}};
  Accumulator acc;
  const Method methods[] = {Method::hutchinson, Method::bolt, Method::hutchpp};
  for (std::size_t mi = 0; mi < 3; ++mi) {
    Series series{method_name(methods[mi]), {}, {}, SeriesStyle::line};
    for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
      std::vector<double> errors(static_cast<std::size_t>(reps));
      std::vector<TraceEstimate> ests(static_cast<std::size_t>(reps));
      parallel_for(errors.size(), c.threads, [&](std::size_t rep) {
        const RngStream s = root.substream(mi).substream(bi).substream(rep);
        ests[rep] = kl_trace_at_budget(p, methods[mi], budgets[bi], k, s);
        errors[rep] = std::abs(0.5 * ests[rep].value - p.exact) / p.exact;
      });
      double mv = 0.0;
      for (const auto& e : ests) {
        acc.add(e);
        mv += static_cast<double>(e.matvecs_used);
      }
      const double med = median(errors);
      r.table.add_row({method_name(methods[mi]), budgets[bi], med, quantile(errors, 0.25),
                       quantile(errors, 0.75), mv / static_cast<double>(reps)});
      series.x.push_back(static_cast<double>(budgets[bi]));
      series.y.push_back(med);
    }
    plot.series.push_back(series);
  }
  r.svg = plot.render();
  r.summary = {{"kl_exact", p.exact}};
  finish_counters(r, acc);
  return r;
}

// ---------------------------------------------------------------------------------------------

ExperimentResult run_flat_spectrum(const RunConfig& c) {
  ParamReader pr(c.params);
  const Index n = pr.integer("n", 4, 1000000);
  const Index trials = pr.integer("trials", 1, 1000000);
  const auto budgets = pr.integers("budgets", 6);
  for (auto N : budgets) pr.require(N / 2 <= n && N % 6 == 0, "budgets", "need multiples of 6 with N/2 <= n");
  pr.finish();

  RngStream spectrum_stream = root_stream(c).substream(0);
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = 1.0 + spectrum_stream.uniform();
  const double exact = d.squaredNorm();
  const auto op = make_function_operator(n, [d](const Matrix& X) -> Matrix { return d.asDiagonal() * X; });
  const SpectralFunction f = functions::square();

  ExperimentResult r;
  r.table = Table({"method", "budget", "trial", "abs_error", "rel_error", "matvecs"});
  Table medians({"budget", "bolt_median_abs_error", "hutchpp_median_abs_error"});
  Plot plot{"Flat spectrum: median absolute error", "matrix-vector products", "median |error|", true, true, {}};
  Series sb{"bolt", {}, {}, SeriesStyle::line}, sh{"hutchpp", {}, {}, SeriesStyle::line};
  Accumulator acc;
  bool bolt_wins = true;
  const RngStream root = root_stream(c);
  for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
    const Index N = budgets[bi];
    std::vector<TraceEstimate> eb(static_cast<std::size_t>(trials)), eh(static_cast<std::size_t>(trials));
    parallel_for(eb.size(), c.threads, [&](std::size_t t) {
      BoltOptions o;
      o.q = 1;
      o.k = 2;
      o.b = N / 2;
      eb[t] = bolt(*op, f, o, root.substream(1).substream(bi).substream(t));
      eh[t] = hutchpp(*op, f, N / 3, 3, root.substream(2).substream(bi).substream(t));
    });
    std::vector<double> ab, ah;
    for (Index t = 0; t < trials; ++t) {
      const auto& x = eb[static_cast<std::size_t>(t)];
      const auto& y = eh[static_cast<std::size_t>(t)];
      acc.add(x);
      acc.add(y);
      ab.push_back(std::abs(x.value - exact));
      ah.push_back(std::abs(y.value - exact));
      r.table.add_row({"bolt", N, t, ab.back(), ab.back() / exact, static_cast<std::int64_t>(x.matvecs_used)});
      r.table.add_row({"hutchpp", N, t, ah.back(), ah.back() / exact, static_cast<std::int64_t>(y.matvecs_used)});
    }
    const double mb = median(ab), mh = median(ah);
    bolt_wins = bolt_wins && mb < mh;
    medians.add_row({N, mb, mh});
    sb.x.push_back(static_cast<double>(N));
    sb.y.push_back(mb);
    sh.x.push_back(static_cast<double>(N));
    sh.y.push_back(mh);
  }
  plot.series = {sb, sh};
  r.svg = plot.render();
  r.extra_tables.push_back({"flat-spectrum-medians.csv", medians});
  r.summary = {{"exact_trace", exact}, {"bolt_median_below_hutchpp_at_every_budget", bolt_wins}};
  finish_counters(r, acc);
  return r;
}

// ---------------------------------------------------------------------------------------------

ExperimentResult run_trace_recovery(const RunConfig& c) {
  ParamReader pr(c.params);
  const Index m = pr.integer("m", 1, 1 << 20);
  const Index n = pr.integer("n", 1, std::int64_t{1} << 40);
  const Index s = pr.integer("s", 1, n);
  const Index blocks = pr.integer("blocks", 1, 100000000);
  pr.finish();

  const auto gram = make_gram(m, n, mix64(c.seed ^ experiment_id("trace-recovery")));
  // Reference value from all column norms (outside the counted access path).
  const double exact = gram->frobenius_squared();
  const RngStream root = root_stream(c);
  std::vector<double> per_block(static_cast<std::size_t>(blocks));
  parallel_for(per_block.size(), c.threads, [&](std::size_t i) {
    RngStream st = root.substream(i);
    per_block[i] = subblock_trace(*gram, sample_index_set(n, s, st));
  });

  std::vector<Index> grid;
  for (Index decade = 1; decade <= blocks; decade *= 10)
    for (Index f : {1, 2, 5})
      if (f * decade < blocks) grid.push_back(f * decade);
  grid.push_back(blocks);

  ExperimentResult r;
  r.table = Table({"t", "sampling_ratio", "estimate", "rel_error", "emp_std"});
  Plot plot{"Trace recovery vs sampling ratio", "st/n", "relative error", true, true, {}};
  Series se{"rel_error", {}, {}, SeriesStyle::line}, ss{"emp_std", {}, {}, SeriesStyle::line};
  double sum = 0.0, sumsq = 0.0;
  Index done = 0;
  for (Index t : grid) {
    for (; done < t; ++done) {
      const double v = per_block[static_cast<std::size_t>(done)];
      sum += v;
      sumsq += v * v;
    }
    const double mean = sum / static_cast<double>(t);
    const double var = t > 1 ? std::max(0.0, (sumsq - sum * mean) / static_cast<double>(t - 1)) : 0.0;
    const double rel = std::abs(mean - exact) / exact;
    const double emp_std = std::sqrt(var / static_cast<double>(t)) / exact;
    const double ratio = static_cast<double>(s) * static_cast<double>(t) / static_cast<double>(n);
    r.table.add_row({t, ratio, mean, rel, emp_std});
    se.x.push_back(ratio);
    se.y.push_back(rel);
    ss.x.push_back(ratio);
    ss.y.push_back(emp_std);
  }
  plot.series = {se, ss};
  r.svg = plot.render();
  const auto counters = gram->counters();
  r.matvecs = counters.matvecs;
  r.entries = counters.entries;
  r.summary = {{"exact_trace", exact}, {"diagonal_reads", counters.entries}};
  return r;
}

// ---------------------------------------------------------------------------------------------

ExperimentResult run_localization(const RunConfig& c) {
  ParamReader pr(c.params);
  const Index n = pr.integer("n", 2, 20000);
  const Index bw = pr.integer("bandwidth", 0, n - 1);
  const Index degree = pr.integer("degree", 0, 200);
  const Index s = pr.integer("s", 1, n);
  const Index trials = pr.integer("trials", 1, 1000000);
  const Index r_max = pr.integer("r_max", 0, n);
  pr.finish();

  // Random symmetric banded matrix with a dominant diagonal.
  RngStream ms = root_stream(c).substream(0);
  Matrix A = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    A(i, i) = 1.0 + 2.0 * ms.uniform();
    for (Index j = i + 1; j <= std::min(n - 1, i + bw); ++j) A(i, j) = A(j, i) = ms.uniform() - 0.5;
  }
  const SpectralFunction f = functions::exponential();
  const auto [lo, hi] = gershgorin_interval(A);
  const ChebFilter p = cheb_fit(f, lo, hi, degree);
  const Matrix pA = p.apply_to(A);

  std::vector<IndexSet> sets;
  for (Index t = 0; t < trials; ++t) {
    RngStream st = root_stream(c).substream(1 + static_cast<std::uint64_t>(t));
    sets.push_back(sample_index_set(n, s, st));
  }

  ExperimentResult r;
  r.table = Table({"r", "max_block_residual", "max_trace_gap", "gap_bound", "covers_degree"});
  Plot plot{"Localization residual vs buffer radius", "buffer radius r", "max |[p(A)]_SS - localized|",
            false, true, {}};
  Series res{"block residual", {}, {}, SeriesStyle::line}, gap{"trace gap", {}, {}, SeriesStyle::line};
  const double bound = 2.0 * static_cast<double>(s) * p.sup_error;
  for (Index radius = 0; radius <= r_max; ++radius) {
    std::vector<double> resid(sets.size()), gaps(sets.size());
    parallel_for(sets.size(), c.threads, [&](std::size_t t) {
      const IndexSet& S = sets[t];
      const LocalizedBlock lb = localized_filter_block(A, p, S, radius);
      resid[t] = (lb.block - pA(S.indices(), S.indices())).cwiseAbs().maxCoeff();
      gaps[t] = localization_trace_gap(A, f, S, radius);
    });
    const double mr = *std::max_element(resid.begin(), resid.end());
    const double mg = *std::max_element(gaps.begin(), gaps.end());
    r.table.add_row({radius, mr, mg, bound, static_cast<std::int64_t>(radius >= degree / 2)});
    res.x.push_back(static_cast<double>(radius));
    res.y.push_back(mr);
    gap.x.push_back(static_cast<double>(radius));
    gap.y.push_back(mg);
  }
  plot.series = {res, gap};
  r.svg = plot.render();
  r.summary = {{"interval", {lo, hi}}, {"chebyshev_sup_error", p.sup_error}};
  return r;
}

// ---------------------------------------------------------------------------------------------

ExperimentResult run_wishart(const RunConfig& c) {
  ParamReader pr(c.params);
  const Index n = pr.integer("n", 1, 100000);
  const Index m = pr.integer("m", 1, 100000);
  const Index s_max = pr.integer("s_max", 1, n);
  const Index s_step = pr.integer("s_step", 1, 100000);
  const Index trials = pr.integer("trials", 1, 100000000);
  const Index draws = pr.integer("draws", 1, 100000000);
  const Index hist_m = pr.integer("hist_m", 1, 10000);
  const Index bins = pr.integer("bins", 1, 10000);
  pr.finish();

  std::vector<Index> grid;
  for (Index s = s_step; s <= s_max; s += s_step) grid.push_back(s);
  for (Index s : {Index{1}, m - 1, m, m + 1, s_max})
    if (s >= 1 && s <= s_max) grid.push_back(s);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const RngStream root = root_stream(c);
  ExperimentResult r;
  r.table = Table({"s", "full_rank_fraction", "median_min_eig"});
  Series frac{"full-rank fraction", {}, {}, SeriesStyle::line};
  for (Index s : grid) {
    const RankExperiment e = subblock_rank_experiment(n, m, s, trials, root.substream(static_cast<std::uint64_t>(s)),
                                                      Matrix(), c.threads);
    r.table.add_row({s, e.fraction, median(e.min_eigs)});
    frac.x.push_back(static_cast<double>(s));
    frac.y.push_back(e.fraction);
  }
  r.svg = Plot{"Subblock full-rank probability (n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")",
               "subblock size s", "P(full rank)", false, false, {frac}}
              .render();

  const std::vector<double> xs = scaled_min_eigenvalues(hist_m, draws, root.substream(0), c.threads);
  const double ks = ks_distance(xs, &min_eig_cdf);
  const double hmax = std::max(quantile(xs, 0.99), 1e-12);
  const double width = hmax / static_cast<double>(bins);
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (double x : xs) {
    const auto b = static_cast<std::size_t>(x / width);
    if (b < counts.size()) counts[b] += 1.0;
  }
  Table hist({"bin_center", "empirical_density", "limit_density", "empirical_cdf", "limit_cdf"});
  Series emp{"empirical", {}, {}, SeriesStyle::bars}, lim{"limit density", {}, {}, SeriesStyle::line};
  double cum = 0.0;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    const double center = (static_cast<double>(b) + 0.5) * width;
    const double dens = counts[b] / (static_cast<double>(draws) * width);
    cum += counts[b] / static_cast<double>(draws);
    hist.add_row({center, dens, min_eig_density(center), cum, min_eig_cdf((static_cast<double>(b) + 1.0) * width)});
    emp.x.push_back(center);
    emp.y.push_back(dens);
    lim.x.push_back(center);
    lim.y.push_back(min_eig_density(center));
  }
  r.extra_tables.push_back({"wishart-min-eig.csv", hist});
  r.extra_figures.push_back(
      {"wishart-min-eig.svg", Plot{"Scaled minimum eigenvalue, m=" + std::to_string(hist_m), "m * lambda_min",
                                   "density", false, false, {emp, lim}}
                                  .render()});
  r.summary = {{"ks_distance", ks}, {"draws", draws}};
  return r;
}

// ---------------------------------------------------------------------------------------------

ExperimentResult run_hodlr(const RunConfig& c) {
  ParamReader pr(c.params);
  const Index n = pr.integer("n", 2, 1 << 16);
  const double ell = pr.real("ell", 0.0, HUGE_VAL, true);
  const double nu = pr.real("nu", 0.0);
  const auto levels = pr.integers("levels", 1, 20);
  const auto ranks = pr.integers("ranks", 1, 1 << 16);
  const Index over = pr.integer("oversample", 0, 1 << 16);
  const Index power = pr.integer("power_iterations", 0, 100);
  const Index t = pr.integer("t", 1, 1000000);
  const Index s = pr.integer("s", 1, n);
  const Index q = pr.integer("q", 1, 100000);
  const Index k = pr.integer("k", 1, n);
  const Index b = pr.integer("b", 1, n);
  for (auto L : levels) pr.require(n % (Index{1} << L) == 0, "levels", "n must be divisible by 2^levels");
  pr.finish();

  const Matrix K = osc_kernel(n, ell, nu);
  const RngStream root = root_stream(c);
  ExperimentResult r;
  r.table = Table({"levels", "rank", "rel_frobenius_error", "eig_min", "eig_max", "proxy_kl", "dense_proxy_kl",
                   "source_matvecs", "matvec_budget", "stored_entries", "fallback"});
  Plot plot{"HODLR reconstruction error", "levels", "relative Frobenius error", false, true, {}};
  Accumulator acc;
  for (std::size_t ri = 0; ri < ranks.size(); ++ri) {
    Series series{"rank " + std::to_string(ranks[ri]), {}, {}, SeriesStyle::line};
    for (std::size_t li = 0; li < levels.size(); ++li) {
      const auto op = make_dense(K);
      PeelOptions o;
      o.levels = levels[li];
      o.rank = ranks[ri];
      o.oversample = over;
      o.power_iterations = power;
      o.threads = c.threads;
      const HodlrMatrix H = peel_build(*op, o, root.substream(ri).substream(li).substream(0));
      const std::uint64_t used = op->counters().matvecs;
      const double err = (H.dense() - K).norm() / K.norm();
      const auto [lo, hi] = eig_span(H, *op);
      const HodlrProxyKl kl = hodlr_proxy_kl(H, op, t, s, q, k, root.substream(ri).substream(li).substream(1), b);
      const double dense = dense_proxy_kl(H, *op);
      acc.add(kl.estimate.estimate);
      acc.matvecs += used;
      r.table.add_row({levels[li], ranks[ri], err, lo, hi, kl.value, dense, static_cast<std::int64_t>(used),
                       static_cast<std::int64_t>(peel_matvec_budget(n, o)),
                       static_cast<std::int64_t>(H.stored_entries()), static_cast<std::int64_t>(kl.fallback)});
      series.x.push_back(static_cast<double>(levels[li]));
      series.y.push_back(err);
    }
    plot.series.push_back(series);
  }
  r.svg = plot.render();
  finish_counters(r, acc);
  return r;
}

// ---------------------------------------------------------------------------------------------

ExperimentResult run_variance_check(const RunConfig& c) {
  ParamReader pr(c.params);
  const auto ns = pr.integers("n", 2, 2000);
  const auto bs = pr.integers("b", 1, 2000);
  const Index draws = pr.integer("draws", 2, 100000000);
  for (auto n : ns)
    for (auto b : bs) pr.require(b <= n, "b", "block sizes must not exceed n");
  pr.finish();

  const RngStream root = root_stream(c);
  ExperimentResult r;
  r.table = Table({"n", "b", "closed_form", "empirical", "rel_diff"});
  Plot plot{"BOLT variance: closed form vs empirical", "block size b", "variance", true, true, {}};
  Accumulator acc;
  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    RngStream ms = root.substream(ni).substream(0);
    const Matrix A = random_spd(ns[ni], ms);
    const auto op = make_dense(A);
    const SpectrumSummary spec = SpectrumSummary::from_matrix(A);
    Series closed{"closed form n=" + std::to_string(ns[ni]), {}, {}, SeriesStyle::line};
    Series emp{"empirical n=" + std::to_string(ns[ni]), {}, {}, SeriesStyle::markers};
    for (std::size_t bi = 0; bi < bs.size(); ++bi) {
      BoltOptions o;
      o.q = draws;
      o.k = 1;
      o.b = bs[bi];
      o.threads = c.threads;
      const TraceEstimate e = bolt(*op, functions::identity(), o, root.substream(ni).substream(1 + bi));
      acc.add(e);
      const double cf = bolt_variance_closed_form(spec, functions::identity(), bs[bi]);
      const double ev = e.sample_variance();
      r.table.add_row({ns[ni], bs[bi], cf, ev, cf > 0 ? std::abs(ev - cf) / cf : std::abs(ev)});
      closed.x.push_back(static_cast<double>(bs[bi]));
      closed.y.push_back(cf);
      emp.x.push_back(static_cast<double>(bs[bi]));
      emp.y.push_back(ev);
    }
    plot.series.push_back(closed);
    plot.series.push_back(emp);
  }
  r.svg = plot.render();
  finish_counters(r, acc);
  return r;
}

// ---------------------------------------------------------------------------------------------

namespace {

Plot error_bars(const std::string& title, const Table& t) {
  Series s{"relative error", {}, t.numeric_column("rel_error"), SeriesStyle::bars};
  for (std::size_t i = 0; i < s.y.size(); ++i) s.x.push_back(static_cast<double>(i + 1));
  for (double& y : s.y) y = std::max(y, 1e-16);
  return Plot{title, "case", "relative error", false, true, {s}};
}

}  // namespace

ExperimentResult run_w2_demo(const RunConfig& c) {
  ParamReader pr(c.params);
  const Index n_small = pr.integer("n_small", 2, 500);
  const Index n = pr.integer("n", 2, 5000);
  const double sigma1 = pr.real("sigma1", 0.0, HUGE_VAL, true);
  const double shift1 = pr.real("shift1", 0.0);
  const double sigma2 = pr.real("sigma2", 0.0, HUGE_VAL, true);
  const double shift2 = pr.real("shift2", 0.0);
  const Index b = pr.integer("b", 1, n);
  const Index k = pr.integer("k", 1, n);
  const Index q = pr.integer("q", 1, 100000);
  const Index reps = pr.integer("reps", 1, 100000);
  pr.finish();

  const RngStream root = root_stream(c);
  ExperimentResult r;
  r.table = Table({"case", "n", "b", "k", "q", "exact", "median_estimate", "rel_error"});
  Accumulator acc;

  // Exact regime: b = n gives identity probes; Sigma2 has rank n/2.
  {
    RngStream ms = root.substream(0);
    const Matrix S1 = random_spd(n_small, ms);
    const Matrix G = draw_block(n_small, std::max<Index>(1, n_small / 2), ProbeDistribution::gaussian, ms);
    const Matrix S2 = G * G.transpose();
    const double exact = w2_exact(S1, S2);
    BoltOptions o;
    o.b = n_small;
    o.k = 1;
    const W2Estimate e = w2_slq(GaussianPair::from_dense(S1, S2), o, root.substream(1));
    acc.add(e.tau_estimate);
    r.table.add_row({"exact_regime_singular_sigma2", n_small, n_small, 1, 1, exact, e.value,
                     std::abs(e.value - exact) / exact});
  }
  // Kernel pair; the second covariance is numerically singular.
  {
    const Matrix S1 = rbf_kernel(n, sigma1) + shift1 * Matrix::Identity(n, n);
    const Matrix S2 = rbf_kernel(n, sigma2) + shift2 * Matrix::Identity(n, n);
    const double exact = w2_exact(S1, S2);
    const GaussianPair pair = GaussianPair::from_dense(S1, S2);
    std::vector<double> values(static_cast<std::size_t>(reps)), errors(values.size());
    std::vector<TraceEstimate> ests(values.size());
    parallel_for(values.size(), c.threads, [&](std::size_t i) {
      BoltOptions o;
      o.b = b;
      o.k = k;
      o.q = q;
      const W2Estimate e = w2_slq(pair, o, root.substream(2).substream(i));
      values[i] = e.value;
      errors[i] = std::abs(e.value - exact) / exact;
      ests[i] = e.tau_estimate;
    });
    for (const auto& e : ests) acc.add(e);
    r.table.add_row({"rbf_kernels", n, b, k, q, exact, median(values), median(errors)});
  }
  r.svg = error_bars("W2 estimator vs dense oracle", r.table).render();
  finish_counters(r, acc);
  return r;
}

ExperimentResult run_kl_demo(const RunConfig& c) {
  ParamReader pr(c.params);
  const Index n_small = pr.integer("n_small", 2, 500);
  const Index n = pr.integer("n", 2, 5000);
  const double sigma = pr.real("sigma", 0.0, HUGE_VAL, true);
  const double shift1 = pr.real("shift1", 0.0, HUGE_VAL, true);
  const double shift2 = pr.real("shift2", 0.0, HUGE_VAL, true);
  const Index k = pr.integer("k", 1, 1000);
  const Index reps = pr.integer("reps", 1, 100000);
  const auto budgets = pr.integers("budgets", 1);
  for (auto N : budgets) pr.require(N >= k && N / k <= n, "budgets", "need k <= budget <= k*n");
  pr.finish();

  const RngStream root = root_stream(c);
  ExperimentResult r;
  r.table = Table({"case", "n", "budget", "exact", "median_estimate", "rel_error"});
  Accumulator acc;
  {
    RngStream ms = root.substream(0);
    const Matrix S1 = random_spd(n_small, ms), S2 = random_spd(n_small, ms);
    const double exact = kl_exact(S1, S2);
    BoltOptions o;
    o.b = n_small;
    o.k = n_small;
    const KlEstimate e = kl_slq(GaussianPair::from_dense(S1, S2), o, root.substream(1));
    acc.add(e.estimate);
    r.table.add_row({"exact_regime", n_small, static_cast<std::int64_t>(e.estimate.matvecs_used), exact, e.value,
                     std::abs(e.value - exact) / exact});
  }
  const KlProblem p = make_kl_problem(n, sigma, shift1, shift2);
  for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
    std::vector<double> values(static_cast<std::size_t>(reps)), errors(values.size());
    std::vector<TraceEstimate> ests(values.size());
    parallel_for(values.size(), c.threads, [&](std::size_t i) {
      ests[i] = kl_trace_at_budget(p, Method::bolt, budgets[bi], k, root.substream(2).substream(bi).substream(i));
      values[i] = 0.5 * ests[i].value;
      errors[i] = std::abs(values[i] - p.exact) / p.exact;
    });
    for (const auto& e : ests) acc.add(e);
    r.table.add_row({"rbf_bolt", n, budgets[bi], p.exact, median(values), median(errors)});
  }
  r.svg = error_bars("KL estimator vs dense oracle", r.table).render();
  finish_counters(r, acc);
  return r;
}

}  // namespace tracelab::cli
