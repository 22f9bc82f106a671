// sampling.hpp — measurement snapshot simulation and the linear / U-statistic
// estimators with their statistical errors.
#pragma once

#include "qst/recovery.hpp"
#include "qst/rng.hpp"

namespace qst {

// m outcomes of one experiment; patched experiments store one ordinal per
// patch and per snapshot.
struct SnapshotSet {
  std::vector<std::vector<Index>> outcomes;  // [snapshot][patch]
  int n_patches = 1;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string meta;

  Index m() const { return Index(outcomes.size()); }
  Index single(Index j) const { return outcomes[j][0]; }

  void check_bounds(const std::vector<Index>& dims) const {
    require(int(dims.size()) == n_patches, "SnapshotSet: patch count mismatch");
    for (const auto& row : outcomes) {
      require(int(row.size()) == n_patches, "SnapshotSet: ragged outcome row");
      for (int p = 0; p < n_patches; ++p)
        require(row[p] >= 0 && row[p] < dims[p], "SnapshotSet: ordinal out of range");
    }
  }
};

inline SnapshotSet sample_snapshots(const RVec& p, Index m, std::uint64_t seed,
                                    std::uint64_t stream = 0,
                                    std::uint64_t config_hash = 0) {
  require(std::abs(p.sum() - 1.0) <= 1e-8, "sample_snapshots: distribution not normalized");
  DiscreteSampler sampler(p);
  CounterRng rng(seed, stream);
  SnapshotSet out;
  out.seed = seed;
  out.config_hash = config_hash;
  out.outcomes.reserve(std::size_t(m));
  for (Index j = 0; j < m; ++j) out.outcomes.push_back({sampler.draw(rng)});
  return out;
}

struct EstimateResult {
  cplx value{0, 0};
  double stderr_ = 0;
  Index m_used = 0;
  RecoveryFlavor flavor{};
  bool defined = true;  // false e.g. for entropy of a non-positive purity estimate
};

inline EstimateResult estimate_linear(const EstimatorTable& table,
                                      const SnapshotSet& snaps) {
  require(snaps.m() > 0, "estimate_linear: empty snapshot set");
  require(snaps.config_hash == table.map_hash,
          "estimate_linear: snapshots bound to a different map");
  cplx mean = 0;
  for (Index j = 0; j < snaps.m(); ++j) mean += table.o[snaps.single(j)];
  mean /= double(snaps.m());
  double var = 0;
  for (Index j = 0; j < snaps.m(); ++j) var += std::norm(table.o[snaps.single(j)] - mean);
  var /= std::max<Index>(1, snaps.m() - 1);
  return {mean, std::sqrt(var / double(snaps.m())), snaps.m(), table.flavor, true};
}

// Unbiased reconstruction (1/m) sum_j devec(R|z_j>); Hermitian part enforced,
// PSD deliberately not.
inline DensityMatrix reconstruct_state(const RecoveryMap& r, const SnapshotSet& snaps,
                                       BasisPtr sys) {
  require(snaps.config_hash == r.source_hash,
          "reconstruct_state: snapshots bound to a different map");
  Vec acc = Vec::Zero(r.r.rows());
  for (Index j = 0; j < snaps.m(); ++j) acc += r.r.col(snaps.single(j));
  acc /= double(snaps.m());
  Mat est = hermitian_part(devectorize(acc, sys->dim()));
  return {std::move(sys), std::move(est)};
}

// ---- U-statistics ------------------------------------------------------------

// Pair subsampling policy: exact enumeration while C(m,2) <= pair_budget,
// otherwise pair_budget random index pairs.
struct PairPlan {
  std::vector<std::pair<Index, Index>> pairs;
  bool exact = false;
};

inline PairPlan plan_pairs(Index m, std::uint64_t seed, Index pair_budget = 2'000'000) {
  PairPlan plan;
  double n_exact = 0.5 * double(m) * double(m - 1);
  if (n_exact <= double(pair_budget)) {
    plan.exact = true;
    plan.pairs.reserve(std::size_t(n_exact));
    for (Index i = 0; i < m; ++i)
      for (Index j = i + 1; j < m; ++j) plan.pairs.push_back({i, j});
  } else {
    CounterRng rng(seed, 0x9a17);  // dedicated pair-subsampling stream
    plan.pairs.reserve(std::size_t(pair_budget));
    for (Index k = 0; k < pair_budget; ++k) {
      Index i = Index(rng.next_below(std::uint64_t(m)));
      Index j = Index(rng.next_below(std::uint64_t(m)));
      if (i == j) { --k; continue; }
      plan.pairs.push_back({i, j});
    }
  }
  return plan;
}

// Generic order-2 U statistic of a kernel over snapshot pairs. The standard
// error uses the Hoeffding projection: Var(U) ~ 4 Var(g)/m with
// g_i = E_j kernel(z_i, z_j), estimated from the sampled pairs.
template <class Kernel>
EstimateResult estimate_u2(const SnapshotSet& snaps, Kernel&& kernel,
                           Index pair_budget = 2'000'000) {
  const Index m = snaps.m();
  require(m >= 2, "estimate_u2: need at least two snapshots");
  PairPlan plan = plan_pairs(m, snaps.seed, pair_budget);
  cplx sum = 0;
  std::vector<cplx> gsum(std::size_t(m), cplx(0));
  std::vector<Index> gcount(std::size_t(m), 0);
  for (auto [i, j] : plan.pairs) {
    cplx v = kernel(snaps.outcomes[i], snaps.outcomes[j]);
    sum += v;
    gsum[i] += v;
    gsum[j] += v;
    ++gcount[i];
    ++gcount[j];
  }
  cplx mean = sum / double(plan.pairs.size());
  double gvar = 0;
  Index n_g = 0;
  for (Index i = 0; i < m; ++i) {
    if (!gcount[i]) continue;
    gvar += std::norm(gsum[i] / double(gcount[i]) - mean);
    ++n_g;
  }
  gvar /= std::max<Index>(1, n_g - 1);
  EstimateResult res;
  res.value = mean;
  res.stderr_ = std::sqrt(4.0 * gvar / double(m));
  res.m_used = m;
  return res;
}

// k-copy estimator: k = 1 falls back to the linear mean; k = 2 averages the
// product kernel o_{z} o_{z'} (suitable for factorized two-copy observables)
// with the generic machinery above. Callers with a non-product two-copy
// kernel use estimate_u2 directly.
inline EstimateResult estimate_k_copy(const EstimatorTable& table,
                                      const SnapshotSet& snaps, int k,
                                      Index pair_budget = 2'000'000) {
  require(k >= 1, "estimate_k_copy: k must be positive");
  require(snaps.m() >= k, "estimate_k_copy: fewer snapshots than copies");
  if (k == 1) return estimate_linear(table, snaps);
  require(k == 2, "estimate_k_copy: only k <= 2 implemented");
  auto kernel = [&](const std::vector<Index>& a, const std::vector<Index>& b) {
    return table.o[a[0]] * table.o[b[0]];
  };
  EstimateResult res = estimate_u2(snaps, kernel, pair_budget);
  res.flavor = table.flavor;
  return res;
}

}  // namespace qst
