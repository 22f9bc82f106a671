#include "qst/experiments.hpp"

#include <catch2/catch.hpp>

using namespace qst;

TEST_CASE("counter RNG is deterministic and splittable") {
  CounterRng a(42, 0), b(42, 0), c(42, 1);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() == b.next_u64());
  CounterRng a2(42, 0);
  CHECK(a2.next_u64() != c.next_u64());
  double mean = 0;
  CounterRng d(7, 3);
  for (int i = 0; i < 20000; ++i) mean += d.next_double();
  CHECK(mean / 20000 == Approx(0.5).margin(0.02));
}

TEST_CASE("degenerate distribution yields constant outcomes") {
  RVec p = RVec::Zero(4);
  p[0] = 1.0;
  SnapshotSet s = sample_snapshots(p, 50, 1);
  for (Index j = 0; j < s.m(); ++j) CHECK(s.single(j) == 0);
}

TEST_CASE("uniform sampling frequencies stay within binomial bounds") {
  RVec p = RVec::Constant(4, 0.25);
  Index m = 100000;
  SnapshotSet s = sample_snapshots(p, m, 2);
  std::vector<Index> counts(4, 0);
  for (Index j = 0; j < m; ++j) ++counts[s.single(j)];
  double sigma = std::sqrt(0.25 * 0.75 / double(m));
  for (int z = 0; z < 4; ++z)
    CHECK(std::abs(double(counts[z]) / double(m) - 0.25) < 5 * sigma);
  CHECK_THROWS_AS(sample_snapshots(2.0 * p, 10, 1), Error);
}

TEST_CASE("empirical TV distance decreases like 1/sqrt(m)") {
  RVec p(6);
  p << 0.3, 0.25, 0.2, 0.15, 0.07, 0.03;
  std::vector<Index> ms{400, 4000, 40000};
  std::vector<double> tv;
  for (Index m : ms) {
    double acc = 0;
    for (int rep = 0; rep < 6; ++rep) {
      SnapshotSet s = sample_snapshots(p, m, 10 + rep);
      RVec emp = RVec::Zero(6);
      for (Index j = 0; j < m; ++j) emp[s.single(j)] += 1.0 / double(m);
      acc += 0.5 * (emp - p).cwiseAbs().sum();
    }
    tv.push_back(acc / 6);
  }
  double slope = std::log(tv[2] / tv[0]) / std::log(double(ms[2]) / double(ms[0]));
  CHECK(slope == Approx(-0.5).margin(0.12));
}

TEST_CASE("linear estimates: constant table, exhaustive unbiasedness, coverage") {
  QuenchConfig cfg = rydberg_partitioned_chain_config(6, {0, 1}, -1.0, 1.5);
  ScramblingMap map = build_scrambling_map(cfg);
  CounterRng rng(1, 0);
  Mat rho = random_density(map.d_sys(), rng);
  RVec p = map.born(rho);
  RecoverySolver solver(map, RecoveryFlavor::GammaOptimal, p);
  EstimatorTable id_table = solver.estimator(Mat::Identity(map.d_sys(), map.d_sys()));
  SnapshotSet snaps = sample_snapshots(p, 500, 3, 0, map.config_hash);
  EstimateResult one = estimate_linear(id_table, snaps);
  CHECK(one.value.real() == Approx(1.0).margin(1e-9));
  CHECK(one.stderr_ < 1e-9);

  // over repeated snapshot sets the mean estimate approaches the exact value
  Mat obs = random_hermitian(map.d_sys(), rng);
  EstimatorTable table = solver.estimator(obs);
  double exact = (obs * rho).trace().real();
  int reps = 200;
  double mean = 0, se_acc = 0;
  for (int r = 0; r < reps; ++r) {
    SnapshotSet s = sample_snapshots(p, 400, 100 + r, 0, map.config_hash);
    EstimateResult e = estimate_linear(table, s);
    mean += e.value.real();
    se_acc += e.stderr_ * e.stderr_;
  }
  mean /= reps;
  double se_of_mean = std::sqrt(se_acc) / reps;
  CHECK(std::abs(mean - exact) < 4 * se_of_mean);

  // empirical single-shot variance converges to variance()
  SnapshotSet big = sample_snapshots(p, 100000, 77, 0, map.config_hash);
  EstimateResult e = estimate_linear(table, big);
  double var_pred = variance(table.o, p);
  double var_emp = e.stderr_ * e.stderr_ * double(big.m());
  CHECK(var_emp == Approx(var_pred).epsilon(0.05));
}

TEST_CASE("U statistics: k=1 reduction, exhaustive double sum, product factorization") {
  QuenchConfig cfg = rydberg_partitioned_chain_config(5, {0, 1}, -1.0, 1.5);
  ScramblingMap map = build_scrambling_map(cfg);
  CounterRng rng(2, 0);
  Mat rho = random_density(map.d_sys(), rng);
  RVec p = map.born(rho);
  RecoverySolver solver(map, RecoveryFlavor::GammaOptimal, p);
  Mat a = random_hermitian(map.d_sys(), rng);
  EstimatorTable ta = solver.estimator(a);

  SnapshotSet snaps = sample_snapshots(p, 150, 5, 0, map.config_hash);
  EstimateResult lin = estimate_linear(ta, snaps);
  EstimateResult k1 = estimate_k_copy(ta, snaps, 1);
  CHECK(k1.value == lin.value);

  // exact combinatorial check of the k=2 U statistic at small m
  EstimateResult u2 = estimate_k_copy(ta, snaps, 2);
  cplx direct = 0;
  Index m = snaps.m();
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j)
      direct += ta.o[snaps.single(i)] * ta.o[snaps.single(j)];
  direct /= double(m) * double(m - 1) / 2;
  CHECK(std::abs(u2.value - direct) < 1e-12);

  // k=2 with O = A ⊗ B: exhaustive expectation equals Tr(A rho) Tr(B rho)
  Mat b = random_hermitian(map.d_sys(), rng);
  EstimatorTable tb = solver.estimator(b);
  cplx prod_exact = (a * rho).trace() * (b * rho).trace();
  cplx acc = 0;
  for (Index z1 = 0; z1 < map.d_ext(); ++z1)
    for (Index z2 = 0; z2 < map.d_ext(); ++z2)
      acc += p[z1] * p[z2] * ta.o[z1] * tb.o[z2];
  CHECK(std::abs(acc - prod_exact) < 1e-8);
  CHECK_THROWS_AS(estimate_k_copy(ta, SnapshotSet{}, 2), Error);
}

TEST_CASE("purity of a pure state via the product-kernel swap estimator") {
  // full-system swap on two copies: tr(S rho ⊗ rho) = tr(rho^2) = 1 for pure
  // states; with o the estimator of rho itself the k=2 product kernel applies
  QuenchConfig cfg = rydberg_partitioned_chain_config(8, {0, 1, 2}, -1.0, 2 * PI);
  ScramblingMap map = build_scrambling_map(cfg);
  RydbergParams sp = rydberg_chain_params(3, 1.0, -1.0);
  StateVector gs = ground_state(build_rydberg(sp, *cfg.sys), cfg.sys);
  Mat rho = pure_density(gs).mat;
  RVec p = map.born(rho);
  RecoverySolver solver(map, RecoveryFlavor::GammaOptimal, p);
  // purity = sum_{ij} |rho_ij|^2 = tr(rho rho): estimate with kernel
  // o2(z, z') = tr(r_z r_z') using the materialized recovery map
  Mat r = solver.left_inverse();
  std::vector<Mat> rcols;
  for (Index z = 0; z < map.d_ext(); ++z)
    rcols.push_back(devectorize(r.col(z), map.d_sys()));
  SnapshotSet snaps = sample_snapshots(p, 10000, 8, 0, map.config_hash);
  auto kernel = [&](const std::vector<Index>& x, const std::vector<Index>& y) {
    return (rcols[std::size_t(x[0])] * rcols[std::size_t(y[0])]).trace();
  };
  EstimateResult purity_est = estimate_u2(snaps, kernel);
  CHECK(std::abs(purity_est.value.real() - 1.0) < 3 * purity_est.stderr_ + 0.02);
}
