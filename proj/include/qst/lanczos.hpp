// lanczos.hpp — Lanczos ground states (full reorthogonalization) and Krylov
// time evolution with adaptive substepping. Dense scaling-and-squaring is used
// below dimension 512; Krylov above.
#pragma once

#include "qst/common.hpp"
#include "qst/linalg.hpp"
#include "qst/sparse.hpp"

#include <Eigen/Eigenvalues>

namespace qst {

struct GroundStateResult {
  double energy = 0;
  Vec vector;
  double residual = 0;
  bool degenerate = false;  // two lowest Ritz values within 1e-10
  int iterations = 0;
};

// Lowest eigenpair of a Hermitian sparse operator. Full reorthogonalization;
// restarts from the current Ritz vector if the basis hits max_basis.
inline GroundStateResult lanczos_ground_state(const SparseOp& h, double tol = 1e-9,
                                              int max_basis = 250, int max_restarts = 40) {
  const Index d = h.dim();
  GroundStateResult res;
  if (d == 1) {
    res.energy = h.to_dense()(0, 0).real();
    res.vector = Vec::Ones(1);
    return res;
  }
  Vec v0 = Vec::Ones(d).normalized();
  // deterministic pseudo-random start avoids symmetry-orthogonal bad luck
  for (Index i = 0; i < d; ++i) v0[i] += cplx(std::sin(0.7 * double(i) + 0.3), std::cos(1.3 * double(i)));
  v0.normalize();

  int total_iters = 0;
  for (int restart = 0; restart < max_restarts; ++restart) {
    std::vector<Vec> basis;
    std::vector<double> alpha, beta;
    basis.push_back(v0);
    Vec w(d);
    int m = 0;
    bool breakdown = false;
    for (; m < max_basis; ++m) {
      h.apply(basis[m], w);
      double a = std::real(basis[m].dot(w));
      alpha.push_back(a);
      w -= a * basis[m];
      if (m > 0) w -= beta[m - 1] * basis[m - 1];
      // full reorthogonalization, two sweeps
      for (int sweep = 0; sweep < 2; ++sweep)
        for (const auto& q : basis) w -= q.dot(w) * q;
      double b = w.norm();
      ++total_iters;
      if (b < 1e-13) { breakdown = true; break; }
      beta.push_back(b);
      basis.push_back(w / b);
    }
    int k = int(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    Vec ritz = Vec::Zero(d);
    for (int i = 0; i < k; ++i) ritz += es.eigenvectors()(i, 0) * basis[i];
    ritz.normalize();
    res.energy = es.eigenvalues()(0);
    res.vector = ritz;
    res.degenerate = k > 1 && (es.eigenvalues()(1) - es.eigenvalues()(0)) < 1e-10;
    res.iterations = total_iters;
    h.apply(ritz, w);
    res.residual = (w - res.energy * ritz).norm();
    if (res.residual <= tol || breakdown) return res;
    v0 = ritz;
  }
  throw Error("lanczos_ground_state: no convergence, residual " +
              std::to_string(res.residual));
}

// y = exp(-i t H) x via Lanczos with adaptive substeps.
inline Vec krylov_expv(const SparseOp& h, Vec x, double t, double tol = 1e-11,
                       int krylov_dim = 30) {
  if (t == 0 || x.norm() == 0) return x;
  const Index d = h.dim();
  krylov_dim = int(std::min<Index>(krylov_dim, d));
  double tdone = 0, sign = t >= 0 ? 1.0 : -1.0, tend = std::abs(t);
  double dt = tend;
  Vec w(d);
  int guard = 0;
  while (tdone < tend) {
    require(++guard < 100000, "krylov_expv: too many substeps");
    double nrm = x.norm();
    std::vector<Vec> basis{x / nrm};
    std::vector<double> alpha, beta;
    int m = 0;
    bool happy = false;
    for (; m < krylov_dim; ++m) {
      h.apply(basis[m], w);
      double a = std::real(basis[m].dot(w));
      alpha.push_back(a);
      w -= a * basis[m];
      if (m > 0) w -= beta[m - 1] * basis[m - 1];
      for (int sweep = 0; sweep < 2; ++sweep)
        for (const auto& q : basis) w -= q.dot(w) * q;
      double b = w.norm();
      if (b < 1e-14) { happy = true; break; }
      beta.push_back(b);
      if (m + 1 < krylov_dim) basis.push_back(w / b);
    }
    int k = int(alpha.size());
    Eigen::MatrixXd tm = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      tm(i, i) = alpha[i];
      if (i + 1 < k) tm(i, i + 1) = tm(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tm);
    double step = std::min(dt, tend - tdone);
    for (;;) {
      Eigen::VectorXcd phases(k);
      for (int i = 0; i < k; ++i)
        phases[i] = std::exp(cplx(0, -sign * step * es.eigenvalues()(i)));
      Eigen::VectorXcd u =
          es.eigenvectors() * (phases.array() * es.eigenvectors().row(0).transpose().cast<cplx>().conjugate().array()).matrix();
      double err = happy || k == 0 ? 0.0 : std::abs(beta.back() * std::abs(u[k - 1]) * step);
      if (err <= tol * std::max(1.0, nrm) || step < 1e-12 * tend) {
        Vec y = Vec::Zero(d);
        for (int i = 0; i < k; ++i) y += u[i] * basis[i];
        x = nrm * y;
        tdone += step;
        if (err < 0.1 * tol) dt = std::min(step * 1.8, tend);
        else dt = step;
        break;
      }
      step *= 0.5;
    }
  }
  return x;
}

// Evolve a set of column vectors by exp(-i t H); picks the dense path for
// small dimensions where forming the propagator once is cheaper.
inline Mat evolve_columns(const SparseOp& h, const Mat& cols, double t,
                          double tol = 1e-11, Index dense_cutoff = 512) {
  if (h.dim() <= dense_cutoff) {
    Mat u = expm(cplx(0, -t) * h.to_dense());
    return u * cols;
  }
  Mat out(cols.rows(), cols.cols());
  for (Index j = 0; j < cols.cols(); ++j)
    out.col(j) = krylov_expv(h, cols.col(j), t, tol);
  return out;
}

}  // namespace qst
