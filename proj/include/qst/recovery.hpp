// recovery.hpp — left-inverses of scrambling maps and observable estimators.
//
// Estimator algebra, with row-major vectorization and (A|B) = Tr(A^dag B):
//   o_z = (O^dag| R |z>,  R = (S^dag Gamma S)^{-1} S^dag Gamma
//   conj(o) = Gamma^{1/2} y,  y = min-norm solution of B^dag y = vec(O^dag),
//   B = Gamma^{1/2} S   (Gamma = I recovers Moore-Penrose).
// The QR solve route and the explicit left-inverse are kept as two separate
// code paths; tests assert they agree entrywise.
#pragma once

#include "qst/linalg.hpp"
#include "qst/scrambling.hpp"

namespace qst {

enum class RecoveryFlavor { MoorePenrose, GammaOptimal, DepolarizingCorrected, AnalyticDesign };

inline const char* to_string(RecoveryFlavor f) {
  switch (f) {
    case RecoveryFlavor::MoorePenrose: return "moore-penrose";
    case RecoveryFlavor::GammaOptimal: return "gamma-optimal";
    case RecoveryFlavor::DepolarizingCorrected: return "depolarizing-corrected";
    case RecoveryFlavor::AnalyticDesign: return "analytic-2-design";
  }
  return "?";
}

class RankDeficientError : public Error {
 public:
  RankDeficientError(std::string msg, Mat null_basis)
      : Error(std::move(msg)), null_space(std::move(null_basis)) {}
  Mat null_space;  // vectorized operators spanning ker(S), columns
};

struct EstimatorTable {
  Vec o;                    // per-outcome single-shot values o_z
  RecoveryFlavor flavor{};
  std::uint64_t map_hash = 0;
  double variance_ref = -1;  // Var under the reference distribution, if set
};

// Var[o_z] = sum_z P_z |o_z|^2 - |sum_z P_z o_z|^2
inline double variance(const Vec& o, const RVec& p) {
  require(o.size() == p.size(), "variance: length mismatch");
  double second = 0;
  cplx mean = 0;
  for (Index z = 0; z < o.size(); ++z) {
    second += p[z] * std::norm(o[z]);
    mean += p[z] * o[z];
  }
  return std::max(0.0, second - std::norm(mean));
}

inline double variance(const EstimatorTable& t, const RVec& p) {
  return variance(t.o, p);
}

inline RVec floor_distribution(const RVec& p, Index d_ext) {
  RVec out = p;
  double eps = 1e-12 / double(d_ext);
  for (Index z = 0; z < out.size(); ++z) out[z] = std::max(out[z], eps);
  return out;
}

// Shared QR factorization for one (map, flavor) pair; estimator tables for
// any number of observables are then cheap triangular solves.
class RecoverySolver {
 public:
  RecoverySolver(const ScramblingMap& map, RecoveryFlavor flavor,
                 const RVec& p_ref = RVec(), double rank_tol = 1e-10)
      : flavor_(flavor), map_(&map), d_sys_(map.d_sys()), d_ext_(map.d_ext()),
        rank_tol_(rank_tol) {
    require(flavor == RecoveryFlavor::MoorePenrose || flavor == RecoveryFlavor::GammaOptimal,
            "RecoverySolver: unsupported flavor");
    require(d_ext_ >= d_sys_ * d_sys_,
            "RecoverySolver: d_ext < d_sys^2, map cannot be tomographically complete");
    Mat b = map.matrix();
    if (flavor == RecoveryFlavor::GammaOptimal) {
      require(p_ref.size() == d_ext_, "RecoverySolver: reference distribution required");
      sqrt_gamma_ = floor_distribution(p_ref, d_ext_).cwiseInverse().cwiseSqrt();
      b = sqrt_gamma_.asDiagonal() * b;
    }
    qr_ = std::make_unique<TallQR>(std::move(b));
    std::tie(sigma_min_proxy_, sigma_max_proxy_) = qr_->rdiag_range();
    if (sigma_min_proxy_ <= rank_tol * sigma_max_proxy_) {
      auto rep = svd_report(map.matrix());
      Index null_dim = 0;
      for (Index i = 0; i < rep.singular_values.size(); ++i)
        if (rep.singular_values[i] <= rank_tol * rep.sigma_max()) ++null_dim;
      throw RankDeficientError(
          "RecoverySolver: scrambling map is rank deficient (tomographically incomplete)",
          rep.v.rightCols(null_dim));
    }
  }

  RecoveryFlavor flavor() const { return flavor_; }
  double sigma_min_proxy() const { return sigma_min_proxy_; }
  double sigma_max_proxy() const { return sigma_max_proxy_; }

  // o_z table for one observable, by QR solve (R never materialized)
  EstimatorTable estimator(const Mat& obs) const {
    require(obs.rows() == d_sys_ && obs.cols() == d_sys_, "estimator: size mismatch");
    Vec rhs = vectorize(obs.adjoint());
    Vec y = qr_->min_norm(rhs);
    if (flavor_ == RecoveryFlavor::GammaOptimal) y.array() *= sqrt_gamma_.array();
    return {y.conjugate(), flavor_, map_->config_hash, -1};
  }

  // Explicit left-inverse R with RS = I; second algebraic route.
  Mat left_inverse() const {
    Mat r = qr_->left_inverse();
    if (flavor_ == RecoveryFlavor::GammaOptimal)
      r = r * sqrt_gamma_.asDiagonal();
    return r;
  }

 private:
  RecoveryFlavor flavor_;
  const ScramblingMap* map_;
  Index d_sys_, d_ext_;
  double rank_tol_, sigma_min_proxy_ = 0, sigma_max_proxy_ = 0;
  RVec sqrt_gamma_;
  std::unique_ptr<TallQR> qr_;
};

struct RecoveryMap {
  Mat r;  // d_sys^2 x d_ext
  RecoveryFlavor flavor{};
  std::uint64_t source_hash = 0;
  double sigma_min_proxy = 0, sigma_max_proxy = 0;

  Index d_sys() const { return Index(std::llround(std::sqrt(double(r.rows())))); }

  // max-entry |R S - I|
  double inversion_error(const ScramblingMap& map) const {
    Mat rs = r * map.matrix();
    return (rs - Mat::Identity(r.rows(), r.rows())).cwiseAbs().maxCoeff();
  }

  EstimatorTable estimator(const Mat& obs) const {
    // o_z = (O^dag| R |z>; the row vec(O^dag)^dag R already has entries o_z
    Vec o = (vectorize(obs.adjoint()).adjoint() * r).transpose();
    return {std::move(o), flavor, source_hash, -1};
  }
};

inline RecoveryMap moore_penrose(const ScramblingMap& map, double rank_tol = 1e-10) {
  RecoverySolver solver(map, RecoveryFlavor::MoorePenrose, RVec(), rank_tol);
  return {solver.left_inverse(), RecoveryFlavor::MoorePenrose, map.config_hash,
          solver.sigma_min_proxy(), solver.sigma_max_proxy()};
}

inline RecoveryMap optimal_recovery(const ScramblingMap& map, const RVec& p_ref,
                                    double rank_tol = 1e-10) {
  RecoverySolver solver(map, RecoveryFlavor::GammaOptimal, p_ref, rank_tol);
  return {solver.left_inverse(), RecoveryFlavor::GammaOptimal, map.config_hash,
          solver.sigma_min_proxy(), solver.sigma_max_proxy()};
}

inline EstimatorTable estimator_for(const Mat& obs, const ScramblingMap& map,
                                    RecoveryFlavor flavor, const RVec& p_ref = RVec()) {
  RecoverySolver solver(map, flavor, p_ref);
  return solver.estimator(obs);
}

// R^(gamma) = e^{gt} R0 [I - (1 - e^{-gt}) 1/d_ext], 1 the all-ones matrix.
inline RecoveryMap depolarizing_recovery(const RecoveryMap& r0, double gamma, double t,
                                         Index d_ext) {
  double gt = gamma * t;
  double beta = 1.0 - std::exp(-gt);
  Vec row_sums = r0.r.rowwise().sum();
  RecoveryMap out = r0;
  out.r = std::exp(gt) * (r0.r - (beta / double(d_ext)) * row_sums * Vec::Ones(d_ext).transpose());
  out.flavor = RecoveryFlavor::DepolarizingCorrected;
  return out;
}

// Closed-form (S^dag S)^{-1} for a projective 2-design ensemble on n qubits:
// entries (2^n + 1) delta_{bd} delta_{ce} - delta_{bc} delta_{de}, i.e.
// (d+1) I - |I)(I| in vectorized form (ensemble-size normalization absorbed).
inline Mat analytic_design_inverse(int n_qubits) {
  Index d = Index(1) << n_qubits;
  Mat m = double(d + 1) * Mat::Identity(d * d, d * d);
  Vec vec_id = vectorize(Mat::Identity(d, d));
  m.noalias() -= vec_id * vec_id.transpose();
  return m;
}

}  // namespace qst
