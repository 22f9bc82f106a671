// linalg.hpp — dense decompositions used by the recovery pipeline: QR-based
// minimum-norm solves, SVD reports, and the matrix exponential.
#pragma once

#include "qst/common.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace qst {

// QR factorization of a tall matrix A (m >= n), exposing the two solves the
// estimator pipeline needs:
//   least_squares(b):  argmin_x ||A x - b||          (x is n-dim)
//   min_norm(c):       the minimum-norm y with A^H y = c   (y is m-dim)
// The latter is the textbook route o = A (A^H A)^{-1} c evaluated stably as
// y = Q [R^{-H} c; 0].
class TallQR {
 public:
  explicit TallQR(Mat a) : m_(a.rows()), n_(a.cols()), qr_(std::move(a)) {
    require(m_ >= n_, "TallQR: matrix must be tall");
  }

  Index rows() const { return m_; }
  Index cols() const { return n_; }

  // |r_ii| extrema; a cheap full-rank proxy (sigma_min <= min|r_ii| etc.)
  std::pair<double, double> rdiag_range() const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (Index i = 0; i < n_; ++i) {
      double v = std::abs(qr_.matrixQR()(i, i));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return {lo, hi};
  }

  bool full_rank(double rel_tol = 1e-12) const {
    auto [lo, hi] = rdiag_range();
    return lo > rel_tol * hi;
  }

  Vec least_squares(const Vec& b) const {
    require(b.size() == m_, "TallQR: rhs size mismatch");
    Vec qtb = b;
    qtb.applyOnTheLeft(qr_.householderQ().adjoint());
    Vec x = qtb.head(n_);
    qr_.matrixQR().topRows(n_).template triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
  }

  Vec min_norm(const Vec& c) const {
    require(c.size() == n_, "TallQR: rhs size mismatch");
    Vec w = c;
    qr_.matrixQR()
        .topRows(n_)
        .template triangularView<Eigen::Upper>()
        .adjoint()
        .solveInPlace(w);
    Vec y = Vec::Zero(m_);
    y.head(n_) = w;
    y.applyOnTheLeft(qr_.householderQ());
    return y;
  }

  // Explicit thin Q (m x n); only materialized for left-inverse construction.
  Mat thin_q() const {
    Mat q = Mat::Identity(m_, n_);
    q.applyOnTheLeft(qr_.householderQ());
    return q;
  }

  // R1^{-1} Q1^H, i.e. the pseudo-inverse of the factored matrix.
  Mat left_inverse() const {
    Mat r = thin_q().adjoint();
    qr_.matrixQR().topRows(n_).template triangularView<Eigen::Upper>().solveInPlace(r);
    return r;
  }

 private:
  Index m_, n_;
  Eigen::HouseholderQR<Mat> qr_;
};

struct SvdReport {
  RVec singular_values;  // descending, padded with zeros up to cols(A)
  Mat v;                 // right singular vectors (columns), full square
  double sigma_min() const { return singular_values[singular_values.size() - 1]; }
  double sigma_max() const { return singular_values[0]; }
};

// Full right-singular-vector report; the spectrum is padded to cols(A) so a
// wide matrix exposes its structural null space.
inline SvdReport svd_report(const Mat& a) {
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeFullV);
  RVec sv = RVec::Zero(a.cols());
  sv.head(svd.singularValues().size()) = svd.singularValues();
  return {std::move(sv), svd.matrixV()};
}

inline Mat expm(const Mat& a) { return a.exp(); }

inline Mat hermitian_part(const Mat& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace qst
