// sparse.hpp — CSR operators assembled from COO triplets, with the canonical
// (sorted, merged, rounded) triplet stream used for config hashing.
#pragma once

#include "qst/common.hpp"

#include <algorithm>

namespace qst {

struct Triplet {
  Index row, col;
  cplx val;
};

class SparseOp {
 public:
  SparseOp() = default;
  SparseOp(Index dim, std::vector<Triplet> coo) : dim_(dim) {
    std::sort(coo.begin(), coo.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    row_ptr_.assign(dim + 1, 0);
    for (std::size_t i = 0; i < coo.size();) {
      std::size_t j = i + 1;
      cplx v = coo[i].val;
      while (j < coo.size() && coo[j].row == coo[i].row && coo[j].col == coo[i].col)
        v += coo[j++].val;
      if (std::abs(v) > 0) {
        cols_.push_back(coo[i].col);
        vals_.push_back(v);
        ++row_ptr_[coo[i].row + 1];
      }
      i = j;
    }
    for (Index r = 0; r < dim; ++r) row_ptr_[r + 1] += row_ptr_[r];
  }

  Index dim() const { return dim_; }
  Index nnz() const { return Index(vals_.size()); }

  void apply(const Vec& x, Vec& y) const {
    y.setZero();
    for (Index r = 0; r < dim_; ++r) {
      cplx acc = 0;
      for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
        acc += vals_[p] * x[cols_[p]];
      y[r] = acc;
    }
  }

  Vec apply(const Vec& x) const {
    Vec y(dim_);
    apply(x, y);
    return y;
  }

  Mat to_dense() const {
    Mat m = Mat::Zero(dim_, dim_);
    for (Index r = 0; r < dim_; ++r)
      for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) m(r, cols_[p]) += vals_[p];
    return m;
  }

  double hermiticity_error() const {
    Mat d = to_dense();
    return (d - d.adjoint()).cwiseAbs().maxCoeff();
  }

  // max-eigenvalue-magnitude estimate by power iteration (deterministic start)
  double norm_estimate(int iters = 60) const {
    if (dim_ == 0) return 0;
    Vec v = Vec::Ones(dim_).normalized(), w(dim_);
    double nrm = 0;
    for (int i = 0; i < iters; ++i) {
      apply(v, w);
      nrm = w.norm();
      if (nrm == 0) return 0;
      v = w / nrm;
    }
    return nrm;
  }

  // canonical sorted COO with 1e-14 decimal rounding, for content hashes
  void hash_into(Fnv64& h) const {
    for (Index r = 0; r < dim_; ++r)
      for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
        h.i64(r);
        h.i64(cols_[p]);
        h.c128(vals_[p]);
      }
  }

 private:
  Index dim_ = 0;
  std::vector<Index> row_ptr_, cols_;
  std::vector<cplx> vals_;
};

inline cplx expectation(const SparseOp& op, const Vec& psi) {
  return psi.dot(op.apply(psi));
}

}  // namespace qst
