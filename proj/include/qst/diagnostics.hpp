// diagnostics.hpp — tomographic completeness reports, symmetry classification
// of null spaces, the OTOC detectability witness, and the systematic noise
// error bound.
#pragma once

#include "qst/recovery.hpp"

namespace qst {

struct CompletenessReport {
  RVec singular_values;  // descending
  double sigma_min = 0, sigma_max = 0, condition = 0;
  bool complete = false;
  Mat null_space;  // vectorized operators, one column per null direction
};

inline CompletenessReport singular_spectrum(const ScramblingMap& map,
                                            double tol = 1e-10) {
  auto rep = svd_report(map.matrix());
  CompletenessReport out;
  out.singular_values = rep.singular_values;
  out.sigma_max = rep.sigma_max();
  out.sigma_min = rep.sigma_min();
  out.condition = out.sigma_min > 0 ? out.sigma_max / out.sigma_min
                                    : std::numeric_limits<double>::infinity();
  out.complete = out.sigma_min > tol * out.sigma_max;
  Index null_dim = 0;
  for (Index i = 0; i < rep.singular_values.size(); ++i)
    if (rep.singular_values[i] <= tol * out.sigma_max) ++null_dim;
  out.null_space = rep.v.rightCols(null_dim);
  return out;
}

// Squared overlap of a (vectorized, normalized) operator with the null space.
inline double null_space_overlap(const CompletenessReport& rep, const Mat& op) {
  Vec v = vectorize(op);
  double n2 = v.squaredNorm();
  require(n2 > 0, "null_space_overlap: zero operator");
  return (rep.null_space.adjoint() * v).squaredNorm() / n2;
}

struct NullSpaceSymmetryReport {
  // per null-space direction: fraction of Hilbert-Schmidt weight on entries
  // that connect different charge sectors
  RVec off_sector_fraction;
  double explained_fraction = 0;  // mean over null directions
};

// `charge` is the diagonal of a charge operator in the system basis; a null
// direction is symmetry-explained when its weight sits entirely on matrix
// elements between different charge sectors.
inline NullSpaceSymmetryReport null_space_symmetry(const CompletenessReport& rep,
                                                   const RVec& charge) {
  const Index d = charge.size();
  NullSpaceSymmetryReport out;
  out.off_sector_fraction.resize(rep.null_space.cols());
  for (Index c = 0; c < rep.null_space.cols(); ++c) {
    Mat op = devectorize(rep.null_space.col(c), d);
    double off = 0, tot = 0;
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) {
        double w = std::norm(op(i, j));
        tot += w;
        if (std::abs(charge[i] - charge[j]) > 1e-9) off += w;
      }
    out.off_sector_fraction[c] = tot > 0 ? off / tot : 0.0;
  }
  out.explained_fraction = rep.null_space.cols() > 0
                               ? out.off_sector_fraction.mean()
                               : 1.0;
  return out;
}

// sum_z 4 |<z| drho(t) |z>|^2 with drho(t) the quench-evolved extended
// operator; zero exactly when drho is undetectable at time t.
inline double otoc_completeness_witness(const Mat& drho, const ScramblingMap& map) {
  require(std::abs(drho.trace()) <= 1e-9, "otoc_completeness_witness: drho must be traceless");
  Vec p = map.matrix() * vectorize(drho);
  return 4.0 * p.squaredNorm();
}

// Delta_O^bound = gamma t sqrt(sum_z |o_z|^2 / d_ext)
inline double systematic_error_bound(const EstimatorTable& table, double gamma,
                                     double t, Index d_ext) {
  return gamma * t * std::sqrt(table.o.squaredNorm() / double(d_ext));
}

}  // namespace qst
