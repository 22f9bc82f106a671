// rng.hpp — counter-based splittable RNG (Philox-style) and inverse-CDF
// sampling of discrete distributions. A (seed, stream) pair fully determines
// the sequence, so patched experiments can draw per-patch streams that are
// reproducible independently of evaluation order.
#pragma once

#include "qst/common.hpp"

#include <cmath>

namespace qst {

// Philox 2x64-10 counter generator.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key0_(seed), key1_(0x9e3779b97f4a7c15ull ^ stream) {}

  std::uint64_t next_u64() {
    std::uint64_t x0 = ctr_++, x1 = key1_;
    std::uint64_t k = key0_;
    for (int r = 0; r < 10; ++r) {
      std::uint64_t hi, lo;
      mul128(x0, 0xD2B74407B1CE6E93ull, hi, lo);
      std::uint64_t y0 = hi ^ x1 ^ k;
      std::uint64_t y1 = lo;
      x0 = y0;
      x1 = y1;
      k += 0x9E3779B97F4A7C15ull;
    }
    return x0;
  }

  // uniform in [0, 1) with 53-bit resolution
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    return std::uint64_t(next_double() * double(n)) % n;
  }

  double next_normal() {
    double u1 = next_double(), u2 = next_double();
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * PI * u2);
  }

  cplx next_cnormal() { return {next_normal(), next_normal()}; }

 private:
  static void mul128(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                     std::uint64_t& lo) {
    unsigned __int128 p = (unsigned __int128)a * b;
    hi = std::uint64_t(p >> 64);
    lo = std::uint64_t(p);
  }
  std::uint64_t key0_, key1_;
  std::uint64_t ctr_ = 0;
};

// Inverse-CDF sampler over a fixed probability vector.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(const RVec& p) : cdf_(p.size()) {
    double acc = 0;
    for (Index i = 0; i < p.size(); ++i) {
      acc += std::max(0.0, p[i]);
      cdf_[i] = acc;
    }
    require(acc > 0, "DiscreteSampler: distribution sums to zero");
    total_ = acc;
  }

  Index draw(CounterRng& rng) const {
    double u = rng.next_double() * total_;
    Index lo = 0, hi = Index(cdf_.size()) - 1;
    while (lo < hi) {
      Index mid = (lo + hi) / 2;
      if (cdf_[mid] <= u)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }

 private:
  std::vector<double> cdf_;
  double total_;
};

// Random Haar-ish test states/operators (used by property tests and the
// random-observable acceptance checks).
inline Vec random_state(Index d, CounterRng& rng) {
  Vec v(d);
  for (Index i = 0; i < d; ++i) v[i] = rng.next_cnormal();
  v.normalize();
  return v;
}

inline Mat random_density(Index d, CounterRng& rng, Index rank = 0) {
  if (rank <= 0) rank = d;
  Mat g(d, rank);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < rank; ++j) g(i, j) = rng.next_cnormal();
  Mat rho = g * g.adjoint();
  rho /= rho.trace().real();
  return rho;
}

inline Mat random_matrix(Index d, CounterRng& rng) {
  Mat g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = rng.next_cnormal();
  return g;
}

inline Mat random_hermitian(Index d, CounterRng& rng) {
  Mat g = random_matrix(d, rng);
  return 0.5 * (g + g.adjoint());
}

}  // namespace qst
