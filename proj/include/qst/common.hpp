// common.hpp — shared aliases, error type, and small numeric helpers.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qst {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Index = Eigen::Index;

constexpr cplx I_UNIT{0.0, 1.0};
constexpr double PI = 3.14159265358979323846;

// All recoverable failures in the library throw this.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

inline double sqr(double x) { return x * x; }

// FNV-1a over raw bytes; used for content hashes of configs and maps.
struct Fnv64 {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* p, std::size_t n) {
    auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void i64(std::int64_t v) { bytes(&v, sizeof v); }
  // doubles are canonicalized through a fixed-precision decimal rendering so
  // that hashes are stable across build flags
  void f64(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.14e", v);
    bytes(buf, std::char_traits<char>::length(buf));
  }
  void c128(cplx v) {
    f64(v.real());
    f64(v.imag());
  }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
};

}  // namespace qst
