#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hopflab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// malformed or out-of-contract input (callers can fix the call site)
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// a principal-branch ambiguity: the requested rotation path is not determined
// by the data (e.g. a rotation angle sitting exactly at pi)
struct BranchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// an iteration budget ran out before reaching the requested tolerance
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// deterministic stream: mt19937_64 bits mapped by explicit arithmetic
// (no std::*_distribution, whose output is implementation-defined)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double normal() {  // box-muller, cached spare
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Matrix gaussian(int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

  Matrix skew(int n) {
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double v = normal();
        a(i, j) = v;
        a(j, i) = -v;
      }
    return a;
  }

  Matrix symmetric(int n) {
    Matrix a(n, n);
    for (int i = 0; i < n; ++i) {
      a(i, i) = normal();
      for (int j = i + 1; j < n; ++j) {
        const double v = normal();
        a(i, j) = v;
        a(j, i) = v;
      }
    }
    return a;
  }

 private:
  std::uint64_t next() { return engine_step(); }

  // minimal mt19937_64 core; fixed constants, fixed seeding, no library variance
  std::uint64_t engine_step() {
    if (index_ == kN) {
      if (!seeded_) seed_state();
      twist();
    }
    std::uint64_t x = mt_[index_++];
    x ^= (x >> 29) & 0x5555555555555555ull;
    x ^= (x << 17) & 0x71d67fffeda60000ull;
    x ^= (x << 37) & 0xfff7eee000000000ull;
    x ^= x >> 43;
    return x;
  }

  void seed_state() {
    mt_[0] = state_;
    for (unsigned i = 1; i < kN; ++i)
      mt_[i] = 6364136223846793005ull * (mt_[i - 1] ^ (mt_[i - 1] >> 62)) + i;
    seeded_ = true;
  }

  void twist() {
    constexpr std::uint64_t kUpper = 0xffffffff80000000ull;
    constexpr std::uint64_t kLower = 0x7fffffffull;
    for (unsigned i = 0; i < kN; ++i) {
      const std::uint64_t x = (mt_[i] & kUpper) | (mt_[(i + 1) % kN] & kLower);
      std::uint64_t y = x >> 1;
      if (x & 1ull) y ^= 0xb5026f5aa96619e9ull;
      mt_[i] = mt_[(i + 156) % kN] ^ y;
    }
    index_ = 0;
  }

  static constexpr unsigned kN = 312;
  std::uint64_t state_;
  std::uint64_t mt_[kN] = {};
  unsigned index_ = kN;
  bool seeded_ = false;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline double frob(const Matrix& m) { return m.norm(); }

inline bool approx_eq(const Matrix& a, const Matrix& b, double tol) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).norm() <= tol;
}

inline double orthogonality_residual(const Matrix& q) {
  return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).norm();
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix blockdiag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  if (a.rows() > 0) out.topLeftCorner(a.rows(), a.cols()) = a;
  if (b.rows() > 0) out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidInput(what);
}

}  // namespace hopflab
