#pragma once

#include "hopflab/matrix.hpp"

#include <complex>
#include <vector>

namespace hopflab::liegroup {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// spectral form of a skew matrix: A = Q * blkdiag(a_1 R, ..., a_r R, 0) * Q^T
// with R = [[0,-1],[1,0]], angles a_1 >= ... >= a_r > 0, kernel columns last
struct SkewSpectral {
  Matrix frame;                // orthogonal; columns 2j, 2j+1 span plane j
  std::vector<double> angles;  // one nonnegative entry per plane
  int kernel_dim = 0;

  Matrix reconstruct() const;
};

SkewSpectral skew_spectral(const Matrix& a, double tol = 1e-9);

// exponential of a skew matrix via its plane decomposition; lands in SO(n)
Matrix expm(const Matrix& a);

// principal logarithm of a special-orthogonal matrix; skew output with all
// rotation angles in (-pi, pi).  angles at pi are a BranchError.
Matrix logm(const Matrix& r, double tol = 1e-9);

// principal log completed across the -1 eigenspace by pi-rotations on a fixed
// pairing of eigencolumns; expm(result) == r always.  completed is set when
// the -1 eigenspace was nonempty.  odd-dimensional -1 eigenspace (not in
// SO(n)) is a BranchError.
Matrix logm_completed(const Matrix& r, bool* completed = nullptr, double tol = 1e-9);

// bi-invariant metric induced by the frobenius norm on the algebra
double distance(const Matrix& p, const Matrix& q);
Matrix geodesic_midpoint(const Matrix& p, const Matrix& q);

// t -> base * expm(pi t velocity); velocity with integer angles hits +-I at t=1
struct GroupGeodesic {
  Matrix base;
  Matrix velocity;  // skew
  Matrix at(double t) const;
};

// orthonormal frame pairing columns (v, jo v); jo must be a complex structure
Matrix complex_frame(const Matrix& jo, double tol = 1e-8);

// view of a jo-commuting real matrix as a complex n/2 x n/2 matrix in the
// given frame; non-commuting input is an InvalidInput
Eigen::MatrixXcd complexify(const Matrix& m, const Matrix& frame, double tol = 1e-6);

// winding number of det_C along a closed loop of jo-commuting rotations;
// consecutive determinant phases must step by less than pi
int det_winding(const std::vector<Matrix>& loop, const Matrix& jo, double tol = 1e-6);

// sum of jo-signed rotation angles of a jo-commuting skew matrix
double signed_angle_sum(const Matrix& a, const Matrix& jo);

}  // namespace hopflab::liegroup
