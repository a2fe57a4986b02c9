#pragma once

#include "hopflab/clifford.hpp"
#include "hopflab/liegroup.hpp"
#include "hopflab/matrix.hpp"

#include <cstdint>
#include <vector>

namespace hopflab::centriole {

// ambient data for the k-th midpoint set M_k: a chain j_1..j_{k-1} and a
// base point j_k in M_k.  k = chain.k + 1 >= 1 (empty chain means M_1).
struct CentrioleContext {
  clifford::CliffordSystem chain;
  Matrix base;

  int k() const { return chain.k + 1; }
  int n() const { return static_cast<int>(base.rows()); }
  void validate(double tol = 1e-8) const;
};

// membership: orthogonal, squares to -identity, anticommutes with the chain
bool in_midpoint_set(const Matrix& j, const CentrioleContext& ctx, double tol = 1e-8);

// orthogonal projection of a skew matrix onto the tangent space at ctx.base:
// commute with the chain, anticommute with the base
Matrix tangent_project(const Matrix& x, const CentrioleContext& ctx);

// seeded conjugation of the base by a chain-commuting rotation
Matrix random_point(const CentrioleContext& ctx, std::uint64_t seed);

struct GeodesicBlock {
  Matrix basis;        // ambient orthonormal columns of one minimal block
  double angle = 0.0;  // signed when (k+1) mod 4 == 3, else nonnegative
};

struct BlockSplit {
  std::vector<GeodesicBlock> blocks;  // sorted by descending |angle|
  Matrix kernel_basis;
};

// minimal invariant blocks of a geodesic velocity through ctx.base: cluster
// -a^2, normalize per cluster, decompose the extended generator system
BlockSplit geodesic_blocks(const CentrioleContext& ctx, const Matrix& velocity,
                           double tol = 1e-8, std::uint64_t seed = 1);

struct MinimalityReport {
  bool minimal = false;
  std::vector<double> angles;      // raw block angles
  std::vector<long> rounded;       // nearest odd integers
  double endpoint_residual = 0.0;  // |expm(pi a) + identity|
  double membership_residual = 0.0;
  double oddness_residual = 0.0;
};

// t -> base expm(pi t velocity) runs from base to -base inside M_k; it is
// minimal iff every block angle is +-1
MinimalityReport minimality_test(const CentrioleContext& ctx, const Matrix& velocity,
                                 double tol = 1e-6);

// count index-contributing block pairs of a pole-to-pole geodesic with odd
// integer angles.  case 1 ((k+1) mod 4 != 3): pairs with (|a|+|b|)/2 >= 2.
// case 2: signed angles summing to the fixed degree c, pairs with |a-b|/2 >= 2.
int index_lower_bound(const std::vector<double>& angles, int k, long c = 0,
                      double tol = 1e-6);

struct CutCornerOptions {
  double u = liegroup::kPi / 2.0;  // mixing parameter of the variation
  int samples_per_unit = 32;       // path sampling density (scaled by |b|)
};

struct CutCornerResult {
  double corner_time = 0.0;  // 1/b: all variation branches agree here
  double mix_angle = 0.0;    // b
  Matrix mixer;              // skew generator of the variation family
  std::vector<Matrix> vertices;         // broken path with the corner cut
  double geodesic_energy = 0.0;         // discrete energy of the plain geodesic
  double broken_energy = 0.0;           // same before cutting (equal by isometry)
  double cut_energy = 0.0;              // strictly smaller after the corner cut

  // gamma_u(t) = expm(u mixer) expm(pi t velocity) expm(-u mixer)
  Matrix family_at(const Matrix& velocity, double u, double t) const;
};

// energy-reducing variation of expm(pi t velocity) built from two blocks j, h
// with (a_j + a_h)/2 >= 2 (case 1, opposite-sign identification) or
// (a_j - a_h)/2 >= 2 (case 2): swap branches at t = 1/b and cut the corner
CutCornerResult cut_corner(const CentrioleContext& ctx, const Matrix& velocity,
                           int block_j, int block_h,
                           const CutCornerOptions& opts = {}, double tol = 1e-8,
                           std::uint64_t seed = 1);

}  // namespace hopflab::centriole
