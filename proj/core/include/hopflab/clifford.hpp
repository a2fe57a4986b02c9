#pragma once

#include "hopflab/matrix.hpp"

#include <cstdint>
#include <vector>

namespace hopflab::clifford {

// k pairwise anticommuting orthogonal complex structures on R^n
struct CliffordSystem {
  int k = 0;
  int n = 0;
  std::vector<Matrix> generators;

  // max residual over orthogonality, squares and anticommutators
  double relation_residual() const;
  void validate(double tol = 1e-10) const;
};

// dimension of the smallest system with k generators: 1,2,4,4,8,8,8,8,16, then x16 per +8
int irreducible_dimension(int k);

// canonical minimal systems: rotation generator, left quaternion / octonion
// multiplications, the doubled 16-dimensional model at k = 8, and tensor
// extensions past k = 8
CliffordSystem irreducible(int k);

// the other equivalence class at k = 3 (mod 4): right multiplications /
// tensor extensions, distinguished by the sign of the volume element
CliffordSystem second_irreducible(int k);

CliffordSystem direct_sum(const CliffordSystem& a, const CliffordSystem& b);

// drop the last generator
CliffordSystem restricted(const CliffordSystem& s);

// j_1 j_2 ... j_k
Matrix volume_element(const CliffordSystem& s);

struct Summand {
  Matrix basis;   // n x m orthonormal columns spanning an invariant subspace
  int label = 0;  // 0 iff volume sign matches irreducible(k); only k = 3 mod 4
};

struct IsotypicDecomposition {
  int k = 0;
  int p = 0;  // summands labelled 0
  int q = 0;  // summands labelled 1 (k = 3 mod 4 only)
  std::vector<Summand> summands;
};

// split R^n into minimal invariant summands: random symmetric element of the
// commutant via involution averaging, then eigenspace recursion
IsotypicDecomposition decompose(const CliffordSystem& s, double tol = 1e-8,
                                std::uint64_t seed = 1);

enum class GroupKind { Z, Z2, Zero };

struct ModuleClass {
  GroupKind kind = GroupKind::Zero;
  long value = 0;
  bool is_zero() const { return value == 0; }
};

const char* group_kind_name(GroupKind kind);
GroupKind group_kind_for(int k);

// class of the module in the obstruction group for its k:
//   k mod 8 in {0,1} -> Z2 (p mod 2); k mod 8 in {3,7} -> Z (p - q); else Zero
ModuleClass class_in_ak(const CliffordSystem& s, double tol = 1e-8);

struct Extendibility {
  bool extendible = false;
  Matrix witness;  // j_{k+1} completing the system when extendible
};

// a system extends by one generator iff its class vanishes; the witness is
// assembled from intertwiners onto restricted copies of irreducible(k+1)
Extendibility is_extendible(const CliffordSystem& s, double tol = 1e-8,
                            std::uint64_t seed = 1);

// dense kronecker nullspace count of {x : x j_i = j_i x for all i}; exact but
// O(n^6), guarded to n <= 32 (cross-check for the averaging machinery)
int commutant_dimension(const CliffordSystem& s, double tol = 1e-8);

// project x onto the commutant of the generators by involution averaging
Matrix commutant_project(const Matrix& x, const std::vector<Matrix>& generators);

}  // namespace hopflab::clifford
