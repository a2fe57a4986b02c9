#include "hopflab/clifford.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>

namespace hopflab::clifford {

namespace {

using Eigen::Vector4d;
using Vector8 = Eigen::Matrix<double, 8, 1>;

Vector4d quat_mul(const Vector4d& a, const Vector4d& b) {
  return Vector4d(a(0) * b(0) - a(1) * b(1) - a(2) * b(2) - a(3) * b(3),
                  a(0) * b(1) + a(1) * b(0) + a(2) * b(3) - a(3) * b(2),
                  a(0) * b(2) - a(1) * b(3) + a(2) * b(0) + a(3) * b(1),
                  a(0) * b(3) + a(1) * b(2) - a(2) * b(1) + a(3) * b(0));
}

Vector4d quat_conj(const Vector4d& a) { return Vector4d(a(0), -a(1), -a(2), -a(3)); }

// cayley-dickson doubling: (a,b)(c,d) = (ac - conj(d) b, d a + b conj(c))
Vector8 oct_mul(const Vector8& x, const Vector8& y) {
  const Vector4d a = x.head<4>(), b = x.tail<4>();
  const Vector4d c = y.head<4>(), d = y.tail<4>();
  Vector8 out;
  out.head<4>() = quat_mul(a, c) - quat_mul(quat_conj(d), b);
  out.tail<4>() = quat_mul(d, a) + quat_mul(b, quat_conj(c));
  return out;
}

Vector8 oct_conj(const Vector8& x) {
  Vector8 out = -x;
  out(0) = x(0);
  return out;
}

Matrix quat_left(const Vector4d& v) {
  Matrix m(4, 4);
  for (int c = 0; c < 4; ++c) m.col(c) = quat_mul(v, Vector4d::Unit(c));
  return m;
}

Matrix quat_right(const Vector4d& v) {
  Matrix m(4, 4);
  for (int c = 0; c < 4; ++c) m.col(c) = quat_mul(Vector4d::Unit(c), v);
  return m;
}

Matrix oct_left(const Vector8& v) {
  Matrix m(8, 8);
  for (int c = 0; c < 8; ++c) m.col(c) = oct_mul(v, Vector8::Unit(c));
  return m;
}

Matrix oct_right(const Vector8& v) {
  Matrix m(8, 8);
  for (int c = 0; c < 8; ++c) m.col(c) = oct_mul(Vector8::Unit(c), v);
  return m;
}

// doubled model on pairs of octonions: j_v(x, y) = (v y, -conj(v) x)
Matrix doubled_generator(const Vector8& v) {
  Matrix m = Matrix::Zero(16, 16);
  const Vector8 vb = oct_conj(v);
  for (int c = 0; c < 8; ++c) {
    m.block<8, 1>(8, c) = -oct_mul(vb, Vector8::Unit(c));
    m.block<8, 1>(0, 8 + c) = oct_mul(v, Vector8::Unit(c));
  }
  return m;
}

const Matrix& omega16() {
  static const Matrix omega = [] {
    CliffordSystem s8 = irreducible(8);
    Matrix prod = Matrix::Identity(16, 16);
    for (const Matrix& g : s8.generators) prod = prod * g;
    return prod;
  }();
  return omega;
}

CliffordSystem tensor_extend(const CliffordSystem& low) {
  const CliffordSystem s8 = irreducible(8);
  const Matrix& omega = omega16();
  CliffordSystem out;
  out.k = low.k + 8;
  out.n = low.n * 16;
  for (const Matrix& g : low.generators) out.generators.push_back(kron(g, omega));
  const Matrix id = Matrix::Identity(low.n, low.n);
  for (const Matrix& g : s8.generators) out.generators.push_back(kron(id, g));
  return out;
}

int reference_volume_sign(int k) {
  require(k % 4 == 3, "volume sign defined for k = 3 mod 4 only");
  static std::map<int, int> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  const CliffordSystem s = irreducible(k);
  const Matrix vol = volume_element(s);
  const double d = vol(0, 0);
  require(std::abs(std::abs(d) - 1.0) <= 1e-9 &&
              (vol - d * Matrix::Identity(s.n, s.n)).norm() <= 1e-9,
          "volume element of the reference system is not scalar");
  const int sign = d > 0 ? 1 : -1;
  cache[k] = sign;
  return sign;
}

Matrix orthonormalized(const Matrix& b) {
  Eigen::HouseholderQR<Matrix> qr(b);
  Matrix q = qr.householderQ() * Matrix::Identity(b.rows(), b.cols());
  // fix column signs so the result is deterministic
  const Matrix r = q.transpose() * b;
  for (int c = 0; c < q.cols(); ++c)
    if (r(c, c) < 0) q.col(c) = -q.col(c);
  return q;
}

}  // namespace

double CliffordSystem::relation_residual() const {
  if (k == 0) return 0.0;
  const Matrix id = Matrix::Identity(n, n);
  double worst = 0.0;
  for (int i = 0; i < k; ++i) {
    const Matrix& g = generators[i];
    worst = std::max(worst, (g.transpose() * g - id).norm());
    worst = std::max(worst, (g * g + id).norm());
    for (int j = i + 1; j < k; ++j)
      worst = std::max(worst, (g * generators[j] + generators[j] * g).norm());
  }
  return worst;
}

void CliffordSystem::validate(double tol) const {
  require(k >= 0 && n >= 0, "system: negative size");
  require(static_cast<int>(generators.size()) == k, "system: generator count != k");
  for (const Matrix& g : generators)
    require(g.rows() == n && g.cols() == n, "system: generator size mismatch");
  if (n == 0) return;
  require(relation_residual() <= tol, "system: relation residual above tolerance");
}

int irreducible_dimension(int k) {
  require(k >= 0, "irreducible_dimension: k >= 0 required");
  static const int table[9] = {1, 2, 4, 4, 8, 8, 8, 8, 16};
  int scale = 1;
  while (k > 8) {
    k -= 8;
    scale *= 16;
  }
  return scale * table[k];
}

CliffordSystem irreducible(int k) {
  require(k >= 0, "irreducible: k >= 0 required");
  CliffordSystem s;
  s.k = k;
  s.n = irreducible_dimension(k);
  if (k == 0) return s;
  if (k == 1) {
    Matrix r(2, 2);
    r << 0, -1, 1, 0;
    s.generators.push_back(r);
  } else if (k <= 3) {
    for (int i = 1; i <= k; ++i) s.generators.push_back(quat_left(Vector4d::Unit(i)));
  } else if (k <= 7) {
    for (int i = 1; i <= k; ++i) s.generators.push_back(oct_left(Vector8::Unit(i)));
  } else if (k == 8) {
    for (int i = 0; i < 8; ++i) s.generators.push_back(doubled_generator(Vector8::Unit(i)));
  } else {
    return tensor_extend(irreducible(k - 8));
  }
  return s;
}

CliffordSystem second_irreducible(int k) {
  require(k >= 3 && k % 4 == 3, "second_irreducible: k = 3 mod 4 required");
  CliffordSystem s;
  s.k = k;
  s.n = irreducible_dimension(k);
  if (k == 3) {
    for (int i = 1; i <= 3; ++i) s.generators.push_back(quat_right(Vector4d::Unit(i)));
  } else if (k == 7) {
    for (int i = 1; i <= 7; ++i) s.generators.push_back(oct_right(Vector8::Unit(i)));
  } else {
    return tensor_extend(second_irreducible(k - 8));
  }
  return s;
}

CliffordSystem direct_sum(const CliffordSystem& a, const CliffordSystem& b) {
  require(a.k == b.k, "direct_sum: generator counts differ");
  CliffordSystem out;
  out.k = a.k;
  out.n = a.n + b.n;
  for (int i = 0; i < a.k; ++i)
    out.generators.push_back(blockdiag(a.generators[i], b.generators[i]));
  return out;
}

CliffordSystem restricted(const CliffordSystem& s) {
  require(s.k >= 1, "restricted: no generator to drop");
  CliffordSystem out = s;
  out.k = s.k - 1;
  out.generators.pop_back();
  return out;
}

Matrix volume_element(const CliffordSystem& s) {
  require(s.n > 0, "volume_element: empty system");
  Matrix prod = Matrix::Identity(s.n, s.n);
  for (const Matrix& g : s.generators) prod = prod * g;
  return prod;
}

Matrix commutant_project(const Matrix& x, const std::vector<Matrix>& generators) {
  Matrix out = x;
  for (const Matrix& g : generators) out = 0.5 * (out - g * out * g);
  return out;
}

IsotypicDecomposition decompose(const CliffordSystem& s, double tol, std::uint64_t seed) {
  const double atol = std::max(tol, 1e-12);
  s.validate(atol);
  require(s.n > 0, "decompose: empty system");
  const int m = irreducible_dimension(s.k);
  require(s.n % m == 0, "decompose: dimension not a multiple of the irreducible size");

  const bool labelled = (s.k % 4 == 3);
  Matrix vol;
  int sref = 1;
  if (labelled) {
    vol = volume_element(s);
    sref = reference_volume_sign(s.k);
  }

  Rng rng(seed);
  std::vector<Summand> out;

  std::function<void(const Matrix&)> split = [&](const Matrix& basis) {
    const int d = static_cast<int>(basis.cols());
    if (d == m) {
      Summand sm;
      sm.basis = basis;
      if (labelled) {
        const double t = (basis.transpose() * vol * basis).trace() / m;
        require(std::abs(std::abs(t) - 1.0) <= 1e-3,
                "decompose: summand volume is not scalar");
        sm.label = ((t > 0 ? 1 : -1) == sref) ? 0 : 1;
      }
      out.push_back(std::move(sm));
      return;
    }
    std::vector<Matrix> ghat;
    ghat.reserve(s.generators.size());
    for (const Matrix& g : s.generators) ghat.push_back(basis.transpose() * g * basis);

    for (int attempt = 0; attempt < 6; ++attempt) {
      Matrix h = commutant_project(rng.symmetric(d), ghat);
      h = 0.5 * (h + h.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> es(h);
      require(es.info() == Eigen::Success, "decompose: eigensolver failed");
      const Vector lam = es.eigenvalues();
      const double spread = lam(d - 1) - lam(0);
      const double gap = std::max(1e-6 * std::max(spread, 1.0), 1e-9);

      std::vector<std::pair<int, int>> clusters;
      int lo = 0;
      for (int i = 1; i <= d; ++i) {
        if (i == d || lam(i) - lam(i - 1) > gap) {
          clusters.emplace_back(lo, i);
          lo = i;
        }
      }
      if (clusters.size() < 2) continue;
      bool sizes_ok = true;
      for (const auto& [a, b] : clusters)
        if ((b - a) % m != 0) sizes_ok = false;
      if (!sizes_ok) continue;

      for (const auto& [a, b] : clusters)
        split(orthonormalized(basis * es.eigenvectors().middleCols(a, b - a)));
      return;
    }
    throw ConvergenceError("decompose: commutant splitting stalled");
  };

  split(Matrix::Identity(s.n, s.n));

  // label-0 summands first, then label-1; stable within each label
  std::stable_sort(out.begin(), out.end(),
                   [](const Summand& a, const Summand& b) { return a.label < b.label; });

  IsotypicDecomposition dec;
  dec.k = s.k;
  for (const Summand& sm : out) {
    // invariance check: each generator maps the summand into itself
    for (const Matrix& g : s.generators) {
      const Matrix gb = g * sm.basis;
      const double res = (gb - sm.basis * (sm.basis.transpose() * gb)).norm();
      require(res <= std::max(atol, 1e-8) * 10.0,
              "decompose: summand is not generator-invariant");
    }
    if (sm.label == 0)
      ++dec.p;
    else
      ++dec.q;
  }
  dec.summands = std::move(out);
  return dec;
}

const char* group_kind_name(GroupKind kind) {
  switch (kind) {
    case GroupKind::Z: return "Z";
    case GroupKind::Z2: return "Z2";
    default: return "Zero";
  }
}

GroupKind group_kind_for(int k) {
  require(k >= 0, "group_kind_for: k >= 0 required");
  const int r = k % 8;
  if (r == 0 || r == 1) return GroupKind::Z2;
  if (r == 3 || r == 7) return GroupKind::Z;
  return GroupKind::Zero;
}

ModuleClass class_in_ak(const CliffordSystem& s, double tol) {
  s.validate(std::max(tol, 1e-12));
  require(s.n > 0, "class_in_ak: empty system");
  const int m = irreducible_dimension(s.k);
  require(s.n % m == 0, "class_in_ak: dimension not a multiple of the irreducible size");
  ModuleClass out;
  out.kind = group_kind_for(s.k);
  if (out.kind == GroupKind::Z2) {
    out.value = (s.n / m) % 2;
  } else if (out.kind == GroupKind::Z) {
    const double tr = volume_element(s).trace();
    const double diff = reference_volume_sign(s.k) * tr / m;
    const double rounded = std::round(diff);
    require(std::abs(diff - rounded) <= 1e-6 * std::max(1.0, std::abs(diff)),
            "class_in_ak: volume trace is not an integer multiple");
    out.value = static_cast<long>(rounded);
  }
  return out;
}

Extendibility is_extendible(const CliffordSystem& s, double tol, std::uint64_t seed) {
  const ModuleClass cls = class_in_ak(s, tol);
  Extendibility out;
  if (!cls.is_zero()) return out;

  const CliffordSystem model = irreducible(s.k + 1);
  const CliffordSystem rm = restricted(model);
  const int block = rm.n;  // irreducible_dimension(k+1)
  const int m = irreducible_dimension(s.k);
  const int g = block / m;
  const bool mixed = (s.k % 4 == 3);

  const IsotypicDecomposition dec = decompose(s, tol, seed);
  std::vector<std::vector<int>> groups;
  if (mixed) {
    // class 0 means p == q; pair i-th label-0 with i-th label-1
    std::vector<int> zeros, ones;
    for (int i = 0; i < static_cast<int>(dec.summands.size()); ++i)
      (dec.summands[i].label == 0 ? zeros : ones).push_back(i);
    require(zeros.size() == ones.size(), "is_extendible: label counts differ at class 0");
    for (std::size_t i = 0; i < zeros.size(); ++i) groups.push_back({zeros[i], ones[i]});
  } else if (g == 2) {
    require(dec.summands.size() % 2 == 0, "is_extendible: odd summand count at class 0");
    for (std::size_t i = 0; i + 1 < dec.summands.size(); i += 2)
      groups.push_back({static_cast<int>(i), static_cast<int>(i + 1)});
  } else {
    for (std::size_t i = 0; i < dec.summands.size(); ++i)
      groups.push_back({static_cast<int>(i)});
  }

  Rng rng(seed + 0x5eedull);
  Matrix witness = Matrix::Zero(s.n, s.n);
  for (const std::vector<int>& grp : groups) {
    Matrix b(s.n, block);
    int col = 0;
    for (int idx : grp) {
      b.middleCols(col, m) = dec.summands[idx].basis;
      col += m;
    }
    require(col == block, "is_extendible: group size mismatch");

    std::vector<Matrix> ghat;
    for (const Matrix& gen : s.generators) ghat.push_back(b.transpose() * gen * b);

    Matrix u;
    bool ok = false;
    for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
      // average t over the commuting involutions t -> m_i^T t ghat_i so the
      // fixed point intertwines: t ghat_i = m_i t
      Matrix t = rng.gaussian(block, block);
      for (int i = 0; i < rm.k; ++i)
        t = 0.5 * (t + rm.generators[i].transpose() * t * ghat[i]);
      Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const double smin = svd.singularValues()(block - 1);
      const double smax = svd.singularValues()(0);
      if (smax <= 0 || smin <= 1e-6 * smax) continue;
      u = svd.matrixU() * svd.matrixV().transpose();
      ok = true;
    }
    if (!ok) throw ConvergenceError("is_extendible: no invertible intertwiner found");
    witness += b * (u.transpose() * model.generators[s.k] * u) * b.transpose();
  }

  CliffordSystem extended = s;
  extended.k = s.k + 1;
  extended.generators.push_back(witness);
  extended.validate(std::max(tol, 1e-8));
  out.extendible = true;
  out.witness = std::move(witness);
  return out;
}

int commutant_dimension(const CliffordSystem& s, double tol) {
  s.validate(std::max(tol, 1e-8));
  require(s.n >= 1 && s.n <= 32, "commutant_dimension: dense oracle guarded to n <= 32");
  if (s.k == 0) return s.n * s.n;
  const int n2 = s.n * s.n;
  Matrix constraints(s.k * n2, n2);
  const Matrix id = Matrix::Identity(s.n, s.n);
  for (int i = 0; i < s.k; ++i) {
    const Matrix& g = s.generators[i];
    constraints.middleRows(i * n2, n2) = kron(g.transpose(), id) - kron(id, g);
  }
  // rank through the gram matrix: eigenvalues are squared singular values
  const Matrix gram = constraints.transpose() * constraints;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const Vector& ev = es.eigenvalues();
  const double thresh = std::max(1e-10 * ev(ev.size() - 1), 1e-16);
  int rank = 0;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) > thresh) ++rank;
  return n2 - rank;
}

}  // namespace hopflab::clifford
