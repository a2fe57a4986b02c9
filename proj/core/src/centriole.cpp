#include "hopflab/centriole.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace hopflab::centriole {

namespace {

using clifford::CliffordSystem;

// worst structural residual of a candidate point: orthogonality, square = -id,
// anticommutation with every chain generator
double structure_residual(const Matrix& j, const CentrioleContext& ctx) {
  const int n = ctx.n();
  const Matrix id = Matrix::Identity(n, n);
  double worst = std::max((j.transpose() * j - id).norm(), (j * j + id).norm());
  for (const Matrix& g : ctx.chain.generators)
    worst = std::max(worst, (g * j + j * g).norm());
  return worst;
}

// discrete energy of a polygonal path: (#segments) * sum of squared step lengths
double polygon_energy(const std::vector<Matrix>& v) {
  const int segs = static_cast<int>(v.size()) - 1;
  double sum = 0.0;
  for (int i = 0; i < segs; ++i) {
    const double d = liegroup::distance(v[i], v[i + 1]);
    sum += d * d;
  }
  return segs * sum;
}

long nearest_odd(double a) { return 2 * std::lround((a - 1.0) / 2.0) + 1; }

}  // namespace

void CentrioleContext::validate(double tol) const {
  require(base.rows() == base.cols(), "context: base is not square");
  const int nn = n();
  require(nn > 0, "context: empty base");
  require(chain.n == nn || (chain.k == 0 && chain.n == 0),
          "context: chain and base sizes differ");
  // the chain together with the base must form a clifford system
  CliffordSystem full = chain;
  full.n = nn;
  full.k = chain.k + 1;
  full.generators.push_back(base);
  full.validate(tol);
}

bool in_midpoint_set(const Matrix& j, const CentrioleContext& ctx, double tol) {
  if (j.rows() != ctx.n() || j.cols() != ctx.n()) return false;
  return structure_residual(j, ctx) <= tol * std::sqrt(static_cast<double>(ctx.n()));
}

Matrix tangent_project(const Matrix& x, const CentrioleContext& ctx) {
  require(x.rows() == ctx.n() && x.cols() == ctx.n(), "tangent_project: size mismatch");
  Matrix out = 0.5 * (x - x.transpose());
  for (const Matrix& g : ctx.chain.generators) out = 0.5 * (out - g * out * g);
  out = 0.5 * (out + ctx.base * out * ctx.base);
  return out;
}

Matrix random_point(const CentrioleContext& ctx, std::uint64_t seed) {
  ctx.validate();
  Rng rng(seed);
  const Matrix a = clifford::commutant_project(rng.skew(ctx.n()), ctx.chain.generators);
  const Matrix q = liegroup::expm(a);
  return q * ctx.base * q.transpose();
}

BlockSplit geodesic_blocks(const CentrioleContext& ctx, const Matrix& velocity,
                           double tol, std::uint64_t seed) {
  const double atol = std::max(tol, 1e-12);
  ctx.validate(std::max(atol, 1e-8));
  const int n = ctx.n();
  require(velocity.rows() == n && velocity.cols() == n, "geodesic_blocks: size mismatch");
  const Matrix tp = tangent_project(velocity, ctx);
  require((tp - velocity).norm() <=
              10.0 * std::max(atol, 1e-8) * std::max(1.0, velocity.norm()),
          "geodesic_blocks: velocity is not tangent at the base");

  const int kk = ctx.k();
  const bool signed_case = ((kk + 1) % 4 == 3);
  Matrix orient;
  if (signed_case) {
    orient = Matrix::Identity(n, n);
    for (const Matrix& g : ctx.chain.generators) orient = orient * g;
  }

  const Matrix sq = -velocity * velocity;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sq + sq.transpose()));
  require(es.info() == Eigen::Success, "geodesic_blocks: eigensolver failed");
  const Vector lam = es.eigenvalues();
  const double lmax = std::max(lam(n - 1), 0.0);
  const double gap = std::max(1e-5 * std::max(lmax, 1.0), 1e-9);
  const double kernel_cut = 1e-6 * std::max(1.0, std::sqrt(lmax));

  BlockSplit out;
  std::vector<Matrix> kernel_parts;
  int kernel_cols = 0;
  const Matrix pa = ctx.base * velocity;

  int lo = 0;
  while (lo < n) {
    int hi = lo + 1;
    while (hi < n && lam(hi) - lam(hi - 1) <= gap) ++hi;
    const int d = hi - lo;
    double mean = 0.0;
    for (int i = lo; i < hi; ++i) mean += std::max(lam(i), 0.0);
    const double abar = std::sqrt(mean / d);
    const Matrix u = es.eigenvectors().middleCols(lo, d);
    lo = hi;

    if (abar <= kernel_cut) {
      kernel_parts.push_back(u);
      kernel_cols += d;
      continue;
    }

    // on each angle cluster the chain, the base, and the normalized velocity
    // extend to a clifford system with one extra generator
    CliffordSystem ext;
    ext.k = kk + 1;
    ext.n = d;
    for (const Matrix& g : ctx.chain.generators)
      ext.generators.push_back(u.transpose() * g * u);
    ext.generators.push_back(u.transpose() * ctx.base * u);
    ext.generators.push_back((u.transpose() * pa * u) / abar);
    ext.validate(std::max(atol, 1e-8) * 10.0);

    const clifford::IsotypicDecomposition dec = clifford::decompose(ext, atol, seed);
    for (const clifford::Summand& sm : dec.summands) {
      GeodesicBlock blk;
      blk.basis = u * sm.basis;
      if (signed_case) {
        const double sval =
            (blk.basis.transpose() * orient.transpose() * velocity * blk.basis).trace() /
            static_cast<double>(blk.basis.cols());
        if (std::abs(std::abs(sval) - abar) > 1e-5 * std::max(1.0, abar))
          throw ConvergenceError("geodesic_blocks: block is not oriented by the chain volume");
        blk.angle = sval;
      } else {
        blk.angle = abar;
      }
      out.blocks.push_back(std::move(blk));
    }
  }

  std::stable_sort(out.blocks.begin(), out.blocks.end(),
                   [](const GeodesicBlock& a, const GeodesicBlock& b) {
                     return std::abs(a.angle) > std::abs(b.angle);
                   });
  out.kernel_basis = Matrix::Zero(n, kernel_cols);
  int col = 0;
  for (const Matrix& part : kernel_parts) {
    out.kernel_basis.middleCols(col, part.cols()) = part;
    col += static_cast<int>(part.cols());
  }
  return out;
}

MinimalityReport minimality_test(const CentrioleContext& ctx, const Matrix& velocity,
                                 double tol) {
  MinimalityReport rep;
  const int n = ctx.n();
  const double scale = tol * std::sqrt(static_cast<double>(n));
  rep.endpoint_residual =
      (liegroup::expm(liegroup::kPi * velocity) + Matrix::Identity(n, n)).norm();

  for (int i = 1; i <= 8; ++i) {
    const double t = i / 9.0;
    const Matrix j = ctx.base * liegroup::expm(liegroup::kPi * t * velocity);
    rep.membership_residual = std::max(rep.membership_residual, structure_residual(j, ctx));
  }

  const BlockSplit bs = geodesic_blocks(ctx, velocity, tol);
  for (const GeodesicBlock& blk : bs.blocks) {
    rep.angles.push_back(blk.angle);
    rep.rounded.push_back(nearest_odd(blk.angle));
    rep.oddness_residual =
        std::max(rep.oddness_residual, std::abs(blk.angle - rep.rounded.back()));
  }

  bool units = bs.kernel_basis.cols() == 0;
  for (long r : rep.rounded) units = units && (r == 1 || r == -1);
  rep.minimal = units && rep.endpoint_residual <= scale &&
                rep.membership_residual <= scale && rep.oddness_residual <= 10.0 * tol;
  return rep;
}

int index_lower_bound(const std::vector<double>& angles, int k, long c, double tol) {
  require(k >= 1, "index_lower_bound: k >= 1 required");
  const bool signed_case = ((k + 1) % 4 == 3);
  std::vector<long> r;
  long sum = 0;
  for (double a : angles) {
    const long ra = nearest_odd(a);
    require(std::abs(a - ra) <= std::max(tol, 1e-12),
            "index_lower_bound: angle is not an odd integer");
    r.push_back(ra);
    sum += ra;
  }
  if (signed_case)
    require(sum == c, "index_lower_bound: signed angles do not sum to the degree");

  int count = 0;
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = i + 1; j < r.size(); ++j) {
      const long pair = signed_case ? std::labs(r[i] - r[j]) : std::labs(r[i]) + std::labs(r[j]);
      if (pair / 2 >= 2) ++count;
    }
  return count;
}

Matrix CutCornerResult::family_at(const Matrix& velocity, double u, double t) const {
  const Matrix q = liegroup::expm(u * mixer);
  return q * liegroup::expm(liegroup::kPi * t * velocity) * q.transpose();
}

CutCornerResult cut_corner(const CentrioleContext& ctx, const Matrix& velocity, int block_j,
                           int block_h, const CutCornerOptions& opts, double tol,
                           std::uint64_t seed) {
  const BlockSplit bs = geodesic_blocks(ctx, velocity, tol, seed);
  const int nb = static_cast<int>(bs.blocks.size());
  require(block_j >= 0 && block_j < nb && block_h >= 0 && block_h < nb && block_j != block_h,
          "cut_corner: block index out of range");
  const int n = ctx.n();
  const int kk = ctx.k();
  const bool signed_case = ((kk + 1) % 4 == 3);

  double aj = bs.blocks[block_j].angle;
  double ah = bs.blocks[block_h].angle;
  // case 1 identifies the blocks with the last generator flipped, so the
  // angles add; case 2 keeps the orientation and the signed angles subtract
  double b = signed_case ? (aj - ah) / 2.0 : (std::abs(aj) + std::abs(ah)) / 2.0;
  if (b < 0) {
    std::swap(block_j, block_h);
    std::swap(aj, ah);
    b = -b;
  }
  const long bint = std::lround(b);
  require(std::abs(b - bint) <= 1e-6 * std::max(1.0, b),
          "cut_corner: mixing angle is not an integer");
  require(bint >= 2, "cut_corner: blocks do not meet the index threshold");

  const Matrix& bj = bs.blocks[block_j].basis;
  const Matrix& bh = bs.blocks[block_h].basis;
  const int m = static_cast<int>(bj.cols());
  require(static_cast<int>(bh.cols()) == m, "cut_corner: block sizes differ");
  const double eps = signed_case ? ((aj > 0 ? 1.0 : -1.0) * (ah > 0 ? 1.0 : -1.0)) : -1.0;

  const Matrix pa = ctx.base * velocity;
  auto restrict_sys = [&](const Matrix& bas, double a, double last_sign) {
    std::vector<Matrix> g;
    for (const Matrix& c : ctx.chain.generators) g.push_back(bas.transpose() * c * bas);
    g.push_back(bas.transpose() * ctx.base * bas);
    g.push_back(last_sign * (bas.transpose() * pa * bas) / std::abs(a));
    return g;
  };
  const std::vector<Matrix> gj = restrict_sys(bj, aj, 1.0);
  const std::vector<Matrix> gh = restrict_sys(bh, ah, eps);

  // average over the commuting involutions t -> gh_i t gj_i^T; a fixed point
  // intertwines the two restricted systems, polar-orthogonalize it
  Rng rng(seed + 0xc0feull);
  Matrix u;
  bool ok = false;
  for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
    Matrix t = rng.gaussian(m, m);
    for (std::size_t i = 0; i < gj.size(); ++i)
      t = 0.5 * (t + gh[i] * t * gj[i].transpose());
    Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(m - 1);
    if (smax <= 1e-12 || smin <= 1e-6 * smax) continue;
    u = svd.matrixU() * svd.matrixV().transpose();
    ok = true;
  }
  if (!ok) throw ConvergenceError("cut_corner: no invertible identification of the blocks");

  CutCornerResult out;
  out.corner_time = 1.0 / static_cast<double>(bint);
  out.mix_angle = b;
  out.mixer = bh * u * bj.transpose() - bj * u.transpose() * bh.transpose();

  // all variation branches must pass through the plain geodesic at the corner
  const Matrix q = liegroup::expm(opts.u * out.mixer);
  const Matrix at_corner = liegroup::expm(liegroup::kPi * out.corner_time * velocity);
  if ((q * at_corner * q.transpose() - at_corner).norm() >
      1e-6 * std::sqrt(static_cast<double>(n)))
    throw ConvergenceError("cut_corner: variation does not close at the corner time");

  const int per = std::max(1, opts.samples_per_unit);
  const int segs = per * static_cast<int>(bint);
  const int corner = per;  // vertex index of the corner time 1/b
  std::vector<Matrix> plain, broken;
  plain.reserve(segs + 1);
  broken.reserve(segs + 1);
  for (int i = 0; i <= segs; ++i) {
    const double t = static_cast<double>(i) / segs;
    Matrix e = liegroup::expm(liegroup::kPi * t * velocity);
    broken.push_back(i <= corner ? Matrix(q * e * q.transpose()) : e);
    plain.push_back(std::move(e));
  }

  out.geodesic_energy = polygon_energy(plain);
  out.broken_energy = polygon_energy(broken);
  broken[corner] = liegroup::geodesic_midpoint(broken[corner - 1], broken[corner + 1]);
  out.cut_energy = polygon_energy(broken);
  out.vertices = std::move(broken);
  return out;
}

}  // namespace hopflab::centriole
