#include "hopflab/pathflow.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <thread>
#include <utility>
#include <vector>

namespace hopflab::pathflow {

namespace {

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

long nearest_odd(double a) { return 2 * std::lround((a - 1.0) / 2.0) + 1; }

// solve expm(x + c) = expm(x) expm(d) for a small skew c.  writing phi(z) =
// (1 - exp(-z))/z, the first-order condition is phi(ad_x)(c) = d, which is
// diagonal in the complex eigenbasis of x.  modes at frequencies in 2 pi Z are
// endpoint-blind (conjugate directions); they pass through with unit gain and
// are left for the caller's guarded iteration.
Matrix dexp_inverse_correction(const Matrix& x, const Matrix& d) {
  using CMatrix = Eigen::MatrixXcd;
  const std::complex<double> im(0.0, 1.0);
  const int n = static_cast<int>(x.rows());
  const liegroup::SkewSpectral spec = liegroup::skew_spectral(x);

  CMatrix u(n, n);
  Eigen::VectorXd mu(n);
  int col = 0;
  for (std::size_t j = 0; j < spec.angles.size(); ++j) {
    const Vector a = spec.frame.col(2 * static_cast<int>(j));
    const Vector b = spec.frame.col(2 * static_cast<int>(j) + 1);
    u.col(col) = (a - im * b) / std::sqrt(2.0);
    mu(col++) = spec.angles[j];
    u.col(col) = (a + im * b) / std::sqrt(2.0);
    mu(col++) = -spec.angles[j];
  }
  for (; col < n; ++col) {
    u.col(col) = spec.frame.col(col).cast<std::complex<double>>();
    mu(col) = 0.0;
  }

  CMatrix chat = u.adjoint() * d.cast<std::complex<double>>() * u;
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      const double w = mu(p) - mu(q);
      const std::complex<double> denom = 1.0 - std::exp(-im * w);
      if (std::abs(w) > 1e-9 && std::abs(denom) > 1e-6) chat(p, q) *= im * w / denom;
    }
  }
  const Matrix c = (u * chat * u.adjoint()).real();
  return 0.5 * (c - c.transpose());
}

// resample a path along a fitted geodesic, keeping both endpoints exact
std::vector<Matrix> resample(const liegroup::GroupGeodesic& geo,
                             const std::vector<Matrix>& points) {
  const int segs = static_cast<int>(points.size()) - 1;
  std::vector<Matrix> out;
  out.reserve(points.size());
  out.push_back(points.front());
  for (int i = 1; i < segs; ++i)
    out.push_back(geo.at(static_cast<double>(i) / segs));
  out.push_back(points.back());
  return out;
}

}  // namespace

void DiscretePath::validate(double tol) const {
  require(points.size() >= 2, "path: needs at least two points");
  const int n = static_cast<int>(points[0].rows());
  require(n > 0 && points[0].cols() == n, "path: first point is not square");
  const double scale = tol * std::sqrt(static_cast<double>(n));
  const Matrix id = Matrix::Identity(n, n);
  for (const Matrix& p : points) {
    require(p.rows() == n && p.cols() == n, "path: point sizes differ");
    require((p.transpose() * p - id).norm() <= scale, "path: point is not orthogonal");
  }
  // each step must stay inside the principal branch
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    liegroup::logm(points[i].transpose() * points[i + 1]);
}

double discrete_energy(const DiscretePath& path) {
  require(path.points.size() >= 2, "energy: needs at least two points");
  const int segs = path.segments();
  double sum = 0.0;
  for (int i = 0; i < segs; ++i) {
    const double d = liegroup::distance(path.points[i], path.points[i + 1]);
    sum += d * d;
  }
  return segs * sum;
}

void birkhoff_sweep(DiscretePath& path) {
  const int segs = path.segments();
  for (int i = 1; i < segs; i += 2)
    path.points[i] = liegroup::geodesic_midpoint(path.points[i - 1], path.points[i + 1]);
  for (int i = 2; i < segs; i += 2)
    path.points[i] = liegroup::geodesic_midpoint(path.points[i - 1], path.points[i + 1]);
}

liegroup::GroupGeodesic fit_geodesic(const DiscretePath& path) {
  require(path.points.size() >= 2, "fit_geodesic: needs at least two points");
  const int segs = path.segments();
  Matrix sum = Matrix::Zero(path.points[0].rows(), path.points[0].cols());
  for (int i = 0; i < segs; ++i)
    sum += liegroup::logm(path.points[i].transpose() * path.points[i + 1]);
  Matrix vel = sum / liegroup::kPi;

  // refine so expm(pi vel) lands on the far endpoint; the accumulated segment
  // logs only match it to first order in the wiggle.  guarded fixed point:
  // keep the best velocity, stop once the endpoint residual stops shrinking.
  const Matrix target = path.points.front().transpose() * path.points.back();
  const auto residual = [&](const Matrix& a, Matrix* out) -> double {
    try {
      const Matrix res = liegroup::logm(liegroup::expm(-liegroup::kPi * a) * target);
      if (out) *out = res;
      return res.norm();
    } catch (const BranchError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  Matrix resid;
  double rn = residual(vel, &resid);
  for (int it = 0; it < 24 && std::isfinite(rn) && rn > 1e-15; ++it) {
    const Matrix cand =
        vel + dexp_inverse_correction(liegroup::kPi * vel, resid) / liegroup::kPi;
    Matrix cand_resid;
    const double cand_rn = residual(cand, &cand_resid);
    if (!(cand_rn < rn)) break;
    vel = cand;
    resid = cand_resid;
    rn = cand_rn;
  }

  liegroup::GroupGeodesic geo;
  geo.base = path.points.front();
  geo.velocity = 0.5 * (vel - vel.transpose());
  return geo;
}

ShortenReport shorten(DiscretePath& path, const ShortenOptions& opts) {
  ShortenReport rep;
  rep.initial_energy = discrete_energy(path);
  double prev = rep.initial_energy;
  if (opts.record_history) rep.energy_history.push_back(prev);

  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    birkhoff_sweep(path);
    if (opts.accel_every > 0 && sweep % opts.accel_every == 0) {
      DiscretePath candidate{resample(fit_geodesic(path), path.points)};
      if (discrete_energy(candidate) <= discrete_energy(path))
        path.points = std::move(candidate.points);
    }
    const double e = discrete_energy(path);
    rep.sweeps = sweep;
    if (opts.record_history) rep.energy_history.push_back(e);
    if (e > prev * (1.0 + 1e-12) + 1e-15) rep.energy_monotone = false;
    if (prev - e <= opts.tol * std::max(prev, 1e-30)) {
      rep.converged = true;
      break;
    }
    prev = e;
  }

  rep.final_energy = discrete_energy(path);
  rep.geodesic = fit_geodesic(path);
  const int segs = path.segments();
  for (int i = 0; i <= segs; ++i) {
    const double dev =
        (path.points[i] - rep.geodesic.at(static_cast<double>(i) / segs)).norm();
    rep.max_deviation = std::max(rep.max_deviation, dev);
  }
  const liegroup::SkewSpectral spec = liegroup::skew_spectral(rep.geodesic.velocity);
  rep.angles = spec.angles;
  rep.kernel_dim = spec.kernel_dim;

  const int n = static_cast<int>(path.points[0].rows());
  if ((path.points.front() + path.points.back()).norm() <=
      1e-9 * std::sqrt(static_cast<double>(n))) {
    for (double a : rep.angles)
      rep.odd_angle_residual =
          std::max(rep.odd_angle_residual, std::abs(a - nearest_odd(a)));
    if (rep.kernel_dim > 0) rep.odd_angle_residual = std::max(rep.odd_angle_residual, 1.0);
  }
  return rep;
}

void perturb_interior(DiscretePath& path, double magnitude, Rng& rng,
                      const std::function<Matrix(const Matrix&)>& shape) {
  const int segs = path.segments();
  const int n = static_cast<int>(path.points[0].rows());
  for (int i = 1; i < segs; ++i) {
    Matrix w = rng.skew(n);
    if (shape) w = shape(w);
    const double ramp = std::sin(liegroup::kPi * static_cast<double>(i) / segs);
    const Matrix q = liegroup::expm(magnitude * ramp * w);
    path.points[i] = q * path.points[i] * q.transpose();
  }
}

SphereGrid SphereGrid::build(int k, int t) {
  require(k >= 0, "grid: k >= 0 required");
  require(t >= 2 && t % 2 == 0, "grid: t must be even and at least 2");
  SphereGrid g;
  g.k = k;
  g.t = t;
  if (k == 0) {
    g.nodes.push_back(Vector::Constant(1, 1.0));
    g.nodes.push_back(Vector::Constant(1, -1.0));
    return g;
  }
  const SphereGrid eq = build(k - 1, t);
  Vector north = Vector::Zero(k + 1);
  north(k) = 1.0;
  g.nodes.push_back(north);
  g.nodes.push_back(-north);
  for (const Vector& u : eq.nodes) {
    std::vector<int> meridian;
    for (int s = 1; s < t; ++s) {
      const double theta = s * liegroup::kPi / t;
      Vector node(k + 1);
      node.head(k) = std::sin(theta) * u;
      node(k) = std::cos(theta);
      meridian.push_back(static_cast<int>(g.nodes.size()));
      g.nodes.push_back(node);
    }
    g.meridians.push_back(std::move(meridian));
  }
  return g;
}

SphereGrid SphereGrid::equator() const {
  require(k >= 1, "grid: the 0-sphere has no equator");
  return build(k - 1, t);
}

double SphereGrid::polar_angle(int node) const {
  require(node >= 0 && node < node_count(), "grid: node out of range");
  if (node == 0) return 0.0;
  if (node == 1) return liegroup::kPi;
  const int s = (node - 2) % (t - 1) + 1;
  return s * liegroup::kPi / t;
}

void MapFamily::validate(double tol) const {
  require(!values.empty(), "family: no values");
  require(static_cast<int>(values.size()) == grid.node_count(),
          "family: value count does not match the grid");
  const int nn = n();
  require(nn > 0, "family: empty values");
  const double scale = tol * std::sqrt(static_cast<double>(nn));
  const Matrix id = Matrix::Identity(nn, nn);
  for (const Matrix& v : values) {
    require(v.rows() == nn && v.cols() == nn, "family: value sizes differ");
    require((v.transpose() * v - id).norm() <= scale, "family: value is not orthogonal");
  }
}

NormalizeResult normalize_poles(const MapFamily& family, double tol) {
  family.validate(std::max(tol, 1e-6));
  NormalizeResult out;
  out.family = family;
  const int n = family.n();
  out.right_translation = family.north().transpose();
  for (Matrix& v : out.family.values) v = v * out.right_translation;

  const Matrix z = out.family.south();
  out.bump_generator = liegroup::logm_completed(Matrix(-z.transpose()), &out.branch_completed);
  for (int i = 0; i < out.family.grid.node_count(); ++i) {
    const double theta = out.family.grid.polar_angle(i);
    const double s = smoothstep((theta - liegroup::kPi / 2.0) / (liegroup::kPi / 2.0));
    if (s > 0.0)
      out.family.values[i] = liegroup::expm(s * out.bump_generator) * out.family.values[i];
  }
  out.family.values[0] = Matrix::Identity(n, n);
  out.family.values[1] = -Matrix::Identity(n, n);
  return out;
}

AlignResult align_poles(const MapFamily& family, const std::vector<Matrix>& chain,
                        double tol, std::uint64_t seed) {
  const double atol = std::max(tol, 1e-12);
  family.validate(std::max(atol, 1e-6));
  const int n = family.n();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix j = family.north();
  const Matrix z = family.south();
  require((j * j + id).norm() <= 1e-6 * std::sqrt(static_cast<double>(n)),
          "align: north value must be a complex structure");

  // the product z j is inverted by conjugation with z, so its principal log
  // anticommutes with z; the -1 eigenspace needs an explicit completion
  const Matrix r = z * j;
  const Matrix sym = 0.5 * (r + r.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  require(es.info() == Eigen::Success, "align: eigensolver failed");
  const double cut = -1.0 + std::max(1e-9, 10.0 * atol);
  int wdim = 0;
  while (wdim < n && es.eigenvalues()(wdim) <= cut) ++wdim;

  Matrix completion = Matrix::Zero(n, n);
  bool completed = false;
  if (wdim > 0) {
    if (wdim % 2 != 0)
      throw BranchError("align: odd-dimensional completion space");
    const Matrix b = es.eigenvectors().leftCols(wdim);
    Rng rng(seed);
    bool ok = false;
    for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
      // support on the completion space, commute with the chain, and flip
      // sign under conjugation by z
      Matrix x = b * (b.transpose() * rng.skew(n) * b) * b.transpose();
      for (const Matrix& g : chain) x = 0.5 * (x - g * x * g);
      x = 0.5 * (x + z * x * z);
      const Matrix xr = b.transpose() * x * b;
      Eigen::JacobiSVD<Matrix> svd(xr, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const double smax = svd.singularValues()(0);
      const double smin = svd.singularValues()(wdim - 1);
      if (smax <= 1e-12 || smin <= 1e-6 * smax) continue;
      completion = b * (svd.matrixU() * svd.matrixV().transpose()) * b.transpose();
      ok = true;
    }
    if (!ok) throw BranchError("align: no chain-compatible completion of the pole rotation");
    completed = true;
  }

  // remove the -1 eigenspace before taking the principal log
  const Matrix reduced = completed ? Matrix(r * liegroup::expm(-liegroup::kPi * completion)) : r;
  const Matrix l = liegroup::logm(reduced) + liegroup::kPi * completion;

  AlignResult out;
  out.conjugator_generator = l;
  out.branch_completed = completed;
  out.family = family;
  for (int i = 0; i < out.family.grid.node_count(); ++i) {
    const double s = smoothstep(out.family.grid.polar_angle(i) / liegroup::kPi);
    if (s > 0.0) {
      const Matrix q = liegroup::expm(-0.5 * s * l);
      out.family.values[i] = q * out.family.values[i] * q.transpose();
    }
  }
  out.family.values[0] = j;
  out.family.values[1] = -j;
  return out;
}

FlowResult flow_family(const MapFamily& family, const FlowOptions& opts) {
  family.validate();
  require(family.grid.k >= 1, "flow: family must live over a positive-dimensional sphere");
  require(opts.workers >= 1, "flow: workers >= 1 required");
  const int meridians = static_cast<int>(family.grid.meridians.size());

  FlowResult out;
  out.reports.resize(meridians);
  std::vector<Matrix> midvals(meridians);

  auto run_meridian = [&](int m) {
    DiscretePath path;
    path.points.push_back(family.north());
    for (int idx : family.grid.meridians[m]) path.points.push_back(family.values[idx]);
    path.points.push_back(family.south());
    while (path.segments() < opts.min_segments) {
      std::vector<Matrix> finer;
      finer.reserve(2 * path.points.size());
      for (std::size_t i = 0; i + 1 < path.points.size(); ++i) {
        finer.push_back(path.points[i]);
        finer.push_back(liegroup::geodesic_midpoint(path.points[i], path.points[i + 1]));
      }
      finer.push_back(path.points.back());
      path.points = std::move(finer);
    }

    ShortenReport rep = shorten(path, opts.shorten);
    if (!rep.converged) {
      Rng rng(opts.seed + 0x9e3779b97f4a7c15ull * (m + 1));
      perturb_interior(path, opts.retry_magnitude, rng, opts.perturb_shape);
      rep = shorten(path, opts.shorten);
    }
    midvals[m] = rep.geodesic.at(0.5);
    out.reports[m] = std::move(rep);
  };

  if (opts.workers == 1) {
    for (int m = 0; m < meridians; ++m) run_meridian(m);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < opts.workers; ++w)
      pool.emplace_back([&, w] {
        for (int m = w; m < meridians; m += opts.workers) run_meridian(m);
      });
    for (std::thread& th : pool) th.join();
  }

  for (const ShortenReport& rep : out.reports) {
    out.all_converged = out.all_converged && rep.converged;
    out.max_deviation = std::max(out.max_deviation, rep.max_deviation);
    out.max_odd_angle_residual =
        std::max(out.max_odd_angle_residual, rep.odd_angle_residual);
  }

  out.midpoints.grid = family.grid.equator();
  out.midpoints.values = std::move(midvals);
  return out;
}

MapFamily pad_family(const MapFamily& family, int block_dim, int copies) {
  family.validate();
  require(block_dim >= 2 && block_dim % 2 == 0, "pad: block dimension must be even");
  require(copies >= 1, "pad: copies >= 1 required");
  const int extra = block_dim * copies;
  Matrix plane(2, 2);
  plane << 0.0, -1.0, 1.0, 0.0;
  Matrix gen = Matrix::Zero(extra, extra);
  for (int i = 0; i < extra / 2; ++i) gen.block<2, 2>(2 * i, 2 * i) = plane;

  MapFamily out;
  out.grid = family.grid;
  out.values.reserve(family.values.size());
  for (int i = 0; i < family.grid.node_count(); ++i) {
    Matrix block;
    if (i == 0)  // poles pad exactly so the suspension stays antipodal
      block = Matrix::Identity(extra, extra);
    else if (i == 1)
      block = -Matrix::Identity(extra, extra);
    else
      block = liegroup::expm(family.grid.polar_angle(i) * gen);
    out.values.push_back(blockdiag(family.values[i], block));
  }
  return out;
}

}  // namespace hopflab::pathflow
