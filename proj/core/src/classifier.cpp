#include "hopflab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace hopflab::classifier {

namespace {

// orientation conventions for the pipeline live here: node 0 of every grid is
// the north pole, stages record the midpoint value at the equator's north,
// and the final circle is walked north -> first meridian -> south -> second
// meridian (reversed).  with these choices the left-multiplication generators
// come back in their original order and land on class +1.
std::vector<Matrix> circle_loop(const pathflow::MapFamily& fam) {
  const int t = fam.grid.t;
  std::vector<Matrix> loop;
  loop.reserve(2 * t + 1);
  loop.push_back(fam.values[0]);
  for (int s = 1; s < t; ++s) loop.push_back(fam.values[1 + s]);
  loop.push_back(fam.values[1]);
  for (int s = t - 1; s >= 1; --s) loop.push_back(fam.values[t + s]);
  loop.push_back(fam.values[0]);
  return loop;
}

// dyadic midpoint refinement up to at least min_segments
void upsample(std::vector<Matrix>& pts, int min_segments) {
  while (static_cast<int>(pts.size()) - 1 < min_segments) {
    std::vector<Matrix> fine;
    fine.reserve(2 * pts.size());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      fine.push_back(pts[i]);
      fine.push_back(liegroup::geodesic_midpoint(pts[i], pts[i + 1]));
    }
    fine.push_back(pts.back());
    pts = std::move(fine);
  }
}

double membership_residual(const Matrix& v, const std::vector<Matrix>& chain) {
  const Matrix id = Matrix::Identity(v.rows(), v.cols());
  double r = std::max((v.transpose() * v - id).norm(), (v * v + id).norm());
  for (const Matrix& g : chain) r = std::max(r, (g * v + v * g).norm());
  return r;
}

// perturbation directions commuting with the chain keep the loop inside the
// midpoint set, so saddle escapes cannot leak out of the stage relations
std::function<Matrix(const Matrix&)> commutant_shape(const std::vector<Matrix>& chain) {
  if (chain.empty()) return nullptr;
  return [chain](const Matrix& x) { return clifford::commutant_project(x, chain); };
}

// project near-generators onto an exact clifford system: keep the component
// anticommuting with the settled generators (h x h averages to it), then take
// the polar factor of the skew part, the nearest orthogonal complex structure.
// both steps commute with the settled relations, so the result is exact.
std::vector<Matrix> polish_system(const std::vector<Matrix>& raw) {
  std::vector<Matrix> out;
  for (const Matrix& g : raw) {
    Matrix x = 0.5 * (g - g.transpose());
    for (const Matrix& h : out) x = 0.5 * (x + h * x * h);
    Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.push_back(svd.matrixU() * svd.matrixV().transpose());
  }
  return out;
}

std::string scalar(double v) {
  std::ostringstream out;
  out << std::setprecision(3) << v;
  return out.str();
}

}  // namespace

pathflow::MapFamily hopf_clutching(const clifford::CliffordSystem& s, int grid_t) {
  s.validate();
  require(s.k >= 1, "hopf clutching: the system needs at least one generator");
  pathflow::MapFamily fam;
  fam.grid = pathflow::SphereGrid::build(s.k, grid_t);
  fam.values.reserve(fam.grid.nodes.size());
  const Matrix id = Matrix::Identity(s.n, s.n);
  for (const Vector& v : fam.grid.nodes) {
    Matrix value = v(s.k) * id;
    for (int i = 0; i < s.k; ++i) value += v(i) * s.generators[i];
    fam.values.push_back(std::move(value));
  }
  return fam;
}

clifford::CliffordSystem linear_to_module(const std::vector<Matrix>& frame, double tol) {
  require(frame.size() >= 2, "linear family: need the values on at least two basis vectors");
  const int k = static_cast<int>(frame.size()) - 1;
  const int n = static_cast<int>(frame[0].rows());
  for (const Matrix& f : frame) {
    require(f.rows() == n && f.cols() == n, "linear family: frame values differ in size");
    require(orthogonality_residual(f) <= tol * std::sqrt(static_cast<double>(n)),
            "linear family: a frame value is not orthogonal");
  }
  // phi orthogonal on every unit vector is equivalent to the products
  // phi(e_i) phi(e_{k+1})^T forming a clifford system
  clifford::CliffordSystem s;
  s.k = k;
  s.n = n;
  for (int i = 0; i < k; ++i) s.generators.push_back(frame[i] * frame[k].transpose());
  try {
    s.validate(tol);
  } catch (const InvalidInput&) {
    throw InvalidInput("linear family: the values are not those of a linear clutching map");
  }
  return s;
}

BundleReport classify(const pathflow::MapFamily& family, const ClassifyOptions& opts) {
  family.validate();
  const int k = family.grid.k;
  require(k >= 1, "classify: the family must live over a sphere of dimension at least 1");
  const int n_in = family.n();
  require(n_in % 2 == 0,
          "classify: the fibre dimension must be even (the antipode of the identity is -identity)");

  BundleReport rep;
  rep.k = k;
  rep.n = n_in;

  // pad with a trivial suspension summand until the irreducible dimension divides n
  const int mk = clifford::irreducible_dimension(k);
  pathflow::MapFamily work = family;
  if (n_in % mk != 0) work = pathflow::pad_family(family, mk - n_in % mk);

  pathflow::NormalizeResult norm = pathflow::normalize_poles(work);
  work = std::move(norm.family);

  pathflow::FlowOptions fopts;
  fopts.min_segments = opts.path_segments;
  fopts.shorten.tol = opts.tol;
  fopts.shorten.max_sweeps = opts.max_sweeps;
  fopts.workers = opts.workers;
  fopts.seed = opts.seed;

  // stage s records the midpoint value at the equator's north pole; each new
  // generator anticommutes with the chain built so far
  std::vector<Matrix> chain;
  for (int stage = 1; stage <= k - 1; ++stage) {
    fopts.perturb_shape = commutant_shape(chain);
    pathflow::FlowResult flow = pathflow::flow_family(work, fopts);

    StageSummary sum;
    sum.meridians = static_cast<int>(flow.reports.size());
    for (const pathflow::ShortenReport& r : flow.reports)
      sum.max_sweeps_used = std::max(sum.max_sweeps_used, r.sweeps);
    sum.max_deviation = flow.max_deviation;
    sum.max_odd_angle_residual = flow.max_odd_angle_residual;
    if (!flow.all_converged)
      throw ConvergenceError("classify: a meridian flow stalled at stage " +
                             std::to_string(stage) + "; raise max_sweeps");

    const double gate = opts.membership_tol * std::sqrt(static_cast<double>(work.n()));
    for (const Matrix& v : flow.midpoints.values) {
      const double resid = membership_residual(v, chain);
      sum.max_membership_residual = std::max(sum.max_membership_residual, resid);
      if (resid > gate)
        throw ConvergenceError("classify: a stage " + std::to_string(stage) +
                               " midpoint left the midpoint set (residual " + scalar(resid) +
                               "); raise the grid resolution or path_segments");
    }

    pathflow::AlignResult aligned =
        pathflow::align_poles(flow.midpoints, chain, opts.membership_tol, opts.seed + stage);
    sum.align_completed_branch = aligned.branch_completed;
    rep.diagnostics.stages.push_back(sum);

    chain.push_back(aligned.family.north());
    work = std::move(aligned.family);
  }

  // final circle through the last recorded value (the identity when k = 1)
  std::vector<Matrix> coarse = circle_loop(work);
  std::vector<Matrix> cur_chain = chain;

  pathflow::ShortenOptions sopts;
  sopts.tol = opts.tol;
  sopts.max_sweeps = opts.max_sweeps;

  Matrix avel;  // halved loop velocity
  liegroup::SkewSpectral spec;
  std::vector<long> rounded;
  int pad_rounds = 0;

  for (;;) {
    // settle coarse first (saddle escapes relax at a rate set by the segment
    // count), then refine to the requested resolution and settle again
    pathflow::DiscretePath path;
    path.points = coarse;
    const pathflow::ShortenReport ra = pathflow::shorten(path, sopts);
    upsample(path.points, opts.path_segments);
    const pathflow::ShortenReport rb = pathflow::shorten(path, sopts);
    rep.diagnostics.loop_sweeps += ra.sweeps + rb.sweeps;
    rep.diagnostics.loop_energy = rb.final_energy;
    if (!ra.converged || !rb.converged)
      throw ConvergenceError("classify: the final loop flow stalled; raise max_sweeps");

    avel = 0.5 * rb.geodesic.velocity;
    spec = liegroup::skew_spectral(avel);
    rounded.clear();
    bool integral = true;
    bool minimal = true;
    for (double a : spec.angles) {
      const long r = std::lround(a);
      rounded.push_back(r);
      if (std::abs(a - static_cast<double>(r)) > opts.membership_tol) integral = false;
      if (r > 1) minimal = false;
    }
    if (!integral)
      throw ConvergenceError(
          "classify: the loop velocity angles did not settle on integers; raise the grid "
          "resolution or path_segments");
    if (minimal) break;

    if (pad_rounds >= opts.max_pad_rounds)
      throw ConvergenceError("classify: the loop is stuck above the minimal angles after " +
                             std::to_string(pad_rounds) + " padding rounds; raise max_pad_rounds");
    ++pad_rounds;

    // pad one irreducible block (constant in the loop), rebuild the loop on
    // the stuck geodesic, and kick it off the critical point
    const clifford::CliffordSystem unit = clifford::irreducible(k);
    Matrix pad_block = Matrix::Identity(unit.n, unit.n);
    for (std::size_t i = 0; i < cur_chain.size(); ++i) {
      cur_chain[i] = blockdiag(cur_chain[i], unit.generators[i]);
      pad_block = unit.generators[i];
    }
    // the kicked loop must be sampled coarsely: a negative mode of a closed
    // geodesic grows by ~1/m^2 per sweep, so the escape from the saddle has to
    // happen at a few segments per unit angle before the refinement pass
    long amax = 1;
    for (long r : rounded) amax = std::max(amax, std::abs(r));
    const int m = std::max(16, static_cast<int>(6 * amax));
    pathflow::DiscretePath kicked;
    kicked.points.reserve(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i)
      kicked.points.push_back(
          blockdiag(rb.geodesic.at(static_cast<double>(i) / m), pad_block));
    // the loop must keep anticommuting with the chain, but the basepoint is a
    // point of the midpoint set rather than a relation, so the kick may rotate
    // around it
    std::vector<Matrix> relations = cur_chain;
    if (!relations.empty()) relations.pop_back();
    Rng rng(opts.seed * 1000003ull + static_cast<std::uint64_t>(pad_rounds));
    pathflow::perturb_interior(kicked, 0.2, rng, commutant_shape(relations));
    coarse = std::move(kicked.points);
  }

  const int np = static_cast<int>(avel.rows());
  rep.diagnostics.pad_rounds = pad_rounds;
  rep.diagnostics.padded_n = np;
  rep.diagnostics.loop_angles = spec.angles;

  // the moving summand is spanned by the unit-angle planes of the halved velocity
  int unit_planes = 0;
  for (long r : rounded)
    if (r == 1) ++unit_planes;
  const int moving = 2 * unit_planes;
  if (moving > n_in)
    throw ConvergenceError("classify: the moving summand exceeds the input fibre rank");
  rep.trivial_rank = n_in - moving;

  if (unit_planes == 0) {
    rep.cls.kind = clifford::group_kind_for(k);
    rep.cls.value = 0;
    rep.system.k = k;
    rep.system.n = 0;
    return rep;
  }

  Matrix basis(np, moving);
  int col = 0;
  for (std::size_t j = 0; j < rounded.size(); ++j)
    if (rounded[j] == 1) {
      basis.col(col++) = spec.frame.col(2 * static_cast<int>(j));
      basis.col(col++) = spec.frame.col(2 * static_cast<int>(j) + 1);
    }

  // restrict to the moving summand; the new generator comes first so the
  // recovered order matches the input order of a hopf family
  const Matrix last = cur_chain.empty() ? avel : Matrix(cur_chain.back() * avel);
  std::vector<Matrix> ambient;
  ambient.push_back(last);
  for (auto it = cur_chain.rbegin(); it != cur_chain.rend(); ++it) ambient.push_back(*it);

  clifford::CliffordSystem rec;
  rec.k = k;
  rec.n = moving;
  double resid = 0.0;
  std::vector<Matrix> restricted;
  for (const Matrix& g : ambient) {
    restricted.push_back(basis.transpose() * g * basis);
    resid = std::max(resid, (g * basis - basis * restricted.back()).norm());
  }
  // the raw restriction inherits whatever tangent error the loop limit carries
  // (any geodesic is critical for the sweeps, so an early snap onto a slightly
  // tilted one is never corrected); the splitting and the angles are still
  // exact, so project back onto an exact system and keep the raw residual as
  // the flow-quality diagnostic. the gate only has to reject splittings that
  // are wrong outright, not smooth drift.
  rec.generators = polish_system(restricted);
  for (std::size_t i = 0; i < restricted.size(); ++i)
    resid = std::max(resid, (rec.generators[i] - restricted[i]).norm());
  rep.diagnostics.recovered_residual = resid;
  if (resid > 0.05 * std::sqrt(static_cast<double>(np)))
    throw ConvergenceError("classify: the recovered splitting failed its relations (residual " +
                           scalar(resid) + "); raise the grid resolution or path_segments");
  rec.validate(opts.membership_tol);

  rep.system = rec;
  rep.cls = clifford::class_in_ak(rec, opts.membership_tol);
  return rep;
}

std::string split_report(const BundleReport& rep) {
  std::ostringstream out;
  out << "clutching family over S^" << rep.k << " in SO(" << rep.n << ")\n";
  out << "splitting E = E_0 + E_1: trivial rank " << rep.trivial_rank << ", moving rank "
      << rep.n - rep.trivial_rank << "\n";
  if (rep.system.n == 0) {
    out << "E_1 absent; class 0 in " << clifford::group_kind_name(rep.cls.kind) << "\n";
  } else {
    out << "recovered system: " << rep.system.k << " generators on R^" << rep.system.n
        << " (residual " << scalar(rep.diagnostics.recovered_residual) << ")\n";
    out << "class " << rep.cls.value << " in " << clifford::group_kind_name(rep.cls.kind) << "\n";
  }
  for (std::size_t i = 0; i < rep.diagnostics.stages.size(); ++i) {
    const StageSummary& s = rep.diagnostics.stages[i];
    out << "stage " << i + 1 << ": " << s.meridians << " meridians, sweeps <= "
        << s.max_sweeps_used << ", deviation " << scalar(s.max_deviation) << ", membership "
        << scalar(s.max_membership_residual)
        << (s.align_completed_branch ? ", completed branch" : "") << "\n";
  }
  out << "loop: angles [";
  for (std::size_t i = 0; i < rep.diagnostics.loop_angles.size(); ++i)
    out << (i ? ", " : "") << scalar(rep.diagnostics.loop_angles[i]);
  out << "], sweeps " << rep.diagnostics.loop_sweeps << ", energy "
      << scalar(rep.diagnostics.loop_energy) << ", pad rounds " << rep.diagnostics.pad_rounds
      << "\n";
  return out.str();
}

}  // namespace hopflab::classifier
