#pragma once

#include "hopflab/liegroup.hpp"
#include "hopflab/matrix.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace hopflab::pathflow {

// piecewise-geodesic path in SO(n); every operation keeps the endpoints fixed
struct DiscretePath {
  std::vector<Matrix> points;

  int segments() const { return static_cast<int>(points.size()) - 1; }
  // orthogonal samples, consecutive steps inside the principal branch
  void validate(double tol = 1e-6) const;
};

// n_segments * sum of squared step distances; equals length^2 for uniform
// geodesic sampling
double discrete_energy(const DiscretePath& path);

// one midpoint-replacement sweep: odd interior vertices, then even.
// nonincreasing in energy; endpoints untouched
void birkhoff_sweep(DiscretePath& path);

// average one-step logs into a geodesic through the path's endpoints
liegroup::GroupGeodesic fit_geodesic(const DiscretePath& path);

struct ShortenOptions {
  double tol = 1e-9;       // relative energy decrease per sweep to stop
  int max_sweeps = 5000;
  int accel_every = 8;     // geodesic refit cadence (0 disables)
  bool record_history = false;
};

struct ShortenReport {
  bool converged = false;
  int sweeps = 0;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  bool energy_monotone = true;
  liegroup::GroupGeodesic geodesic;  // fitted limit
  double max_deviation = 0.0;        // path vs fitted geodesic, frobenius
  std::vector<double> angles;        // of the fitted velocity
  int kernel_dim = 0;
  double odd_angle_residual = 0.0;   // set when the endpoints are antipodal
  std::vector<double> energy_history;
};

ShortenReport shorten(DiscretePath& path, const ShortenOptions& opts = {});

// seeded interior conjugation wiggle (magnitude ramps to zero at endpoints);
// condition the skew directions through `shape` (e.g. a commutant projector)
void perturb_interior(DiscretePath& path, double magnitude, Rng& rng,
                      const std::function<Matrix(const Matrix&)>& shape = nullptr);

// recursive meridian grid on the unit sphere S^k in R^{k+1}. node order:
// north pole e_{k+1}, south pole -e_{k+1}, then per equator node m (in the
// equator grid's own order) the samples at polar angles s pi/T, s = 1..T-1.
// T must be even so equator nodes are the s = T/2 samples.
struct SphereGrid {
  int k = 0;
  int t = 0;
  std::vector<Vector> nodes;
  std::vector<std::vector<int>> meridians;  // interior node indices per meridian

  static SphereGrid build(int k, int t);
  SphereGrid equator() const;
  int node_count() const { return static_cast<int>(nodes.size()); }
  double polar_angle(int node) const;
};

// map from a sphere grid into SO(n), one value per node
struct MapFamily {
  SphereGrid grid;
  std::vector<Matrix> values;

  int n() const { return values.empty() ? 0 : static_cast<int>(values[0].rows()); }
  const Matrix& north() const { return values[0]; }
  const Matrix& south() const { return values[1]; }
  void validate(double tol = 1e-6) const;
};

struct NormalizeResult {
  MapFamily family;
  Matrix right_translation;  // applied first: value * north^T
  Matrix bump_generator;     // postcomposed expm(s(theta) L) on the south half
  bool branch_completed = false;
};

// deform so the poles sit exactly at +-identity: right-translate, then bump
// by a completed rotation log ramped over the southern hemisphere.  the bump
// is itself a homotopy, so the family's class is untouched.
NormalizeResult normalize_poles(const MapFamily& family, double tol = 1e-8);

struct AlignResult {
  MapFamily family;
  Matrix conjugator_generator;  // L in q(s) = expm(-s L / 2)
  bool branch_completed = false;
};

// for stage families with values anticommuting the chain: conjugation bump
// making south = -north exactly while fixing north and preserving chain
// relations.  refuses (BranchError) when the completion structure is missing.
AlignResult align_poles(const MapFamily& family, const std::vector<Matrix>& chain,
                        double tol = 1e-8, std::uint64_t seed = 1);

struct FlowOptions {
  int min_segments = 64;  // meridian paths are dyadically refined up to this
  ShortenOptions shorten;
  int workers = 1;
  double retry_magnitude = 1e-3;  // one seeded re-flow on non-convergence
  std::uint64_t seed = 1;
  std::function<Matrix(const Matrix&)> perturb_shape;  // optional conditioning
};

struct FlowResult {
  MapFamily midpoints;  // on the equator grid
  std::vector<ShortenReport> reports;  // one per meridian
  bool all_converged = true;
  double max_deviation = 0.0;
  double max_odd_angle_residual = 0.0;
};

// shorten every meridian path (north value -> south value) and collect the
// fitted-geodesic midpoints as a family on the equator grid
FlowResult flow_family(const MapFamily& family, const FlowOptions& opts = {});

// append a trivial summand as a polar-angle suspension block so the padded
// family keeps antipodal poles; blocks of size block_dim, `copies` of them
MapFamily pad_family(const MapFamily& family, int block_dim, int copies = 1);

}  // namespace hopflab::pathflow
