// acceptance suite: one pass/fail line per criterion, exit code = failures.
// tolerances are pinned inline next to each check.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hopflab/centriole.hpp"
#include "hopflab/classifier.hpp"
#include "hopflab/clifford.hpp"
#include "hopflab/liegroup.hpp"
#include "hopflab/matrix.hpp"
#include "hopflab/pathflow.hpp"

namespace ce = hopflab::centriole;
namespace cf = hopflab::classifier;
namespace cl = hopflab::clifford;
namespace lg = hopflab::liegroup;
namespace pf = hopflab::pathflow;
using hopflab::Matrix;
using hopflab::Rng;
using hopflab::Vector;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << (detail.str().empty() ? "" : "; ") << what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

cl::CliffordSystem sum_system(int k, int copies, int copies_prime) {
  cl::CliffordSystem s;
  bool first = true;
  for (int i = 0; i < copies; ++i) {
    s = first ? cl::irreducible(k) : cl::direct_sum(s, cl::irreducible(k));
    first = false;
  }
  for (int i = 0; i < copies_prime; ++i) {
    s = first ? cl::second_irreducible(k) : cl::direct_sum(s, cl::second_irreducible(k));
    first = false;
  }
  return s;
}

Matrix standard_jo(int n) {
  Matrix jo = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; i += 2) {
    jo(i, i + 1) = -1.0;
    jo(i + 1, i) = 1.0;
  }
  return jo;
}

pf::DiscretePath random_antipodal_path(int n, int segments, std::uint64_t seed,
                                       double wiggle) {
  ce::CentrioleContext ctx;
  ctx.chain.n = n;
  ctx.base = standard_jo(n);
  const Matrix j = ce::random_point(ctx, seed);
  pf::DiscretePath path;
  const Matrix id = Matrix::Identity(n, n);
  for (int i = 0; i <= segments; ++i) {
    const double theta = lg::kPi * static_cast<double>(i) / segments;
    path.points.push_back(std::cos(theta) * id + std::sin(theta) * j);
  }
  Rng rng(seed * 0x100000001b3ull + 7);
  pf::perturb_interior(path, wiggle, rng);
  return path;
}

// ------------------------------------------------------------- criterion 1

Outcome criterion_tables() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const int m[9] = {1, 2, 4, 4, 8, 8, 8, 8, 16};
  for (int k = 0; k <= 8; ++k)
    o.expect(cl::irreducible_dimension(k) == m[k], "m_" + std::to_string(k));
  const cl::GroupKind period[8] = {cl::GroupKind::Z2,   cl::GroupKind::Z2,
                                   cl::GroupKind::Zero, cl::GroupKind::Z,
                                   cl::GroupKind::Zero, cl::GroupKind::Zero,
                                   cl::GroupKind::Zero, cl::GroupKind::Z};
  for (int k = 0; k <= 23; ++k)
    o.expect(cl::group_kind_for(k) == period[k % 8], "A_" + std::to_string(k));
  o.expect(seconds_since(start) < 1.0, "runtime exceeded 1 s");
  return o;
}

// ------------------------------------------------------------- criterion 2

Outcome criterion_relations() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const double tol = 1e-10;
  for (int k = 0; k <= 17; ++k) {
    const cl::CliffordSystem s = cl::irreducible(k);
    o.expect(s.n <= 512, "irreducible dimension exceeds 512 at k=" + std::to_string(k));
    o.expect(s.relation_residual() <= tol, "irreducible k=" + std::to_string(k));
  }
  for (int k : {3, 7, 11, 15})
    o.expect(cl::second_irreducible(k).relation_residual() <= tol,
             "second irreducible k=" + std::to_string(k));
  for (int k = 0; k <= 9; ++k) {
    const cl::CliffordSystem s = cl::irreducible(k);
    o.expect(cl::direct_sum(s, s).relation_residual() <= tol,
             "doubled k=" + std::to_string(k));
  }
  for (int k : {3, 7})
    o.expect(cl::direct_sum(cl::irreducible(k), cl::second_irreducible(k))
                     .relation_residual() <= tol,
             "mixed k=" + std::to_string(k));
  o.expect(seconds_since(start) < 30.0, "runtime exceeded 30 s");
  return o;
}

// ------------------------------------------------------------- criterion 3

Outcome criterion_restriction() {
  Outcome o;
  for (int k : {0, 1, 8, 9}) {
    const cl::IsotypicDecomposition d =
        cl::decompose(cl::restricted(cl::irreducible(k + 1)));
    o.expect(d.p == 2 && d.q == 0, "2 S_k split at k=" + std::to_string(k));
    for (const cl::Summand& s : d.summands)
      o.expect(s.basis.cols() == cl::irreducible_dimension(k),
               "summand dimension at k=" + std::to_string(k));
  }
  for (int k : {3, 7}) {
    const cl::IsotypicDecomposition d =
        cl::decompose(cl::restricted(cl::irreducible(k + 1)));
    o.expect(d.p == 1 && d.q == 1, "S_k + S_k' split at k=" + std::to_string(k));
  }
  return o;
}

// ------------------------------------------------------------- criterion 4

Outcome criterion_classifier() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();

  const auto round_trip = [&o](const cl::CliffordSystem& s, int grid_t,
                               const std::string& label) {
    const cl::ModuleClass expect = cl::class_in_ak(s, 1e-9);
    const cf::BundleReport rep = cf::classify(cf::hopf_clutching(s, grid_t), {});
    o.expect(rep.cls.kind == expect.kind && rep.cls.value == expect.value,
             label + " class");
    o.expect(rep.trivial_rank == 0, label + " trivial rank");
  };

  // k = 1, 2: all sums of up to three irreducible summands at T = N = 64
  for (int k : {1, 2})
    for (int p = 1; p <= 3; ++p)
      round_trip(sum_system(k, p, 0), 64,
                 "k=" + std::to_string(k) + " p=" + std::to_string(p));
  const double small_elapsed = seconds_since(start);
  o.expect(small_elapsed < 120.0, "k=1,2 runtime exceeded 120 s");

  // k = 3 at the reduced grid T = 16: all (p, q) with 1 <= p + q <= 3
  const auto k3_start = std::chrono::steady_clock::now();
  for (int p = 0; p <= 3; ++p)
    for (int q = 0; p + q <= 3; ++q) {
      if (p + q == 0) continue;
      round_trip(sum_system(3, p, q), 16,
                 "k=3 p=" + std::to_string(p) + " q=" + std::to_string(q));
    }

  // one padded variant per k: the trivial summand must come back out
  for (int k : {1, 2, 3}) {
    const cl::CliffordSystem s = cl::irreducible(k);
    const int grid_t = k == 3 ? 16 : 64;
    const int pad = k == 1 ? 2 : 4;
    const cl::ModuleClass expect = cl::class_in_ak(s, 1e-9);
    const cf::BundleReport rep =
        cf::classify(pf::pad_family(cf::hopf_clutching(s, grid_t), pad, 1), {});
    o.expect(rep.cls.kind == expect.kind && rep.cls.value == expect.value,
             "padded k=" + std::to_string(k) + " class");
    o.expect(rep.trivial_rank == pad, "padded k=" + std::to_string(k) + " trivial rank");
  }
  o.expect(seconds_since(k3_start) < 600.0, "k=3 runtime exceeded 10 min");
  return o;
}

// ------------------------------------------------------------- criterion 5

Outcome criterion_extendibility() {
  Outcome o;
  for (int k = 0; k <= 9; ++k) {
    const int qmax = k % 4 == 3 ? 4 : 0;
    for (int p = 0; p <= 4; ++p)
      for (int q = 0; q <= qmax; ++q) {
        if (p + q == 0) continue;
        const cl::CliffordSystem s = sum_system(k, p, q);
        const cl::Extendibility ext = cl::is_extendible(s);
        const bool zero = cl::class_in_ak(s).is_zero();
        o.expect(ext.extendible == zero, "agreement at k=" + std::to_string(k) +
                                             " p=" + std::to_string(p) +
                                             " q=" + std::to_string(q));
        if (ext.extendible) {
          cl::CliffordSystem extended = s;
          extended.k += 1;
          extended.generators.push_back(ext.witness);
          o.expect(extended.relation_residual() <= 1e-8,
                   "witness at k=" + std::to_string(k) + " p=" + std::to_string(p) +
                       " q=" + std::to_string(q));
        }
      }
  }
  return o;
}

// ------------------------------------------------------------- criterion 6

Outcome criterion_flow() {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    pf::DiscretePath path = random_antipodal_path(8, 32, seed, 0.4);
    const pf::ShortenReport rep = pf::shorten(path, {});
    o.expect(rep.converged, "convergence at seed " + std::to_string(seed));
    o.expect(rep.energy_monotone, "monotonicity at seed " + std::to_string(seed));
    for (double a : rep.angles)
      o.expect(std::abs(std::abs(a) - 1.0) <= 1e-4,
               "angle at seed " + std::to_string(seed));
  }

  // converged discrete energy of the so(2) half turn
  const double target = 2.0 * lg::kPi * lg::kPi;
  pf::DiscretePath half_turn = random_antipodal_path(2, 64, 1, 0.4);
  o.expect(std::abs(pf::shorten(half_turn, {}).final_energy - target) <= 1e-3,
           "so(2) energy off 2 pi^2 at N=64");

  // discretization order: sample the same minimal geodesic with a sinusoidal
  // reparametrization (closed-form continuum energy 2 pi^2 (1 + 2 a^2)); the
  // discrete energy converges at second order, so the error quarters per halving
  const double a = 0.3;
  const double continuum = target * (1.0 + 2.0 * a * a);
  const auto energy_at = [a](int segments) {
    pf::DiscretePath path;
    for (int i = 0; i <= segments; ++i) {
      const double t = static_cast<double>(i) / segments;
      const double theta = lg::kPi * t + a * std::sin(2.0 * lg::kPi * t);
      Matrix r(2, 2);
      r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
      path.points.push_back(r);
    }
    return pf::discrete_energy(path);
  };
  const double ratio = std::abs(energy_at(32) - continuum) /
                       std::abs(energy_at(64) - continuum);
  o.expect(ratio >= 3.5, "halving ratio " + std::to_string(ratio) + " below 3.5");
  return o;
}

// ------------------------------------------------------------- criterion 7

Outcome criterion_index() {
  Outcome o;

  // all-unit multisets have bound exactly zero
  o.expect(ce::index_lower_bound({1, 1}, 1) == 0, "unsigned units pair");
  o.expect(ce::index_lower_bound({1, 1, 1, 1}, 1) == 0, "unsigned units quad");
  o.expect(ce::index_lower_bound({1, -1}, 2, 0) == 0, "signed units degree 0");
  o.expect(ce::index_lower_bound({1, 1}, 2, 2) == 0, "signed units degree 2");

  const cl::CliffordSystem unit2 = cl::irreducible(2);
  const Matrix e = unit2.generators[0] * unit2.generators[1];
  const auto planted1 = [&](const std::vector<double>& angles) {
    const int n = 4 * static_cast<int>(angles.size());
    ce::CentrioleContext ctx;
    ctx.chain.n = n;
    ctx.base = Matrix::Zero(n, n);
    Matrix vel = Matrix::Zero(n, n);
    for (std::size_t b = 0; b < angles.size(); ++b) {
      ctx.base.block<4, 4>(4 * b, 4 * b) = unit2.generators[0];
      vel.block<4, 4>(4 * b, 4 * b) = angles[b] * e;
    }
    return std::make_pair(ctx, vel);
  };
  const cl::CliffordSystem left = cl::irreducible(3);
  const cl::CliffordSystem right = cl::second_irreducible(3);
  const auto planted2 = [&](const std::vector<double>& angles) {
    const int n = 4 * static_cast<int>(angles.size());
    ce::CentrioleContext ctx;
    ctx.chain.k = 1;
    ctx.chain.n = n;
    Matrix j1 = Matrix::Zero(n, n);
    ctx.base = Matrix::Zero(n, n);
    Matrix vel = Matrix::Zero(n, n);
    for (std::size_t b = 0; b < angles.size(); ++b) {
      const cl::CliffordSystem& model = angles[b] >= 0 ? left : right;
      j1.block<4, 4>(4 * b, 4 * b) = model.generators[0];
      ctx.base.block<4, 4>(4 * b, 4 * b) = model.generators[1];
      vel.block<4, 4>(4 * b, 4 * b) =
          std::abs(angles[b]) * model.generators[1] * model.generators[2];
    }
    ctx.chain.generators.push_back(j1);
    return std::make_pair(ctx, vel);
  };

  const auto check_cut = [&o](const ce::CentrioleContext& ctx, const Matrix& vel, int bj,
                              int bh, const std::string& label) {
    const ce::CutCornerResult cut = ce::cut_corner(ctx, vel, bj, bh);
    o.expect(std::abs(cut.broken_energy - cut.geodesic_energy) <=
                 1e-9 * cut.geodesic_energy,
             label + ": broken path is an isometric rearrangement");
    o.expect(cut.cut_energy < cut.broken_energy, label + ": cut strictly shorter");
  };

  // every configuration with an angle >= 3 admits a shortening cut (n <= 16)
  for (const auto& angles : std::vector<std::vector<double>>{
           {3, 1}, {3, 3}, {5, 1}, {5, 3}, {3, 1, 1, 1}, {3, 3, 1, 1}, {5, 1, 1, 1}}) {
    const auto [ctx, vel] = planted1(angles);
    check_cut(ctx, vel, 0, 1, "case 1");
  }
  for (const auto& angles : std::vector<std::vector<double>>{
           {3, -1}, {5, -1}, {5, -3}, {3, 3, -1, -1}}) {
    const auto [ctx, vel] = planted2(angles);
    // blocks are sorted by descending magnitude: the last block carries the
    // most negative angle, giving the widest signed gap
    const ce::BlockSplit split = ce::geodesic_blocks(ctx, vel);
    const int bh = static_cast<int>(split.blocks.size()) - 1;
    check_cut(ctx, vel, 0, bh, "case 2");
  }
  return o;
}

// ------------------------------------------------------------- criterion 8

Outcome criterion_winding() {
  Outcome o;

  const auto sample_loop = [](const Matrix& av, int count) {
    std::vector<Matrix> loop;
    for (int i = 0; i < count; ++i)
      loop.push_back(lg::expm(2.0 * lg::kPi * (static_cast<double>(i) / count) * av));
    return loop;
  };

  // twenty random conjugated plane-angle loops: the winding is the half sum
  // of the signed angle pairs, exactly, and survives refinement
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng(trial * 7919ull + 3);
    const int planes = 4;
    const int n = 2 * planes;
    Matrix a = Matrix::Zero(n, n);
    long sum = 0;
    for (int p = 0; p < planes; ++p) {
      const long ang = static_cast<long>(std::floor(rng.uniform() * 7.0)) - 3;
      sum += ang;
      a(2 * p, 2 * p + 1) = -static_cast<double>(ang);
      a(2 * p + 1, 2 * p) = static_cast<double>(ang);
    }
    const Matrix q = lg::expm(rng.skew(n));
    const Matrix jo = q * standard_jo(n) * q.transpose();
    const Matrix av = q * a * q.transpose();
    // the loop is the closed geodesic expm(pi t (2 av)), t in [0, 2]: the half
    // sum of its signed velocity angles is the planted integer sum
    const double half_sum = 0.5 * lg::signed_angle_sum(2.0 * av, jo);
    o.expect(std::abs(half_sum - static_cast<double>(sum)) <= 1e-9,
             "half angle sum mismatch at trial " + std::to_string(trial));
    const int w = lg::det_winding(sample_loop(av, 48), jo);
    o.expect(w == static_cast<int>(sum), "winding at trial " + std::to_string(trial));
    o.expect(lg::det_winding(sample_loop(av, 96), jo) == w,
             "refinement at trial " + std::to_string(trial));
  }

  // the classifier's pole normalization is a homotopy: winding unchanged.
  // all-odd angles put the translated south pole exactly at -identity, so the
  // normalized family stays inside the commutant of jo
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng(trial * 104729ull + 11);
    const int planes = 3;
    const int n = 2 * planes;
    Matrix a = Matrix::Zero(n, n);
    long sum = 0;
    for (int p = 0; p < planes; ++p) {
      const long ang = 2 * (static_cast<long>(std::floor(rng.uniform() * 3.0)) - 1) + 1;
      sum += ang;
      a(2 * p, 2 * p + 1) = -static_cast<double>(ang);
      a(2 * p + 1, 2 * p) = static_cast<double>(ang);
    }
    const Matrix jo = standard_jo(n);
    Matrix b = rng.skew(n);
    b = 0.5 * (b + jo * b * jo.transpose());  // commutant projection
    const Matrix r = lg::expm(b);

    pf::MapFamily fam;
    fam.grid = pf::SphereGrid::build(1, 24);
    const auto value_at = [&](double circle) {
      return Matrix(lg::expm(circle * a) * r);
    };
    for (int i = 0; i < fam.grid.node_count(); ++i) {
      const double theta = fam.grid.polar_angle(i);
      const bool first = i < 2 || (i - 2) < fam.grid.t - 1;
      fam.values.push_back(value_at(first ? theta : 2.0 * lg::kPi - theta));
    }
    fam.validate(1e-9);

    const auto cyclic = [](const pf::MapFamily& f) {
      std::vector<Matrix> loop;
      const int t = f.grid.t;
      loop.push_back(f.values[0]);
      for (int s = 1; s < t; ++s) loop.push_back(f.values[1 + s]);
      loop.push_back(f.values[1]);
      for (int s = t - 1; s >= 1; --s) loop.push_back(f.values[1 + (t - 1) + s]);
      return loop;
    };

    const int before = lg::det_winding(cyclic(fam), jo);
    o.expect(before == static_cast<int>(sum),
             "pre-normalization winding at trial " + std::to_string(trial));
    const pf::NormalizeResult norm = pf::normalize_poles(fam);
    o.expect(lg::det_winding(cyclic(norm.family), jo) == before,
             "normalization changed the winding at trial " + std::to_string(trial));
  }
  return o;
}

}  // namespace

int main() {
  struct Entry {
    const char* label;
    Outcome (*run)();
  };
  const Entry entries[] = {
      {"1. dimension and group tables reproduced exactly", criterion_tables},
      {"2. clifford relations within 1e-10 up to k = 17, n = 512", criterion_relations},
      {"3. restriction of irreducibles splits with the documented labels",
       criterion_restriction},
      {"4. classifier round trips all small sums (k = 1, 2, 3, padded variants)",
       criterion_classifier},
      {"5. extendibility agrees with the vanishing class (p, q <= 4, k <= 9)",
       criterion_extendibility},
      {"6. random antipodal flows reach unit angles; so(2) energy and order",
       criterion_flow},
      {"7. corner cuts strictly shorten above-minimal geodesics; zero bound on units",
       criterion_index},
      {"8. det winding equals the half angle sum and survives refinement and "
       "normalization",
       criterion_winding},
  };

  int failures = 0;
  for (const Entry& entry : entries) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = entry.run();
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.detail << "exception: " << e.what();
    }
    const double elapsed = seconds_since(start);
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(2);
    line << (outcome.ok ? "[PASS] " : "[FAIL] ") << entry.label << " (" << elapsed
         << " s)";
    if (!outcome.ok) line << " -- " << outcome.detail.str();
    std::cout << line.str() << "\n";
    if (!outcome.ok) ++failures;
  }
  std::cout << (failures == 0 ? "acceptance: all criteria hold"
                              : "acceptance: " + std::to_string(failures) +
                                    " criterion(s) failed")
            << "\n";
  return failures;
}
