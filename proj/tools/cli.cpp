#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hopflab/centriole.hpp"
#include "hopflab/classifier.hpp"
#include "hopflab/clifford.hpp"
#include "hopflab/json_io.hpp"
#include "hopflab/liegroup.hpp"
#include "hopflab/matrix.hpp"
#include "hopflab/pathflow.hpp"

namespace hopflab::cli {

namespace {

namespace ce = hopflab::centriole;
namespace cf = hopflab::classifier;
namespace cl = hopflab::clifford;
namespace io = hopflab::json_io;
namespace lg = hopflab::liegroup;
namespace pf = hopflab::pathflow;

using Json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), "cannot read input file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  require(!f.bad(), "failed reading input file: " + path);
  return buf.str();
}

// the text is fully built before the file is opened, so a failed command
// never leaves a partial output behind
void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(f.good(), "cannot open output file: " + path);
  f << text;
  f.flush();
  if (!f.good()) {
    f.close();
    std::remove(path.c_str());
    throw InvalidInput("failed writing output file: " + path);
  }
}

// json goes to the --out file with the human summary on `out`, or to `out`
// itself (pipe-friendly) with the summary on `err`
void emit(const std::string& json, const std::string& summary, const std::string& out_path,
          std::ostream& out, std::ostream& err) {
  if (out_path.empty()) {
    out << json << "\n";
    if (!summary.empty()) err << summary;
  } else {
    write_file(out_path, json + "\n");
    if (!summary.empty()) out << summary;
    out << "wrote " << out_path << "\n";
  }
}

// ---------------------------------------------------------------- systems

cl::CliffordSystem build_system(int k, int copies, int copies_prime) {
  require(k >= 0, "build: k must be non-negative");
  require(k <= 20, "build: k > 20 is outside the supported table range");
  require(copies >= 0 && copies_prime >= 0, "build: multiplicities must be non-negative");
  require(copies + copies_prime >= 1, "build: at least one summand is required");
  require(copies_prime == 0 || k % 4 == 3,
          "build: a second irreducible exists only for k = 3 mod 4");
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

std::string class_line(const cl::CliffordSystem& s) {
  const cl::ModuleClass cls = cl::class_in_ak(s);
  std::ostringstream line;
  line << "system: k = " << s.k << ", n = " << s.n << ", class " << cls.value << " in "
       << cl::group_kind_name(cls.kind) << "\n";
  return line.str();
}

// ------------------------------------------------------------------ grids

long double grid_nodes(int k, int t) {
  long double c = 2.0L;
  for (int i = 1; i <= k; ++i) c = 2.0L + c * static_cast<long double>(t - 1);
  return c;
}

void guard_grid(int k, int t, bool allow_large) {
  require(k >= 1, "grid: k must be at least 1");
  require(k <= 7, "grid: spheres beyond S^7 are not supported");
  if (k > 3)
    require(allow_large,
            "grid: k = " + std::to_string(k) +
                " builds a very large meridian tree; pass --allow-large to proceed");
  const long double nodes = grid_nodes(k, t);
  require(nodes <= 5.0e6L,
          "grid: ~" + std::to_string(static_cast<double>(nodes)) +
              " nodes would not fit the resource budget; lower --grid-t");
}

// ------------------------------------------------------------- flow demo

Matrix standard_complex_structure(int n) {
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
  ctx.chain.k = 0;
  ctx.chain.n = n;
  ctx.base = standard_complex_structure(n);
  const Matrix j = ce::random_point(ctx, seed);
  pf::DiscretePath path;
  path.points.reserve(static_cast<std::size_t>(segments) + 1);
  const Matrix id = Matrix::Identity(n, n);
  for (int i = 0; i <= segments; ++i) {
    const double theta = lg::kPi * static_cast<double>(i) / segments;
    path.points.push_back(std::cos(theta) * id + std::sin(theta) * j);
  }
  Rng rng(seed * 0x100000001b3ull + 7);
  pf::perturb_interior(path, wiggle, rng);
  return path;
}

// ----------------------------------------------------------------- index

std::vector<long> parse_angles(const std::string& text) {
  std::vector<long> angles;
  std::string item;
  std::istringstream stream(text);
  while (std::getline(stream, item, ',')) {
    std::size_t pos = 0;
    long value = 0;
    try {
      value = std::stol(item, &pos);
    } catch (const std::exception&) {
      throw InvalidInput("index: cannot parse angle \"" + item + "\"");
    }
    while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
    require(pos == item.size(), "index: cannot parse angle \"" + item + "\"");
    angles.push_back(value);
  }
  require(!angles.empty(), "index: the angle list is empty");
  require(angles.size() <= 64, "index: at most 64 angles are supported");
  return angles;
}

// quaternionic planted geodesics carrying the requested angles: unsigned case
// on complex-structure pairs, signed case distinguished by the volume sign
struct Planted {
  ce::CentrioleContext ctx;
  Matrix velocity;
};

Planted planted_case1(const std::vector<long>& angles) {
  const cl::CliffordSystem unit = cl::irreducible(2);
  const Matrix e = unit.generators[0] * unit.generators[1];
  const int blocks = static_cast<int>(angles.size());
  const int n = 4 * blocks;
  Planted out;
  out.ctx.chain.n = n;
  out.ctx.base = Matrix::Zero(n, n);
  out.velocity = Matrix::Zero(n, n);
  for (int b = 0; b < blocks; ++b) {
    out.ctx.base.block<4, 4>(4 * b, 4 * b) = unit.generators[0];
    out.velocity.block<4, 4>(4 * b, 4 * b) = static_cast<double>(angles[b]) * e;
  }
  return out;
}

Planted planted_case2(const std::vector<long>& angles) {
  const cl::CliffordSystem left = cl::irreducible(3);
  const cl::CliffordSystem right = cl::second_irreducible(3);
  const int blocks = static_cast<int>(angles.size());
  const int n = 4 * blocks;
  Planted out;
  out.ctx.chain.k = 1;
  out.ctx.chain.n = n;
  Matrix j1 = Matrix::Zero(n, n);
  out.ctx.base = Matrix::Zero(n, n);
  out.velocity = Matrix::Zero(n, n);
  for (int b = 0; b < blocks; ++b) {
    const cl::CliffordSystem& model = angles[b] >= 0 ? left : right;
    j1.block<4, 4>(4 * b, 4 * b) = model.generators[0];
    out.ctx.base.block<4, 4>(4 * b, 4 * b) = model.generators[1];
    out.velocity.block<4, 4>(4 * b, 4 * b) =
        std::abs(static_cast<double>(angles[b])) * model.generators[1] * model.generators[2];
  }
  out.ctx.chain.generators.push_back(j1);
  return out;
}

// --------------------------------------------------------------- commands

int cmd_tables(const std::string& out_path, std::ostream& out, std::ostream& err) {
  std::ostringstream text;
  text << "irreducible dimensions m_k (m_{k+8} = 16 m_k)\n";
  text << " k  m_k\n";
  for (int k = 0; k <= 16; ++k)
    text << std::setw(2) << k << "  " << cl::irreducible_dimension(k) << "\n";
  text << "\nobstruction groups A_k (A_{k+8} = A_k)\n";
  text << " k  A_k\n";
  for (int k = 0; k <= 15; ++k)
    text << std::setw(2) << k << "  " << cl::group_kind_name(cl::group_kind_for(k)) << "\n";
  out << text.str();

  if (!out_path.empty()) {
    Json j;
    Json m = Json::array();
    for (int k = 0; k <= 16; ++k) m.push_back(cl::irreducible_dimension(k));
    Json groups = Json::array();
    for (int k = 0; k <= 15; ++k) groups.push_back(cl::group_kind_name(cl::group_kind_for(k)));
    j["m"] = std::move(m);
    j["groups"] = std::move(groups);
    emit(j.dump(2), "", out_path, out, err);
  }
  return 0;
}

int cmd_build(int k, int copies, int copies_prime, const std::string& out_path,
              std::ostream& out, std::ostream& err) {
  const cl::CliffordSystem s = build_system(k, copies, copies_prime);
  emit(io::to_json(s), class_line(s), out_path, out, err);
  return 0;
}

int cmd_hopf(int k, int copies, int copies_prime, int grid_t, bool allow_large,
             const std::string& out_path, std::ostream& out, std::ostream& err) {
  guard_grid(k, grid_t, allow_large);
  const cl::CliffordSystem s = build_system(k, copies, copies_prime);
  const pf::MapFamily fam = cf::hopf_clutching(s, grid_t);
  std::ostringstream summary;
  summary << class_line(s) << "hopf clutching family over S^" << k << " with "
          << fam.grid.node_count() << " nodes\n";
  emit(io::to_json(fam), summary.str(), out_path, out, err);
  return 0;
}

int cmd_classify(const std::string& in_path, const cf::ClassifyOptions& opts,
                 bool allow_large, const std::string& out_path, std::ostream& out,
                 std::ostream& err) {
  const pf::MapFamily fam = io::family_from_json(read_file(in_path));
  fam.validate(1e-6);
  guard_grid(fam.grid.k, fam.grid.t, allow_large);
  const cf::BundleReport rep = cf::classify(fam, opts);
  emit(io::to_json(rep), cf::split_report(rep), out_path, out, err);
  return 0;
}

int cmd_flow_demo(int n, int segments, const pf::ShortenOptions& base_opts,
                  std::uint64_t seed, const std::string& out_path, std::ostream& out,
                  std::ostream& err) {
  require(n >= 2 && n % 2 == 0, "flow demo: n must be even and at least 2");
  require(segments >= 2, "flow demo: at least 2 segments are required");
  pf::DiscretePath path = random_antipodal_path(n, segments, seed, 0.4);
  pf::ShortenOptions opts = base_opts;
  opts.record_history = true;
  const pf::ShortenReport rep = pf::shorten(path, opts);

  std::ostringstream text;
  text << "random path from identity to -identity in SO(" << n << "), " << segments
       << " segments, seed " << seed << "\n";
  text << "energy: " << rep.initial_energy << " -> " << rep.final_energy << " in "
       << rep.sweeps << " sweeps (" << (rep.energy_monotone ? "monotone" : "non-monotone")
       << ")\n";
  text << "energy sequence:";
  const std::size_t shown = std::min<std::size_t>(rep.energy_history.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) text << " " << rep.energy_history[i];
  if (rep.energy_history.size() > shown)
    text << " ... " << rep.energy_history.back() << " (" << rep.energy_history.size()
         << " entries)";
  text << "\nfinal angles:";
  for (double a : rep.angles) text << " " << a;
  text << "\n";

  Json j;
  j["n"] = n;
  j["segments"] = segments;
  j["seed"] = seed;
  j["converged"] = rep.converged;
  j["sweeps"] = rep.sweeps;
  j["initial_energy"] = rep.initial_energy;
  j["final_energy"] = rep.final_energy;
  j["energy_monotone"] = rep.energy_monotone;
  j["angles"] = rep.angles;
  j["energies"] = rep.energy_history;
  emit(j.dump(2), text.str(), out_path, out, err);
  if (!rep.converged)
    throw ConvergenceError("flow demo: the path did not converge within " +
                           std::to_string(opts.max_sweeps) + " sweeps");
  return 0;
}

int cmd_index(const std::string& angle_text, int k, const std::string& out_path,
              std::ostream& out, std::ostream& err) {
  const std::vector<long> angles = parse_angles(angle_text);
  require(k == 1 || k == 2, "index: the demo supports k = 1 (unsigned) and k = 2 (signed)");
  const bool signed_case = (k + 1) % 4 == 3;
  long c = 0;
  std::vector<double> as_double;
  for (long a : angles) {
    if (!signed_case)
      require(a >= 1, "index: case 1 angles are unsigned; use k = 2 for signed angles");
    c += a;
    as_double.push_back(static_cast<double>(a));
  }
  const int bound = ce::index_lower_bound(as_double, k, signed_case ? c : 0);

  std::ostringstream text;
  text << "angles:";
  for (long a : angles) text << " " << a;
  if (signed_case) text << " (signed, degree " << c << ")";
  text << "\nindex lower bound: " << bound << "\n";

  Json j;
  j["k"] = k;
  j["angles"] = angles;
  if (signed_case) j["degree"] = c;
  j["bound"] = bound;

  if (bound > 0) {
    const Planted planted = signed_case ? planted_case2(angles) : planted_case1(angles);
    const ce::BlockSplit split = ce::geodesic_blocks(planted.ctx, planted.velocity);
    int bj = -1;
    int bh = -1;
    for (std::size_t i = 0; i < split.blocks.size() && bj < 0; ++i)
      for (std::size_t h = i + 1; h < split.blocks.size() && bj < 0; ++h) {
        const double ai = split.blocks[i].angle;
        const double ah = split.blocks[h].angle;
        const bool ok = signed_case ? std::abs(ai - ah) / 2.0 >= 2.0
                                    : (std::abs(ai) + std::abs(ah)) / 2.0 >= 2.0;
        if (ok) {
          bj = static_cast<int>(i);
          bh = static_cast<int>(h);
        }
      }
    require(bj >= 0, "index: no block pair qualifies for the corner cut");
    const ce::CutCornerResult cut =
        ce::cut_corner(planted.ctx, planted.velocity, bj, bh);
    text << "corner cut at t = " << cut.corner_time << " with mixing angle "
         << cut.mix_angle << "\n";
    text << "geodesic energy " << cut.geodesic_energy << ", broken energy "
         << cut.broken_energy << ", cut energy " << cut.cut_energy << "\n";
    Json jc;
    jc["corner_time"] = cut.corner_time;
    jc["mix_angle"] = cut.mix_angle;
    jc["geodesic_energy"] = cut.geodesic_energy;
    jc["broken_energy"] = cut.broken_energy;
    jc["cut_energy"] = cut.cut_energy;
    j["cut"] = std::move(jc);
  }
  emit(j.dump(2), text.str(), out_path, out, err);
  return 0;
}

// ---------------------------------------------------------------- verify

struct VerifyState {
  std::ostream& out;
  int failures = 0;

  void check(bool ok, const std::string& label, const std::string& detail = "") {
    if (ok) {
      out << "[ok] " << label << "\n";
    } else {
      ++failures;
      out << "[FAIL] " << label << (detail.empty() ? "" : ": " + detail) << "\n";
    }
  }
};

int cmd_verify(std::uint64_t seed, int workers, std::ostream& out) {
  VerifyState v{out};

  {
    const int expect[17] = {1, 2, 4, 4, 8, 8, 8, 8, 16, 32, 64, 64, 128, 128, 128, 128, 256};
    bool ok = true;
    for (int k = 0; k <= 16; ++k) ok = ok && cl::irreducible_dimension(k) == expect[k];
    v.check(ok, "irreducible dimensions m_0..m_16 follow the doubling table");
  }
  {
    const cl::GroupKind period[8] = {cl::GroupKind::Z2, cl::GroupKind::Z2, cl::GroupKind::Zero,
                                     cl::GroupKind::Z,  cl::GroupKind::Zero, cl::GroupKind::Zero,
                                     cl::GroupKind::Zero, cl::GroupKind::Z};
    bool ok = true;
    for (int k = 0; k <= 23; ++k) ok = ok && cl::group_kind_for(k) == period[k % 8];
    v.check(ok, "obstruction groups repeat with period 8 through k = 23");
  }
  {
    bool ok = true;
    double worst = 0.0;
    for (int k = 0; k <= 13; ++k) {
      const double r = cl::irreducible(k).relation_residual();
      worst = std::max(worst, r);
      ok = ok && r <= 1e-10;
    }
    v.check(ok, "clifford relations hold to 1e-10 for k <= 13",
            "worst residual " + std::to_string(worst));
  }
  {
    bool ok = true;
    for (int k : {0, 1, 8, 9}) {
      const cl::IsotypicDecomposition d = cl::decompose(cl::restricted(cl::irreducible(k + 1)));
      ok = ok && d.p + d.q == 2 && (k % 4 != 3 ? d.q == 0 : d.p == 1);
    }
    for (int k : {3, 7}) {
      const cl::IsotypicDecomposition d = cl::decompose(cl::restricted(cl::irreducible(k + 1)));
      ok = ok && d.p == 1 && d.q == 1;
    }
    v.check(ok, "restriction splits into two summands with the documented labels");
  }
  {
    bool ok = true;
    for (int k = 1; k <= 5; ++k)
      for (int p = 0; p <= 2; ++p)
        for (int q = 0; q <= (k % 4 == 3 ? 2 : 0); ++q) {
          if (p + q == 0) continue;
          const cl::CliffordSystem s = build_system(k, p, q);
          ok = ok && cl::is_extendible(s).extendible == cl::class_in_ak(s).is_zero();
        }
    v.check(ok, "extendibility coincides with a vanishing class for k <= 5, p, q <= 2");
  }
  {
    bool ok = true;
    for (std::uint64_t trial = 0; trial < 3; ++trial) {
      pf::DiscretePath path = random_antipodal_path(8, 32, seed + trial, 0.4);
      const pf::ShortenReport rep = pf::shorten(path, {});
      ok = ok && rep.converged && rep.energy_monotone;
      for (double a : rep.angles) ok = ok && std::abs(std::abs(a) - 1.0) <= 1e-4;
    }
    v.check(ok, "random antipodal paths in SO(8) flow to unit angles (3 seeds)");
  }
  {
    pf::DiscretePath path = random_antipodal_path(2, 64, seed, 0.0);
    const pf::ShortenReport rep = pf::shorten(path, {});
    const double target = 2.0 * lg::kPi * lg::kPi;
    v.check(std::abs(rep.final_energy - target) <= 1e-3,
            "discrete energy of the SO(2) half turn matches 2 pi^2 within 1e-3",
            std::to_string(rep.final_energy));
  }
  {
    bool ok = true;
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
      Rng rng(seed * 1000003ull + trial);
      const int planes = 3;
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
      const Matrix jo = q * standard_complex_structure(n) * q.transpose();
      const Matrix av = q * a * q.transpose();
      std::vector<Matrix> loop;
      for (int i = 0; i < 48; ++i)
        loop.push_back(lg::expm(2.0 * lg::kPi * (static_cast<double>(i) / 48.0) * av));
      ok = ok && lg::det_winding(loop, jo) == sum;
    }
    v.check(ok, "det winding of random geodesic loops equals the half angle sum (5 seeds)");
  }
  {
    cf::ClassifyOptions opts;
    opts.path_segments = 16;
    opts.workers = workers;
    opts.seed = seed;
    bool ok = true;
    for (int k : {1, 2}) {
      const cl::CliffordSystem s = cl::irreducible(k);
      const cf::BundleReport rep = cf::classify(cf::hopf_clutching(s, 16), opts);
      const cl::ModuleClass expect = cl::class_in_ak(s);
      ok = ok && rep.cls.kind == expect.kind && rep.cls.value == expect.value &&
           rep.trivial_rank == 0;
    }
    v.check(ok, "classifier round trips the hopf families for k = 1, 2");
  }

  out << (v.failures == 0 ? "all invariants hold\n"
                          : std::to_string(v.failures) + " invariant(s) failed\n");
  return v.failures == 0 ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"construct clifford systems, flow clutching families, classify bundles"};
  app.require_subcommand(1);

  std::string out_path;
  std::string in_path;
  int k = 1;
  int n = 8;
  int copies = 1;
  int copies_prime = 0;
  int grid_t = 64;
  int path_n = 64;
  double tol = 1e-9;
  int max_sweeps = 5000;
  std::uint64_t seed = 1;
  int workers = 1;
  bool allow_large = false;
  std::string angle_text;

  CLI::App* tables = app.add_subcommand("tables", "print the dimension and group tables");
  tables->add_option("--out", out_path, "also write the tables as json");

  CLI::App* build = app.add_subcommand("build", "serialize a direct sum of irreducibles");
  build->add_option("--k", k, "number of generators")->required();
  build->add_option("--copies", copies, "multiplicity of the first irreducible");
  build->add_option("--copies-prime", copies_prime,
                    "multiplicity of the second irreducible (k = 3 mod 4 only)");
  build->add_option("--out", out_path, "output file for the system json");

  CLI::App* hopf = app.add_subcommand("hopf", "sample the hopf clutching family of a system");
  hopf->add_option("--k", k, "number of generators")->required();
  hopf->add_option("--copies", copies, "multiplicity of the first irreducible");
  hopf->add_option("--copies-prime", copies_prime,
                   "multiplicity of the second irreducible (k = 3 mod 4 only)");
  hopf->add_option("--grid-t", grid_t, "meridian resolution T (even)");
  hopf->add_flag("--allow-large", allow_large, "permit k = 4..7 grids");
  hopf->add_option("--out", out_path, "output file for the family json");

  CLI::App* classify = app.add_subcommand("classify", "classify a clutching family file");
  classify->add_option("--in", in_path, "family json file")->required();
  classify->add_option("--path-n", path_n, "meridian sampling target N");
  classify->add_option("--tol", tol, "flow convergence tolerance");
  classify->add_option("--max-sweeps", max_sweeps, "sweep budget per shorten");
  classify->add_option("--seed", seed, "deterministic seed");
  classify->add_option("--workers", workers, "meridian flow workers");
  classify->add_flag("--allow-large", allow_large, "permit k = 4..7 grids");
  classify->add_option("--out", out_path, "output file for the report json");

  CLI::App* flow = app.add_subcommand("flow-demo", "shorten a random antipodal path");
  flow->add_option("--n", n, "matrix dimension (even)")->required();
  flow->add_option("--path-n", path_n, "segment count N");
  flow->add_option("--tol", tol, "relative energy tolerance");
  flow->add_option("--max-sweeps", max_sweeps, "sweep budget");
  flow->add_option("--seed", seed, "deterministic seed");
  flow->add_option("--out", out_path, "output file for the flow report json");

  CLI::App* index = app.add_subcommand("index", "index bound and corner-cut demonstration");
  index->add_option("angles", angle_text, "comma-separated odd angles, e.g. 3,1,1")
      ->required();
  index->add_option("--k", k, "midpoint stage: 1 unsigned, 2 signed");
  index->add_option("--out", out_path, "output file for the index json");

  CLI::App* verify = app.add_subcommand("verify", "run the library invariant suite");
  verify->add_option("--seed", seed, "deterministic seed");
  verify->add_option("--workers", workers, "classifier flow workers");

  std::vector<const char*> argv;
  argv.push_back("hopflab");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (app.got_subcommand(tables)) return cmd_tables(out_path, out, err);
    if (app.got_subcommand(build)) return cmd_build(k, copies, copies_prime, out_path, out, err);
    if (app.got_subcommand(hopf))
      return cmd_hopf(k, copies, copies_prime, grid_t, allow_large, out_path, out, err);
    if (app.got_subcommand(classify)) {
      cf::ClassifyOptions opts;
      opts.path_segments = path_n;
      opts.tol = tol;
      opts.max_sweeps = max_sweeps;
      opts.seed = seed;
      opts.workers = workers;
      return cmd_classify(in_path, opts, allow_large, out_path, out, err);
    }
    if (app.got_subcommand(flow)) {
      pf::ShortenOptions opts;
      opts.tol = tol;
      opts.max_sweeps = max_sweeps;
      return cmd_flow_demo(n, path_n, opts, seed, out_path, out, err);
    }
    if (app.got_subcommand(index)) return cmd_index(angle_text, k, out_path, out, err);
    if (app.got_subcommand(verify)) return cmd_verify(seed, workers, out);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const BranchError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace hopflab::cli
