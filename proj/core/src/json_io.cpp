#include "hopflab/json_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "hopflab/centriole.hpp"
#include "hopflab/matrix.hpp"

namespace hopflab::json_io {

namespace {

// insertion-ordered nodes plus shortest-round-trip doubles make dumps of
// identical values byte-identical
using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const char* who, const std::string& what) {
  throw InvalidInput(std::string(who) + ": " + what);
}

Json parse(const std::string& text, const char* who) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(who, e.what());
  }
}

Json flat(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
  return a;
}

Json flat(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

double number(const Json& j, const char* who) {
  if (!j.is_number()) fail(who, "expected a number, got " + std::string(j.type_name()));
  return j.get<double>();
}

int integer(const Json& j, const char* who) {
  if (!j.is_number_integer()) fail(who, "expected an integer, got " + j.dump());
  return j.get<int>();
}

const Json& field(const Json& j, const char* key, const char* who) {
  if (!j.is_object()) fail(who, "expected an object, got " + std::string(j.type_name()));
  const auto it = j.find(key);
  if (it == j.end()) fail(who, std::string("missing field \"") + key + "\"");
  return *it;
}

Matrix square(const Json& a, int n, const char* who) {
  if (!a.is_array()) fail(who, "expected a flat matrix array");
  if (static_cast<int>(a.size()) != n * n)
    fail(who, "matrix array has " + std::to_string(a.size()) + " entries, expected " +
                  std::to_string(n) + "x" + std::to_string(n));
  Matrix m(n, n);
  std::size_t p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = number(a[p++], who);
  return m;
}

Json system_node(const clifford::CliffordSystem& s) {
  Json j;
  j["k"] = s.k;
  j["n"] = s.n;
  Json gens = Json::array();
  for (const Matrix& g : s.generators) gens.push_back(flat(g));
  j["generators"] = std::move(gens);
  return j;
}

clifford::CliffordSystem system_node_from(const Json& j, const char* who) {
  clifford::CliffordSystem s;
  s.k = integer(field(j, "k", who), who);
  s.n = integer(field(j, "n", who), who);
  if (s.k < 0) fail(who, "k must be non-negative");
  if (s.n < 0) fail(who, "n must be non-negative");
  const Json& gens = field(j, "generators", who);
  if (!gens.is_array() || static_cast<int>(gens.size()) != s.k)
    fail(who, "expected " + std::to_string(s.k) + " generator arrays");
  for (const Json& g : gens) s.generators.push_back(square(g, s.n, who));
  return s;
}

}  // namespace

std::string to_json(const clifford::CliffordSystem& s) { return system_node(s).dump(2); }

clifford::CliffordSystem system_from_json(const std::string& text) {
  const char* who = "system json";
  return system_node_from(parse(text, who), who);
}

std::string to_json(const pathflow::MapFamily& family) {
  Json j;
  j["k"] = family.grid.k;
  j["T"] = family.grid.t;
  Json nodes = Json::array();
  for (std::size_t i = 0; i < family.values.size(); ++i) {
    Json node;
    node["coords"] = flat(family.grid.nodes[i]);
    node["value"] = flat(family.values[i]);
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);
  return j.dump(2);
}

pathflow::MapFamily family_from_json(const std::string& text) {
  const char* who = "family json";
  const Json j = parse(text, who);
  const int k = integer(field(j, "k", who), who);
  const int t = integer(field(j, "T", who), who);
  pathflow::MapFamily fam;
  try {
    fam.grid = pathflow::SphereGrid::build(k, t);
  } catch (const InvalidInput& e) {
    fail(who, e.what());
  }
  const Json& nodes = field(j, "nodes", who);
  if (!nodes.is_array() || static_cast<int>(nodes.size()) != fam.grid.node_count())
    fail(who, "expected " + std::to_string(fam.grid.node_count()) + " nodes for k=" +
                  std::to_string(k) + ", T=" + std::to_string(t));
  int n = -1;
  for (int i = 0; i < fam.grid.node_count(); ++i) {
    const Json& coords = field(nodes[i], "coords", who);
    if (!coords.is_array() || static_cast<int>(coords.size()) != k + 1)
      fail(who, "node " + std::to_string(i) + ": expected " + std::to_string(k + 1) +
                    " coordinates");
    for (int c = 0; c <= k; ++c)
      if (std::abs(number(coords[c], who) - fam.grid.nodes[i](c)) > 1e-12)
        fail(who, "node " + std::to_string(i) +
                      ": coordinates do not match the canonical grid for k=" +
                      std::to_string(k) + ", T=" + std::to_string(t));
    const Json& value = field(nodes[i], "value", who);
    if (n < 0) {
      const std::size_t len = value.is_array() ? value.size() : 0;
      n = 0;
      while (static_cast<std::size_t>(n) * n < len) ++n;
    }
    fam.values.push_back(square(value, n, who));
  }
  if (n <= 0) fail(who, "family has no values");
  return fam;
}

std::string to_json(const classifier::BundleReport& report) {
  Json j;
  j["k"] = report.k;
  j["n"] = report.n;
  Json cls;
  cls["kind"] = clifford::group_kind_name(report.cls.kind);
  cls["value"] = report.cls.value;
  j["class"] = std::move(cls);
  j["trivial_rank"] = report.trivial_rank;
  j["system"] = system_node(report.system);
  Json diag;
  Json stages = Json::array();
  for (const classifier::StageSummary& s : report.diagnostics.stages) {
    Json st;
    st["meridians"] = s.meridians;
    st["max_sweeps_used"] = s.max_sweeps_used;
    st["max_deviation"] = s.max_deviation;
    st["max_membership_residual"] = s.max_membership_residual;
    st["max_odd_angle_residual"] = s.max_odd_angle_residual;
    st["align_completed_branch"] = s.align_completed_branch;
    stages.push_back(std::move(st));
  }
  diag["stages"] = std::move(stages);
  diag["loop_angles"] = report.diagnostics.loop_angles;
  diag["loop_sweeps"] = report.diagnostics.loop_sweeps;
  diag["loop_energy"] = report.diagnostics.loop_energy;
  diag["pad_rounds"] = report.diagnostics.pad_rounds;
  diag["padded_n"] = report.diagnostics.padded_n;
  diag["recovered_residual"] = report.diagnostics.recovered_residual;
  j["diagnostics"] = std::move(diag);
  return j.dump(2);
}

classifier::BundleReport report_from_json(const std::string& text) {
  const char* who = "report json";
  const Json j = parse(text, who);
  classifier::BundleReport rep;
  rep.k = integer(field(j, "k", who), who);
  rep.n = integer(field(j, "n", who), who);
  const Json& cls = field(j, "class", who);
  const Json& kind = field(cls, "kind", who);
  if (!kind.is_string()) fail(who, "class kind must be a string");
  const std::string name = kind.get<std::string>();
  bool found = false;
  for (clifford::GroupKind g :
       {clifford::GroupKind::Z, clifford::GroupKind::Z2, clifford::GroupKind::Zero})
    if (name == clifford::group_kind_name(g)) {
      rep.cls.kind = g;
      found = true;
    }
  if (!found) fail(who, "unknown class kind \"" + name + "\"");
  const Json& value = field(cls, "value", who);
  if (!value.is_number_integer()) fail(who, "class value must be an integer");
  rep.cls.value = value.get<long>();
  rep.trivial_rank = integer(field(j, "trivial_rank", who), who);
  rep.system = system_node_from(field(j, "system", who), who);
  const Json& diag = field(j, "diagnostics", who);
  const Json& stages = field(diag, "stages", who);
  if (!stages.is_array()) fail(who, "diagnostics stages must be an array");
  for (const Json& st : stages) {
    classifier::StageSummary s;
    s.meridians = integer(field(st, "meridians", who), who);
    s.max_sweeps_used = integer(field(st, "max_sweeps_used", who), who);
    s.max_deviation = number(field(st, "max_deviation", who), who);
    s.max_membership_residual = number(field(st, "max_membership_residual", who), who);
    s.max_odd_angle_residual = number(field(st, "max_odd_angle_residual", who), who);
    const Json& branch = field(st, "align_completed_branch", who);
    if (!branch.is_boolean()) fail(who, "align_completed_branch must be a boolean");
    s.align_completed_branch = branch.get<bool>();
    rep.diagnostics.stages.push_back(s);
  }
  const Json& angles = field(diag, "loop_angles", who);
  if (!angles.is_array()) fail(who, "loop_angles must be an array");
  for (const Json& a : angles) rep.diagnostics.loop_angles.push_back(number(a, who));
  rep.diagnostics.loop_sweeps = integer(field(diag, "loop_sweeps", who), who);
  rep.diagnostics.loop_energy = number(field(diag, "loop_energy", who), who);
  rep.diagnostics.pad_rounds = integer(field(diag, "pad_rounds", who), who);
  rep.diagnostics.padded_n = integer(field(diag, "padded_n", who), who);
  rep.diagnostics.recovered_residual = number(field(diag, "recovered_residual", who), who);
  return rep;
}

std::string to_json(const centriole::CentrioleContext& ctx) {
  Json j;
  j["chain"] = system_node(ctx.chain);
  j["base"] = flat(ctx.base);
  return j.dump(2);
}

centriole::CentrioleContext context_from_json(const std::string& text) {
  const char* who = "context json";
  const Json j = parse(text, who);
  centriole::CentrioleContext ctx;
  ctx.chain = system_node_from(field(j, "chain", who), who);
  ctx.base = square(field(j, "base", who), ctx.chain.n, who);
  return ctx;
}

}  // namespace hopflab::json_io
