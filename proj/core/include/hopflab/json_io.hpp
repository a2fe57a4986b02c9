#pragma once

#include "hopflab/classifier.hpp"
#include "hopflab/clifford.hpp"
#include "hopflab/pathflow.hpp"

#include <string>

namespace hopflab::json_io {

// stable two-space-indented json; matrices are row-major flat arrays of
// 64-bit floats, so identical inputs serialize byte-identically

// {"k": int, "n": int, "generators": [[...], ...]}
std::string to_json(const clifford::CliffordSystem& s);
clifford::CliffordSystem system_from_json(const std::string& text);

// {"k": int, "T": int, "nodes": [{"coords": [...], "value": [...]}, ...]}
std::string to_json(const pathflow::MapFamily& family);
pathflow::MapFamily family_from_json(const std::string& text);

// {"k", "n", "class": {"kind", "value"}, "trivial_rank", "system", "diagnostics"}
std::string to_json(const classifier::BundleReport& report);
classifier::BundleReport report_from_json(const std::string& text);

// {"chain": system json, "base": [...]}
std::string to_json(const centriole::CentrioleContext& ctx);
centriole::CentrioleContext context_from_json(const std::string& text);

}  // namespace hopflab::json_io
