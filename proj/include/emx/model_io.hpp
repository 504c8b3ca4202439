#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "emx/cart.hpp"

// Portable tree documents, Graphviz diagrams and CP-table CSVs.
//
// Tree document (JSON):
//   format        "emx-tree"
//   version       1
//   target        pollutant name ("co2", "nox", "thc", "co", "mpg")
//   params        {cp, minsplit, minbucket, xval, max_depth, seed}
//   root_deviance number
//   nodes         pre-order array; node i has
//                   id, n, mean, deviance, complexity,
//                   split  (internal only) {feature, kind: "numeric", threshold,
//                          left_when: "<" | ">="} or {feature: "fuel_type",
//                          kind: "categorical", left: [codes], known: [codes]}
//                   left, right (internal only) child ids
//   cp_table      array of {CP, nsplit, rel_error, xerror, xstd}; xerror and
//                 xstd are null when cross-validation did not run

namespace emx::model_io {

inline constexpr int kFormatVersion = 1;

std::string serialize(const cart::FittedTree& tree);

// Throws Error(version_mismatch) for another format version and
// Error(schema_mismatch) or Error(parse) for malformed documents.
cart::FittedTree deserialize(std::string_view text);

void save(const cart::FittedTree& tree, const std::filesystem::path& path);
cart::FittedTree load(const std::filesystem::path& path);

// Left edges are the "yes" branch of the node's rule.
std::string export_dot(const cart::FittedTree& tree);

// Rule text as shown in diagrams, e.g. "Year >= 2019", "Fuel = DIE,ELD".
std::string rule_label(const cart::Split& split);

void write_cp_table(std::ostream& out, const cart::FittedTree& tree);

}  // namespace emx::model_io
