#include "emx/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "emx/csv.hpp"
#include "json.hpp"

namespace emx::model_io {

using nlohmann::ordered_json;

namespace {

std::string_view feature_label(cart::Feature f) {
  switch (f) {
    case cart::Feature::model_year: return "Year";
    case cart::Feature::engine_cc: return "CC";
    case cart::Feature::fuel_type: return "Fuel";
  }
  return "?";
}

ordered_json fuel_list(std::uint8_t set) {
  ordered_json out = ordered_json::array();
  for (FuelType f : kAllFuelTypes) {
    if (set & fuel_bit(f)) out.push_back(std::string(to_string(f)));
  }
  return out;
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::schema_mismatch, "tree document: " + what);
}

const ordered_json& field(const ordered_json& obj, const char* key) {
  if (!obj.is_object()) malformed(std::string("expected an object holding '") + key + "'");
  const auto it = obj.find(key);
  if (it == obj.end()) malformed(std::string("missing '") + key + "'");
  return *it;
}

double number(const ordered_json& obj, const char* key) {
  const auto& v = field(obj, key);
  if (!v.is_number()) malformed(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

long long integer(const ordered_json& obj, const char* key) {
  const auto& v = field(obj, key);
  if (!v.is_number_integer()) malformed(std::string("'") + key + "' must be an integer");
  return v.get<long long>();
}

std::optional<double> nullable_number(const ordered_json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) malformed(std::string("'") + key + "' must be a number or null");
  return it->get<double>();
}

std::uint8_t fuel_set(const ordered_json& list) {
  if (!list.is_array()) malformed("fuel sets must be arrays");
  std::uint8_t set = 0;
  for (const auto& code : list) {
    const auto fuel = code.is_string() ? parse_fuel_type(code.get<std::string>()) : std::nullopt;
    if (!fuel) malformed("unknown fuel code in split");
    set |= fuel_bit(*fuel);
  }
  return set;
}

ordered_json split_json(const cart::Split& split) {
  ordered_json s;
  s["feature"] = std::string(cart::to_string(split.feature));
  if (const auto* num = std::get_if<cart::NumericRule>(&split.rule)) {
    s["kind"] = "numeric";
    s["threshold"] = num->threshold;
    s["left_when"] = num->left_when_less ? "<" : ">=";
  } else {
    const auto& cat = std::get<cart::CategoricalRule>(split.rule);
    s["kind"] = "categorical";
    s["left"] = fuel_list(cat.left_set);
    s["known"] = fuel_list(cat.known_set);
  }
  return s;
}

cart::Split parse_split(const ordered_json& s) {
  const auto& feature_text = field(s, "feature");
  const auto feature =
      feature_text.is_string() ? cart::parse_feature(feature_text.get<std::string>()) : std::nullopt;
  if (!feature) malformed("unknown split feature");
  const auto& kind = field(s, "kind");
  cart::Split split;
  split.feature = *feature;
  if (kind == "numeric") {
    if (*feature == cart::Feature::fuel_type) malformed("fuel_type splits must be categorical");
    cart::NumericRule rule;
    rule.threshold = number(s, "threshold");
    const auto& when = field(s, "left_when");
    if (when == "<") {
      rule.left_when_less = true;
    } else if (when == ">=") {
      rule.left_when_less = false;
    } else {
      malformed("left_when must be \"<\" or \">=\"");
    }
    split.rule = rule;
  } else if (kind == "categorical") {
    if (*feature != cart::Feature::fuel_type) malformed("categorical splits must use fuel_type");
    cart::CategoricalRule rule;
    rule.left_set = fuel_set(field(s, "left"));
    rule.known_set = fuel_set(field(s, "known"));
    if ((rule.left_set & ~rule.known_set) != 0 || rule.left_set == 0 ||
        rule.left_set == rule.known_set) {
      malformed("categorical left set must be a proper non-empty subset of known");
    }
    split.rule = rule;
  } else {
    malformed("split kind must be numeric or categorical");
  }
  return split;
}

// Pre-order check: walking from the root must visit ids 0, 1, 2, ... exactly.
void check_preorder(const std::vector<cart::TreeNode>& nodes, std::size_t i, std::size_t& next,
                    int depth) {
  if (depth > 10000) malformed("tree too deep");
  if (i != next) malformed("nodes are not in pre-order");
  ++next;
  const auto& node = nodes[i];
  if (node.is_leaf()) return;
  const auto l = static_cast<std::size_t>(node.left);
  const auto r = static_cast<std::size_t>(node.right);
  if (node.left < 0 || node.right < 0 || l >= nodes.size() || r >= nodes.size()) {
    malformed("child id out of range");
  }
  check_preorder(nodes, l, next, depth + 1);
  check_preorder(nodes, r, next, depth + 1);
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string serialize(const cart::FittedTree& tree) {
  ordered_json doc;
  doc["format"] = "emx-tree";
  doc["version"] = kFormatVersion;
  doc["target"] = std::string(to_string(tree.target_kind));
  doc["params"] = {{"cp", tree.params.cp},
                   {"minsplit", tree.params.minsplit},
                   {"minbucket", tree.params.minbucket},
                   {"xval", tree.params.xval},
                   {"max_depth", tree.params.max_depth},
                   {"seed", tree.params.seed}};
  doc["root_deviance"] = tree.root_deviance;
  ordered_json nodes = ordered_json::array();
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& node = tree.nodes[i];
    ordered_json n;
    n["id"] = i;
    n["n"] = node.n;
    n["mean"] = node.mean;
    n["deviance"] = node.deviance;
    n["complexity"] = node.complexity;
    if (!node.is_leaf()) {
      n["split"] = split_json(*node.split);
      n["left"] = node.left;
      n["right"] = node.right;
    }
    nodes.push_back(std::move(n));
  }
  doc["nodes"] = std::move(nodes);
  ordered_json table = ordered_json::array();
  for (const auto& row : tree.cp_table) {
    ordered_json r;
    r["CP"] = row.cp;
    r["nsplit"] = row.nsplit;
    r["rel_error"] = row.rel_error;
    r["xerror"] = row.xerror ? ordered_json(*row.xerror) : ordered_json(nullptr);
    r["xstd"] = row.xstd ? ordered_json(*row.xstd) : ordered_json(nullptr);
    table.push_back(std::move(r));
  }
  doc["cp_table"] = std::move(table);
  return doc.dump(2) + "\n";
}

cart::FittedTree deserialize(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("tree document: ") + e.what());
  }
  if (!doc.is_object() || field(doc, "format") != "emx-tree") malformed("not an emx-tree document");
  const auto version = integer(doc, "version");
  if (version != kFormatVersion) {
    throw Error(ErrorCode::version_mismatch, "tree document version " + std::to_string(version) +
                                                 ", expected " + std::to_string(kFormatVersion));
  }

  cart::FittedTree tree;
  const auto& target = field(doc, "target");
  const auto kind = target.is_string() ? parse_pollutant(target.get<std::string>()) : std::nullopt;
  if (!kind) malformed("unknown target");
  tree.target_kind = *kind;

  const auto& params = field(doc, "params");
  tree.params.cp = number(params, "cp");
  tree.params.minsplit = static_cast<int>(integer(params, "minsplit"));
  tree.params.minbucket = static_cast<int>(integer(params, "minbucket"));
  tree.params.xval = static_cast<int>(integer(params, "xval"));
  tree.params.max_depth = static_cast<int>(integer(params, "max_depth"));
  const auto& seed = field(params, "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) malformed("'seed' must be an integer");
  tree.params.seed = seed.get<std::uint64_t>();
  tree.root_deviance = number(doc, "root_deviance");

  const auto& nodes = field(doc, "nodes");
  if (!nodes.is_array() || nodes.empty()) malformed("'nodes' must be a non-empty array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (integer(n, "id") != static_cast<long long>(i)) malformed("node ids must be 0..N-1 in order");
    cart::TreeNode node;
    const auto count = integer(n, "n");
    if (count < 0) malformed("node n must be non-negative");
    node.n = static_cast<std::size_t>(count);
    node.mean = number(n, "mean");
    node.deviance = number(n, "deviance");
    node.complexity = number(n, "complexity");
    const auto it = n.find("split");
    if (it != n.end() && !it->is_null()) {
      node.split = parse_split(*it);
      node.left = static_cast<std::int32_t>(integer(n, "left"));
      node.right = static_cast<std::int32_t>(integer(n, "right"));
    } else if (n.contains("left") || n.contains("right")) {
      malformed("leaf nodes cannot have children");
    }
    tree.nodes.push_back(std::move(node));
  }
  std::size_t next = 0;
  check_preorder(tree.nodes, 0, next, 0);
  if (next != tree.nodes.size()) malformed("unreachable nodes");

  const auto& table = field(doc, "cp_table");
  if (!table.is_array()) malformed("'cp_table' must be an array");
  for (const auto& r : table) {
    cart::CpRow row;
    row.cp = number(r, "CP");
    row.nsplit = static_cast<int>(integer(r, "nsplit"));
    row.rel_error = number(r, "rel_error");
    row.xerror = nullable_number(r, "xerror");
    row.xstd = nullable_number(r, "xstd");
    tree.cp_table.push_back(row);
  }
  return tree;
}

void save(const cart::FittedTree& tree, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << serialize(tree);
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
}

cart::FittedTree load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::not_found, "model file not found: " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return deserialize(text.str());
}

std::string rule_label(const cart::Split& split) {
  std::string out(feature_label(split.feature));
  if (const auto* num = std::get_if<cart::NumericRule>(&split.rule)) {
    out += num->left_when_less ? " < " : " >= ";
    out += format_number(num->threshold);
    return out;
  }
  const auto& cat = std::get<cart::CategoricalRule>(split.rule);
  out += " = ";
  bool first = true;
  for (FuelType f : kAllFuelTypes) {
    if (!(cat.left_set & fuel_bit(f))) continue;
    if (!first) out += ',';
    out += to_string(f);
    first = false;
  }
  return out;
}

std::string export_dot(const cart::FittedTree& tree) {
  std::ostringstream out;
  out << "digraph tree {\n";
  out << "  node [shape=box, fontname=\"Helvetica\"];\n";
  out << "  edge [fontname=\"Helvetica\"];\n";
  const double root_n = tree.nodes.empty() ? 0.0 : static_cast<double>(tree.nodes[0].n);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& node = tree.nodes[i];
    const double pct = root_n > 0.0 ? 100.0 * static_cast<double>(node.n) / root_n : 0.0;
    char share[64];
    std::snprintf(share, sizeof share, "n=%zu (%.0f%%)", node.n, pct);
    std::string label = node.is_leaf() ? short_number(node.mean)
                                       : rule_label(*node.split) + "\\nmean=" + short_number(node.mean);
    label += "\\n";
    label += share;
    out << "  n" << i << " [label=\"" << label << "\"";
    if (node.is_leaf()) out << ", style=rounded";
    out << "];\n";
  }
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& node = tree.nodes[i];
    if (node.is_leaf()) continue;
    out << "  n" << i << " -> n" << node.left << " [label=\"yes\"];\n";
    out << "  n" << i << " -> n" << node.right << " [label=\"no\"];\n";
  }
  out << "}\n";
  return out.str();
}

void write_cp_table(std::ostream& out, const cart::FittedTree& tree) {
  csv::write_row(out, {"CP", "nsplit", "rel_error", "xerror", "xstd"});
  for (const auto& row : tree.cp_table) {
    csv::write_row(out, {format_number(row.cp), std::to_string(row.nsplit),
                         format_number(row.rel_error),
                         row.xerror ? format_number(*row.xerror) : std::string(),
                         row.xstd ? format_number(*row.xstd) : std::string()});
  }
}

}  // namespace emx::model_io
