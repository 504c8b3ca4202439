#include "emx/cart.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "emx/kernels.hpp"
#include "emx/rng.hpp"

namespace emx::cart {

std::string_view to_string(Feature feature) {
  switch (feature) {
    case Feature::model_year: return "model_year";
    case Feature::engine_cc: return "engine_cc";
    case Feature::fuel_type: return "fuel_type";
  }
  return "?";
}

std::optional<Feature> parse_feature(std::string_view text) {
  for (Feature f : kAllFeatures) {
    if (text == to_string(f)) return f;
  }
  return std::nullopt;
}

void validate(const FeatureVector& x, YearRange years) {
  if (!(x.engine_cc > 0.0) || !std::isfinite(x.engine_cc)) {
    throw Error(ErrorCode::invalid_argument, "engine_cc must be positive");
  }
  if (x.model_year < years.min || x.model_year > years.max) {
    throw Error(ErrorCode::invalid_argument,
                "model_year out of range: " + std::to_string(x.model_year));
  }
  if (static_cast<std::size_t>(x.fuel_type) >= kFuelTypeCount) {
    throw Error(ErrorCode::invalid_argument, "unknown fuel type");
  }
}

void validate(const TrainingTable& table, YearRange years) {
  if (table.rows.empty()) {
    throw Error(ErrorCode::invalid_argument, "training table is empty");
  }
  for (const auto& row : table.rows) {
    validate(row.x, years);
    if (!std::isfinite(row.target)) {
      throw Error(ErrorCode::invalid_argument, "training target is not finite");
    }
  }
}

FitParams FitParams::with_sizes(std::optional<int> minsplit, std::optional<int> minbucket,
                                FitParams base) {
  if (minsplit && minbucket) {
    base.minsplit = *minsplit;
    base.minbucket = *minbucket;
  } else if (minbucket) {
    base.minbucket = *minbucket;
    base.minsplit = *minbucket * 3;
  } else if (minsplit) {
    base.minsplit = *minsplit;
    base.minbucket = std::max(1, *minsplit / 3);
  }
  return base;
}

FitParams FitParams::with_sizes(std::optional<int> minsplit, std::optional<int> minbucket) {
  return with_sizes(minsplit, minbucket, FitParams{});
}

void validate(const FitParams& params) {
  if (!(params.cp >= 0.0) || !std::isfinite(params.cp)) {
    throw Error(ErrorCode::invalid_argument, "cp must be a finite number >= 0");
  }
  if (params.minsplit < 1 || params.minbucket < 1) {
    throw Error(ErrorCode::invalid_argument, "minsplit and minbucket must be positive");
  }
  if (params.xval < 0 || params.xval == 1) {
    throw Error(ErrorCode::invalid_argument, "xval must be 0 or at least 2");
  }
  if (params.max_depth < 1) {
    throw Error(ErrorCode::invalid_argument, "max_depth must be positive");
  }
}

bool operator==(const NumericRule& a, const NumericRule& b) {
  return a.threshold == b.threshold && a.left_when_less == b.left_when_less;
}

bool operator==(const CategoricalRule& a, const CategoricalRule& b) {
  return a.left_set == b.left_set && a.known_set == b.known_set;
}

bool operator==(const Split& a, const Split& b) {
  return a.feature == b.feature && a.rule == b.rule;
}

int FittedTree::split_count() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(),
                                        [](const TreeNode& n) { return !n.is_leaf(); }));
}

int FittedTree::leaf_count() const {
  return static_cast<int>(nodes.size()) - split_count();
}

double FittedTree::relative_error() const {
  if (root_deviance <= 0.0) return 1.0;
  double sse = 0.0;
  for (const auto& node : nodes) {
    if (node.is_leaf()) sse += node.deviance;
  }
  return sse / root_deviance;
}

namespace {

// Improvements closer than this (relative to the node deviance) are ties.
constexpr double kTieTolerance = 1e-12;

struct Moments {
  double mean = 0.0;
  double deviance = 0.0;
};

Moments node_moments(std::span<const TrainingRow> rows, std::vector<double>& scratch) {
  scratch.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) scratch[i] = rows[i].target;
  Moments m;
  m.mean = kernels::sum(scratch) / static_cast<double>(rows.size());
  m.deviance = kernels::sum_sq_dev(scratch, m.mean);
  return m;
}

double split_gain(double n_left, double sum_left, double n_right, double sum_right) {
  const double diff = sum_left / n_left - sum_right / n_right;
  return n_left * n_right / (n_left + n_right) * diff * diff;
}

// Sorted fuel ids of a set, for lexicographic comparison of left sets.
bool lex_less(std::uint8_t a, std::uint8_t b) {
  int ia[kFuelTypeCount], ib[kFuelTypeCount];
  int na = 0, nb = 0;
  for (unsigned id = 0; id < kFuelTypeCount; ++id) {
    if (a & (1u << id)) ia[na++] = static_cast<int>(id);
    if (b & (1u << id)) ib[nb++] = static_cast<int>(id);
  }
  return std::lexicographical_compare(ia, ia + na, ib, ib + nb);
}

struct NumericCut {
  double threshold;
  double gain;
};

// Admissible midpoint cuts in ascending threshold order.
std::vector<NumericCut> numeric_cuts(std::span<const TrainingRow> rows, Feature feature,
                                     int minbucket, double mean) {
  const std::size_t n = rows.size();
  std::vector<std::pair<double, double>> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    points[i] = {rows[i].x.numeric(feature), rows[i].target - mean};
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<NumericCut> cuts;
  if (n == 0 || points.front().first == points.back().first) return cuts;

  double total = 0.0;
  for (const auto& p : points) total += p.second;

  const auto bucket = static_cast<std::size_t>(minbucket);
  double sum_left = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    sum_left += points[i].second;
    const std::size_t n_left = i + 1;
    const std::size_t n_right = n - n_left;
    if (n_right < bucket) break;
    if (n_left < bucket || points[i].first == points[i + 1].first) continue;
    const double gain = split_gain(static_cast<double>(n_left), sum_left,
                                   static_cast<double>(n_right), total - sum_left);
    cuts.push_back({0.5 * (points[i].first + points[i + 1].first), gain});
  }
  return cuts;
}

struct FuelScan {
  std::uint8_t known = 0;
  std::size_t n = 0;
  std::size_t count[kFuelTypeCount] = {};
  double sum[kFuelTypeCount] = {};  // centred on the node mean
  double best_gain = -1.0;          // < 0 when no admissible partition
};

// Calls visit(left_set, gain) for every partition of the present codes whose
// sides both hold minbucket rows. Left sets contain the lowest present code.
template <typename Visit>
void for_each_partition(const FuelScan& scan, int minbucket, Visit&& visit) {
  const std::uint8_t known = scan.known;
  if (std::popcount(known) < 2) return;
  const unsigned lowest = 1u << std::countr_zero(known);
  const auto bucket = static_cast<std::size_t>(minbucket);
  double total = 0.0;
  for (std::size_t id = 0; id < kFuelTypeCount; ++id) total += scan.sum[id];
  for (unsigned mask = 1; mask < (1u << kFuelTypeCount); ++mask) {
    const auto left = static_cast<std::uint8_t>(mask);
    if ((left & ~known) != 0 || left == known || !(left & lowest)) continue;
    std::size_t n_left = 0;
    double sum_left = 0.0;
    for (std::size_t id = 0; id < kFuelTypeCount; ++id) {
      if (left & (1u << id)) {
        n_left += scan.count[id];
        sum_left += scan.sum[id];
      }
    }
    const std::size_t n_right = scan.n - n_left;
    if (n_left < bucket || n_right < bucket) continue;
    visit(left, split_gain(static_cast<double>(n_left), sum_left, static_cast<double>(n_right),
                           total - sum_left));
  }
}

// Six codes give at most 31 partitions, so the search is exhaustive. Without a
// binding minbucket the optimum is a prefix cut of the codes ordered by mean;
// with one it need not be.
FuelScan fuel_scan(std::span<const TrainingRow> rows, int minbucket, double mean) {
  FuelScan scan;
  scan.n = rows.size();
  for (const auto& row : rows) {
    const auto id = static_cast<std::size_t>(row.x.fuel_type);
    ++scan.count[id];
    scan.sum[id] += row.target - mean;
    scan.known |= static_cast<std::uint8_t>(1u << id);
  }
  for_each_partition(scan, minbucket, [&](std::uint8_t, double gain) {
    scan.best_gain = std::max(scan.best_gain, gain);
  });
  return scan;
}

// Among partitions reaching `floor`, the lexicographically smallest left set.
std::optional<SplitCandidate> fuel_pick(const FuelScan& scan, int minbucket, double floor) {
  std::optional<SplitCandidate> best;
  std::uint8_t best_left = 0;
  for_each_partition(scan, minbucket, [&](std::uint8_t left, double gain) {
    if (gain < floor) return;
    if (!best || lex_less(left, best_left)) {
      best = SplitCandidate{Split{Feature::fuel_type, CategoricalRule{left, scan.known}}, gain};
      best_left = left;
    }
  });
  return best;
}

// Best gain of one feature, or < 0 when it has no admissible split.
double feature_max(std::span<const TrainingRow> rows, Feature feature, int minbucket,
                   double mean, std::vector<NumericCut>& cuts, FuelScan& scan) {
  if (feature == Feature::fuel_type) {
    scan = fuel_scan(rows, minbucket, mean);
    return scan.best_gain;
  }
  cuts = numeric_cuts(rows, feature, minbucket, mean);
  double best = -1.0;
  for (const auto& c : cuts) best = std::max(best, c.gain);
  return best;
}

std::optional<SplitCandidate> feature_pick(Feature feature, int minbucket, const std::vector<NumericCut>& cuts,
                                           const FuelScan& scan, double floor) {
  if (feature == Feature::fuel_type) return fuel_pick(scan, minbucket, floor);
  for (const auto& c : cuts) {
    if (c.gain >= floor) return SplitCandidate{Split{feature, NumericRule{c.threshold, true}}, c.gain};
  }
  return std::nullopt;
}

// Maximal gain over `features`; among candidates within tolerance of it the
// lowest feature id wins, then the smallest threshold or left set.
std::optional<SplitCandidate> search(std::span<const TrainingRow> rows,
                                     std::span<const Feature> features, int minbucket,
                                     const Moments& m) {
  const double tolerance = kTieTolerance * m.deviance;
  std::array<std::vector<NumericCut>, kFeatureCount> cuts;
  std::array<FuelScan, kFeatureCount> scans;
  double best = -1.0;
  for (Feature f : features) {
    const auto i = static_cast<std::size_t>(f);
    best = std::max(best, feature_max(rows, f, minbucket, m.mean, cuts[i], scans[i]));
  }
  if (!(best > tolerance)) return std::nullopt;
  const double floor = best - tolerance;
  for (Feature f : features) {
    const auto i = static_cast<std::size_t>(f);
    if (auto pick = feature_pick(f, minbucket, cuts[i], scans[i], floor)) return pick;
  }
  return std::nullopt;
}

std::optional<SplitCandidate> feature_split(std::span<const TrainingRow> rows, Feature feature,
                                            int minbucket, const Moments& m) {
  const Feature one[1] = {feature};
  return search(rows, one, minbucket, m);
}

std::optional<SplitCandidate> overall_split(std::span<const TrainingRow> rows, int minbucket,
                                            const Moments& m) {
  return search(rows, kAllFeatures, minbucket, m);
}

bool goes_left(const Split& split, const FeatureVector& x) {
  if (const auto* num = std::get_if<NumericRule>(&split.rule)) {
    return num->goes_left(x.numeric(split.feature));
  }
  return std::get<CategoricalRule>(split.rule).goes_left(x.fuel_type);
}

class Grower {
 public:
  Grower(const FitParams& params, double gate) : params_(params), gate_(gate) {}

  std::vector<TreeNode> grow(std::vector<TrainingRow> rows) {
    nodes_.clear();
    build(rows, 0);
    return std::move(nodes_);
  }

 private:
  void build(std::span<TrainingRow> rows, int depth) {
    const auto index = nodes_.size();
    const Moments m = node_moments(rows, scratch_);
    TreeNode node;
    node.n = rows.size();
    node.mean = m.mean;
    node.deviance = m.deviance;
    nodes_.push_back(node);

    const auto n = static_cast<long long>(rows.size());
    const bool splittable = n >= params_.minsplit && n >= 2LL * params_.minbucket &&
                            depth < params_.max_depth && m.deviance > 0.0 &&
                            m.deviance >= gate_;
    if (!splittable) return;
    auto candidate = overall_split(rows, params_.minbucket, m);
    if (!candidate) return;

    const Split split = candidate->split;
    const auto mid = std::stable_partition(
        rows.begin(), rows.end(), [&](const TrainingRow& r) { return goes_left(split, r.x); });
    const auto n_left = static_cast<std::size_t>(mid - rows.begin());

    nodes_[index].split = split;
    nodes_[index].left = static_cast<std::int32_t>(nodes_.size());
    build(rows.first(n_left), depth + 1);
    nodes_[index].right = static_cast<std::int32_t>(nodes_.size());
    build(rows.subspan(n_left), depth + 1);
  }

  const FitParams& params_;
  double gate_;
  std::vector<TreeNode> nodes_;
  std::vector<double> scratch_;
};

std::vector<std::size_t> subtree_ends(const std::vector<TreeNode>& nodes) {
  std::vector<std::size_t> end(nodes.size());
  for (std::size_t i = nodes.size(); i-- > 0;) {
    end[i] = nodes[i].is_leaf() ? i + 1 : end[static_cast<std::size_t>(nodes[i].right)];
  }
  return end;
}

// Weakest-link pruning sequence: repeatedly collapse the internal node(s)
// with the smallest per-leaf SSE gain g(t) = (R(t) - R(T_t)) / (|T_t| - 1).
// Each node's complexity is the g at which it collapses, scaled by the root
// deviance; complexities never increase from parent to child.
void assign_complexity(std::vector<TreeNode>& nodes, double root_deviance) {
  const std::size_t count = nodes.size();
  const auto end = subtree_ends(nodes);
  std::vector<char> alive(count);
  std::size_t remaining = 0;
  for (std::size_t i = 0; i < count; ++i) {
    nodes[i].complexity = 0.0;
    alive[i] = !nodes[i].is_leaf();
    remaining += alive[i] ? 1 : 0;
  }

  std::vector<double> sse(count);
  std::vector<double> leaves(count);
  std::vector<double> gain(count);
  double previous = 0.0;
  while (remaining > 0) {
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t i = count; i-- > 0;) {
      if (!alive[i]) {
        sse[i] = nodes[i].deviance;
        leaves[i] = 1.0;
        continue;
      }
      const auto l = static_cast<std::size_t>(nodes[i].left);
      const auto r = static_cast<std::size_t>(nodes[i].right);
      sse[i] = sse[l] + sse[r];
      leaves[i] = leaves[l] + leaves[r];
      gain[i] = (nodes[i].deviance - sse[i]) / (leaves[i] - 1.0);
      alpha = std::min(alpha, gain[i]);
    }
    alpha = std::max(alpha, previous);
    const double cutoff = alpha + kTieTolerance * std::max(alpha, root_deviance);
    for (std::size_t i = 0; i < count; ++i) {
      if (!alive[i] || gain[i] > cutoff) continue;
      for (std::size_t j = i; j < end[i]; ++j) {
        if (alive[j]) {
          alive[j] = 0;
          nodes[j].complexity = alpha;
          --remaining;
        }
      }
    }
    previous = alpha;
  }
  if (root_deviance > 0.0) {
    for (auto& node : nodes) node.complexity /= root_deviance;
  }
}

bool kept(const TreeNode& node, double cp) {
  return !node.is_leaf() && node.complexity >= cp;
}

void copy_pruned(const std::vector<TreeNode>& in, std::size_t i, double cp,
                 std::vector<TreeNode>& out) {
  const auto index = out.size();
  out.push_back(in[i]);
  if (!kept(in[i], cp)) {
    out[index].split.reset();
    out[index].left = out[index].right = -1;
    out[index].complexity = 0.0;
    return;
  }
  out[index].left = static_cast<std::int32_t>(out.size());
  copy_pruned(in, static_cast<std::size_t>(in[i].left), cp, out);
  out[index].right = static_cast<std::int32_t>(out.size());
  copy_pruned(in, static_cast<std::size_t>(in[i].right), cp, out);
}

std::vector<TreeNode> pruned_nodes(const std::vector<TreeNode>& nodes, double cp) {
  std::vector<TreeNode> out;
  out.reserve(nodes.size());
  copy_pruned(nodes, 0, cp, out);
  return out;
}

// SSE and split count of the subtree that keeps splits with complexity >= cp.
std::pair<double, int> frontier(const std::vector<TreeNode>& nodes, std::size_t i, double cp) {
  if (!kept(nodes[i], cp)) return {nodes[i].deviance, 0};
  const auto [sl, nl] = frontier(nodes, static_cast<std::size_t>(nodes[i].left), cp);
  const auto [sr, nr] = frontier(nodes, static_cast<std::size_t>(nodes[i].right), cp);
  return {sl + sr, nl + nr + 1};
}

CpTable build_cp_table(const std::vector<TreeNode>& nodes, double root_deviance, double cp) {
  std::vector<double> levels;
  for (const auto& node : nodes) {
    if (!node.is_leaf()) levels.push_back(node.complexity);
  }
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  CpTable table;
  if (levels.empty()) {
    table.push_back(CpRow{cp, 0, 1.0, std::nullopt, std::nullopt});
    return table;
  }
  const double last_cp = cp < levels.back() ? cp : std::nextafter(levels.back(), 0.0);
  table.push_back(CpRow{levels.front(), 0, 1.0, std::nullopt, std::nullopt});
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto [sse, nsplit] = frontier(nodes, 0, levels[k]);
    const double row_cp = k + 1 < levels.size() ? levels[k + 1] : last_cp;
    table.push_back(CpRow{row_cp, nsplit, sse / root_deviance, std::nullopt, std::nullopt});
  }
  return table;
}

FittedTree grow_and_prune(const TrainingTable& table, const FitParams& params) {
  FittedTree tree;
  tree.params = params;
  tree.target_kind = table.target_kind;

  std::vector<double> scratch;
  const Moments root = node_moments(table.rows, scratch);
  tree.root_deviance = root.deviance;

  Grower grower(params, params.cp * root.deviance);
  auto nodes = grower.grow(table.rows);
  assign_complexity(nodes, root.deviance);
  tree.nodes = pruned_nodes(nodes, params.cp);
  tree.cp_table = build_cp_table(tree.nodes, root.deviance, params.cp);
  return tree;
}

void fill_cross_validation(const TrainingTable& table, const FitParams& params,
                           CpTable& cp_table, double root_deviance) {
  const std::size_t n = table.rows.size();
  if (params.xval < 2) {
    throw Error(ErrorCode::invalid_argument, "cross-validation needs xval >= 2");
  }
  if (static_cast<std::size_t>(params.xval) > n) {
    throw Error(ErrorCode::invalid_argument, "xval exceeds the number of rows");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(params.seed);
  rng.shuffle(order.begin(), order.end());
  std::vector<int> fold(n);
  for (std::size_t i = 0; i < n; ++i) {
    fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(params.xval));
  }

  const auto alphas = evaluation_points(cp_table);
  std::vector<std::vector<double>> squared(alphas.size(), std::vector<double>(n));

  FitParams sub = params;
  sub.xval = 0;
  for (int f = 0; f < params.xval; ++f) {
    TrainingTable train{table.target_kind, {}};
    train.rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (fold[i] != f) train.rows.push_back(table.rows[i]);
    }
    const FittedTree tree = grow_and_prune(train, sub);
    for (std::size_t i = 0; i < n; ++i) {
      if (fold[i] != f) continue;
      const auto& row = table.rows[i];
      for (std::size_t k = 0; k < alphas.size(); ++k) {
        const double err = row.target - predict_pruned(tree, row.x, alphas[k]).value;
        squared[k][i] = err * err;
      }
    }
  }

  for (std::size_t k = 0; k < alphas.size(); ++k) {
    if (root_deviance <= 0.0) {
      cp_table[k].xerror = 1.0;
      cp_table[k].xstd = 0.0;
      continue;
    }
    const double total = kernels::sum(squared[k]);
    const double spread = kernels::sum_sq_dev(squared[k], total / static_cast<double>(n));
    cp_table[k].xerror = total / root_deviance;
    cp_table[k].xstd = std::sqrt(spread) / root_deviance;
  }
}

template <class StopAt>
Prediction traverse(const FittedTree& tree, const FeatureVector& x, UnseenCategory policy,
                    StopAt stop) {
  Prediction out;
  std::size_t i = 0;
  for (;;) {
    const TreeNode& node = tree.nodes[i];
    if (node.is_leaf() || stop(node)) {
      out.value = node.mean;
      return out;
    }
    bool left = false;
    if (const auto* num = std::get_if<NumericRule>(&node.split->rule)) {
      left = num->goes_left(x.numeric(node.split->feature));
    } else {
      const auto& cat = std::get<CategoricalRule>(node.split->rule);
      if (cat.knows(x.fuel_type)) {
        left = cat.goes_left(x.fuel_type);
      } else {
        out.unmatched_category = true;
        if (policy == UnseenCategory::fail) {
          throw Error(ErrorCode::invalid_argument,
                      "fuel type " + std::string(to_string(x.fuel_type)) +
                          " was not seen by this tree");
        }
        left = policy == UnseenCategory::go_left;
      }
    }
    i = static_cast<std::size_t>(left ? node.left : node.right);
  }
}

}  // namespace

std::optional<SplitCandidate> best_split(std::span<const TrainingRow> rows, Feature feature,
                                         int minbucket) {
  if (rows.empty()) throw Error(ErrorCode::invalid_argument, "best_split needs rows");
  std::vector<double> scratch;
  return feature_split(rows, feature, std::max(1, minbucket), node_moments(rows, scratch));
}

std::optional<SplitCandidate> best_split(std::span<const TrainingRow> rows, int minbucket) {
  if (rows.empty()) throw Error(ErrorCode::invalid_argument, "best_split needs rows");
  std::vector<double> scratch;
  return overall_split(rows, std::max(1, minbucket), node_moments(rows, scratch));
}

FittedTree fit(const TrainingTable& table, const FitParams& params) {
  validate(table);
  validate(params);
  FittedTree tree = grow_and_prune(table, params);
  if (params.xval >= 2) {
    fill_cross_validation(table, params, tree.cp_table, tree.root_deviance);
  }
  return tree;
}

FittedTree prune(const FittedTree& tree, double cp) {
  if (!(cp >= 0.0)) throw Error(ErrorCode::invalid_argument, "cp must be >= 0");
  FittedTree out;
  out.params = tree.params;
  out.params.cp = std::max(tree.params.cp, cp);
  out.target_kind = tree.target_kind;
  out.root_deviance = tree.root_deviance;
  out.nodes = pruned_nodes(tree.nodes, cp);
  const int nsplit = out.split_count();
  for (const auto& row : tree.cp_table) {
    if (row.nsplit <= nsplit) out.cp_table.push_back(row);
  }
  return out;
}

CpTable cross_validate(const TrainingTable& table, const FitParams& params) {
  validate(table);
  validate(params);
  if (params.xval < 2) {
    throw Error(ErrorCode::invalid_argument, "cross-validation needs xval >= 2");
  }
  FittedTree tree = grow_and_prune(table, params);
  fill_cross_validation(table, params, tree.cp_table, tree.root_deviance);
  return tree.cp_table;
}

std::vector<double> evaluation_points(const CpTable& table) {
  std::vector<double> points;
  points.reserve(table.size());
  for (std::size_t k = 0; k < table.size(); ++k) {
    points.push_back(k == 0 ? std::numeric_limits<double>::infinity()
                            : std::sqrt(table[k].cp * table[k - 1].cp));
  }
  return points;
}

Prediction predict(const FittedTree& tree, const FeatureVector& x, UnseenCategory policy) {
  return traverse(tree, x, policy, [](const TreeNode&) { return false; });
}

Prediction predict_pruned(const FittedTree& tree, const FeatureVector& x, double cp,
                          UnseenCategory policy) {
  return traverse(tree, x, policy, [cp](const TreeNode& node) { return node.complexity < cp; });
}

}  // namespace emx::cart
