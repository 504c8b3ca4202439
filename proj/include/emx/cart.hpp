#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "emx/common.hpp"

// Regression trees grown by recursive binary partitioning on the ANOVA
// (sum of squared errors) criterion, with weakest-link cost-complexity
// pruning and k-fold cross-validated CP tables.

namespace emx::cart {

// Feature ids double as the tie-break order between features.
enum class Feature : std::uint8_t { model_year = 0, engine_cc = 1, fuel_type = 2 };

inline constexpr std::size_t kFeatureCount = 3;
inline constexpr Feature kAllFeatures[kFeatureCount] = {
    Feature::model_year, Feature::engine_cc, Feature::fuel_type};

std::string_view to_string(Feature feature);
std::optional<Feature> parse_feature(std::string_view text);

struct FeatureVector {
  int model_year = 0;
  double engine_cc = 0.0;
  FuelType fuel_type = FuelType::PET;

  double numeric(Feature feature) const {
    return feature == Feature::model_year ? static_cast<double>(model_year) : engine_cc;
  }
};

struct YearRange {
  int min = 1900;
  int max = 2100;
};

// Throws Error(invalid_argument) when engine_cc <= 0 or the year is outside range.
void validate(const FeatureVector& x, YearRange years = {});

struct TrainingRow {
  FeatureVector x;
  double target = 0.0;
  std::uint64_t group = 0;  // make/model/fuel/year key; holdout splits keep groups whole
};

struct TrainingTable {
  Pollutant target_kind = Pollutant::co2;
  std::vector<TrainingRow> rows;
};

void validate(const TrainingTable& table, YearRange years = {});

struct FitParams {
  double cp = 1e-4;
  int minsplit = 25;
  int minbucket = 100;
  int xval = 10;
  int max_depth = 30;
  std::uint64_t seed = 1;

  // Fills in whichever of minsplit/minbucket the caller left unset:
  // minsplit = 3 * minbucket, or minbucket = max(1, minsplit / 3).
  static FitParams with_sizes(std::optional<int> minsplit, std::optional<int> minbucket,
                              FitParams base);
  static FitParams with_sizes(std::optional<int> minsplit, std::optional<int> minbucket);
};

void validate(const FitParams& params);

// Numeric rule. Fitted trees always send value < threshold left; trees read
// from documents may use the opposite orientation (value >= threshold left).
struct NumericRule {
  double threshold = 0.0;
  bool left_when_less = true;

  bool goes_left(double value) const {
    return left_when_less ? value < threshold : value >= threshold;
  }
};

// Categorical rule on fuel type: codes in left_set go left. known_set holds
// every code seen at this node during training.
struct CategoricalRule {
  std::uint8_t left_set = 0;
  std::uint8_t known_set = 0;

  bool goes_left(FuelType fuel) const { return (left_set & fuel_bit(fuel)) != 0; }
  bool knows(FuelType fuel) const { return (known_set & fuel_bit(fuel)) != 0; }
};

using Rule = std::variant<NumericRule, CategoricalRule>;

struct Split {
  Feature feature = Feature::model_year;
  Rule rule;

  friend bool operator==(const Split& a, const Split& b);
};

bool operator==(const NumericRule& a, const NumericRule& b);
bool operator==(const CategoricalRule& a, const CategoricalRule& b);

struct TreeNode {
  std::size_t n = 0;
  double mean = 0.0;
  double deviance = 0.0;  // within-node sum of squared deviations
  // Scaled cost-complexity at which this split is pruned away (0 for leaves).
  double complexity = 0.0;
  std::optional<Split> split;
  std::int32_t left = -1;
  std::int32_t right = -1;

  bool is_leaf() const { return !split.has_value(); }
};

struct CpRow {
  double cp = 0.0;
  int nsplit = 0;
  double rel_error = 1.0;
  std::optional<double> xerror;
  std::optional<double> xstd;
};

using CpTable = std::vector<CpRow>;

// Immutable after fit; nodes are stored in pre-order with nodes[0] the root,
// so every child index is larger than its parent's.
struct FittedTree {
  std::vector<TreeNode> nodes;
  FitParams params;
  CpTable cp_table;
  Pollutant target_kind = Pollutant::co2;
  double root_deviance = 0.0;

  const TreeNode& root() const { return nodes.front(); }
  int split_count() const;
  int leaf_count() const;
  // Sum of leaf deviances over root deviance (1.0 when the root deviance is 0).
  double relative_error() const;
};

struct SplitCandidate {
  Split split;
  double sse_reduction = 0.0;
};

// Best split of `rows` on one feature subject to both children holding at
// least `minbucket` rows. Numeric features scan midpoints between adjacent
// distinct values; fuel type tries every two-way partition of the present
// codes. Ties go to the smaller threshold or the lexicographically smallest
// left set. None when fewer than two distinct values or no admissible split
// improves the SSE.
std::optional<SplitCandidate> best_split(std::span<const TrainingRow> rows, Feature feature,
                                         int minbucket = 1);

// Best over all features; ties go to the lower feature id.
std::optional<SplitCandidate> best_split(std::span<const TrainingRow> rows, int minbucket = 1);

FittedTree fit(const TrainingTable& table, const FitParams& params);

// Drops every split whose complexity is below cp.
FittedTree prune(const FittedTree& tree, double cp);

// Fits the full tree for its CP table, then fills xerror/xstd from
// params.xval folds. Requires 2 <= xval <= row count.
CpTable cross_validate(const TrainingTable& table, const FitParams& params);

// cp values at which each CP-table row's subtree is evaluated: +inf for the
// first row, then geometric means of adjacent CP entries.
std::vector<double> evaluation_points(const CpTable& table);

enum class UnseenCategory { go_right, go_left, fail };

struct Prediction {
  double value = 0.0;
  bool unmatched_category = false;
};

// Rule true goes left. Fuel codes a categorical node never saw in training
// follow `policy` and set unmatched_category.
Prediction predict(const FittedTree& tree, const FeatureVector& x,
                   UnseenCategory policy = UnseenCategory::go_right);

// Prediction of prune(tree, cp) without materialising the pruned tree.
Prediction predict_pruned(const FittedTree& tree, const FeatureVector& x, double cp,
                          UnseenCategory policy = UnseenCategory::go_right);

}  // namespace emx::cart
