#include <cmath>
#include <limits>
#include <map>

#include "doctest.h"
#include "emx/cart.hpp"
#include "support.hpp"

using namespace emx;
using namespace emx::cart;
using emx::testing::params;

namespace {

TrainingRow row(int year, double cc, FuelType fuel, double target) {
  TrainingRow r;
  r.x = FeatureVector{year, cc, fuel};
  r.target = target;
  return r;
}

TrainingTable table_of(std::vector<TrainingRow> rows) {
  TrainingTable t;
  t.rows = std::move(rows);
  return t;
}

// Targets of the training rows reaching each node, by walking the rules.
void collect(const FittedTree& tree, std::size_t node, const std::vector<TrainingRow>& rows,
             std::map<std::size_t, std::vector<double>>& out) {
  for (const auto& r : rows) out[node].push_back(r.target);
  const auto& n = tree.nodes[node];
  if (n.is_leaf()) return;
  std::vector<TrainingRow> left, right;
  for (const auto& r : rows) {
    const bool goes_left = std::visit(
        [&](const auto& rule) {
          if constexpr (std::is_same_v<std::decay_t<decltype(rule)>, NumericRule>) {
            return rule.goes_left(r.x.numeric(n.split->feature));
          } else {
            return rule.goes_left(r.x.fuel_type);
          }
        },
        n.split->rule);
    (goes_left ? left : right).push_back(r);
  }
  collect(tree, static_cast<std::size_t>(n.left), left, out);
  collect(tree, static_cast<std::size_t>(n.right), right, out);
}

}  // namespace

TEST_CASE("constant target gives a single leaf") {
  std::vector<TrainingRow> rows;
  for (int i = 0; i < 100; ++i) rows.push_back(row(2000 + i % 7, 1000 + i, FuelType::PET, 42.0));
  const auto tree = fit(table_of(rows), params(1e-4, 2, 1, 5));
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.root().mean == 42.0);
  CHECK(tree.root().deviance == 0.0);
  REQUIRE(tree.cp_table.size() == 1);
  CHECK(tree.cp_table[0].nsplit == 0);
  CHECK(tree.cp_table[0].rel_error == 1.0);
  CHECK(*tree.cp_table[0].xerror == 1.0);
}

TEST_CASE("step in model year is recovered exactly") {
  std::vector<TrainingRow> rows;
  for (int i = 0; i < 200; ++i) {
    const int year = 2000 + i % 20;
    rows.push_back(row(year, 1400, FuelType::DIE, year < 2010 ? 10.0 : 20.0));
  }
  const auto tree = fit(table_of(rows), params(1e-4, 20, 10));
  REQUIRE(tree.split_count() == 1);
  const auto& split = *tree.root().split;
  CHECK(split.feature == Feature::model_year);
  CHECK(std::get<NumericRule>(split.rule).threshold == 2009.5);
  CHECK(tree.nodes[static_cast<std::size_t>(tree.root().left)].mean == 10.0);
  CHECK(tree.nodes[static_cast<std::size_t>(tree.root().right)].mean == 20.0);
}

TEST_CASE("best_split on engine size") {
  std::vector<TrainingRow> rows = {row(2010, 100, FuelType::PET, 1), row(2010, 200, FuelType::PET, 1),
                                   row(2010, 300, FuelType::PET, 9), row(2010, 400, FuelType::PET, 9)};
  const auto s = best_split(rows, Feature::engine_cc);
  REQUIRE(s);
  CHECK(std::get<NumericRule>(s->split.rule).threshold == 250.0);
  CHECK(s->sse_reduction == doctest::Approx(64.0));
  CHECK_FALSE(best_split(rows, Feature::model_year));
  CHECK_FALSE(best_split(rows, Feature::fuel_type));
}

TEST_CASE("fuel split follows the mean ordering") {
  std::vector<TrainingRow> rows;
  for (int i = 0; i < 10; ++i) {
    rows.push_back(row(2010, 1000, FuelType::DIE, 30 + (i % 2)));
    rows.push_back(row(2010, 1000, FuelType::PET, 10 + (i % 2)));
    rows.push_back(row(2010, 1000, FuelType::LPG, 20 + (i % 2)));
  }
  const auto s = best_split(rows, Feature::fuel_type);
  REQUIRE(s);
  const auto& rule = std::get<CategoricalRule>(s->split.rule);
  // Ordering PET < LPG < DIE; best cut separates DIE. Canonical side holds DIE.
  CHECK(rule.left_set == fuel_bit(FuelType::DIE));
  CHECK(rule.known_set == (fuel_bit(FuelType::DIE) | fuel_bit(FuelType::PET) | fuel_bit(FuelType::LPG)));
  const auto oracle = emx::testing::brute_force_split(rows, 1);
  REQUIRE(oracle);
  CHECK(oracle->left_set == rule.left_set);
}

TEST_CASE("tied category means resolve to the smallest left set") {
  // DIE and CNG share a mean; {DIE} and {DIE, CNG} vs rest tie with PET/LPG layout.
  std::vector<TrainingRow> rows;
  for (int i = 0; i < 4; ++i) {
    rows.push_back(row(2010, 1000, FuelType::DIE, 0));
    rows.push_back(row(2010, 1000, FuelType::CNG, 0));
    rows.push_back(row(2010, 1000, FuelType::PET, 5));
    rows.push_back(row(2010, 1000, FuelType::LPG, 5));
  }
  const auto s = best_split(rows, Feature::fuel_type);
  const auto oracle = emx::testing::brute_force_split(rows, 1);
  REQUIRE(s);
  REQUIRE(oracle);
  CHECK(std::get<CategoricalRule>(s->split.rule).left_set == oracle->left_set);
}

TEST_CASE("minbucket can force a partition that is not a mean-order prefix") {
  // Means order the codes PET < DIE < LPG < CNG; every prefix cut leaves one
  // side under four rows, but {PET, CNG} vs {DIE, LPG} is admissible.
  std::vector<TrainingRow> rows = {
      row(2000, 1000, FuelType::PET, 0.85), row(2000, 1000, FuelType::PET, 2.30),
      row(2000, 1000, FuelType::DIE, 13.06), row(2000, 1000, FuelType::DIE, 12.23),
      row(2000, 1000, FuelType::DIE, 5.30), row(2000, 1000, FuelType::CNG, 22.57),
      row(2000, 1000, FuelType::CNG, 21.31), row(2000, 1000, FuelType::LPG, 18.02)};
  const auto s = best_split(rows, Feature::fuel_type, 4);
  const auto oracle = emx::testing::brute_force_split(rows, 4);
  REQUIRE(s);
  REQUIRE(oracle);
  CHECK(std::get<CategoricalRule>(s->split.rule).left_set == oracle->left_set);
  CHECK(s->sse_reduction == doctest::Approx(oracle->gain));
}

TEST_CASE("single fuel code cannot split") {
  std::vector<TrainingRow> rows = {row(2010, 1000, FuelType::HYB, 1), row(2011, 1000, FuelType::HYB, 2)};
  CHECK_FALSE(best_split(rows, Feature::fuel_type));
}

TEST_CASE("minbucket restricts thresholds") {
  std::vector<TrainingRow> rows;
  for (int i = 0; i < 10; ++i) rows.push_back(row(2000 + i, 1000, FuelType::PET, i == 0 ? 100 : 0));
  const auto free_split = best_split(rows, Feature::model_year, 1);
  REQUIRE(free_split);
  CHECK(std::get<NumericRule>(free_split->split.rule).threshold == 2000.5);
  const auto held = best_split(rows, Feature::model_year, 3);
  REQUIRE(held);
  CHECK(std::get<NumericRule>(held->split.rule).threshold == 2002.5);
  CHECK_FALSE(best_split(rows, Feature::model_year, 6));
}

TEST_CASE("cp gate forces a leaf") {
  // Best split explains 0.0005 of the root deviance.
  std::vector<TrainingRow> rows;
  const double delta = std::sqrt(0.0005 * 200.0 / (50.0 * (1.0 - 0.0005)));
  for (int i = 0; i < 200; ++i) {
    const int year = i < 100 ? 2000 : 2001;
    rows.push_back(row(year, 1000, FuelType::PET, (i % 2 ? 1.0 : -1.0) + (year == 2001 ? delta : 0.0)));
  }
  const auto gated = fit(table_of(rows), params(0.001, 2, 1));
  CHECK(gated.split_count() == 0);
  const auto kept = fit(table_of(rows), params(1e-4, 2, 1));
  CHECK(kept.split_count() == 1);
  CHECK(kept.root().complexity == doctest::Approx(0.0005).epsilon(1e-9));
}

TEST_CASE("minsplit and minbucket derivation") {
  auto p = FitParams::with_sizes(std::nullopt, 10);
  CHECK(p.minsplit == 30);
  CHECK(p.minbucket == 10);
  p = FitParams::with_sizes(25, std::nullopt);
  CHECK(p.minbucket == 8);
  p = FitParams::with_sizes(2, std::nullopt);
  CHECK(p.minbucket == 1);
  p = FitParams::with_sizes(std::nullopt, std::nullopt);
  CHECK(p.minsplit == 25);
  CHECK(p.minbucket == 100);
  p = FitParams::with_sizes(40, 7);
  CHECK(p.minsplit == 40);
  CHECK(p.minbucket == 7);
}

TEST_CASE("parameter and table validation") {
  CHECK_THROWS_AS(validate(params(-1, 2, 1)), Error);
  CHECK_THROWS_AS(validate(params(0, 0, 1)), Error);
  CHECK_THROWS_AS(validate(params(0, 2, 0)), Error);
  CHECK_THROWS_AS(validate(params(0, 2, 1, -1)), Error);
  CHECK_THROWS_AS(validate(params(0, 2, 1, 0, 0)), Error);
  CHECK_THROWS_AS(fit(TrainingTable{}, params(0, 2, 1)), Error);
  CHECK_THROWS_AS(validate(FeatureVector{2010, 0.0, FuelType::PET}), Error);
  CHECK_THROWS_AS(validate(FeatureVector{1800, 1000.0, FuelType::PET}), Error);
  auto bad = table_of({row(2010, 1000, FuelType::PET, std::numeric_limits<double>::infinity())});
  CHECK_THROWS_AS(fit(bad, params(0, 2, 1)), Error);
  const auto t = table_of({row(2010, 1000, FuelType::PET, 1), row(2011, 1000, FuelType::PET, 2)});
  CHECK_THROWS_AS(cross_validate(t, params(0, 2, 1, 3)), Error);
  CHECK_THROWS_AS(fit(t, params(0, 2, 1, 1)), Error);
}

TEST_CASE("root split matches the brute-force oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    const auto n = 2 + rng.below(300);
    const auto table = emx::testing::random_table(rng, n);
    const int minbucket = 1 + static_cast<int>(rng.below(12));
    const auto oracle = emx::testing::brute_force_split(table.rows, minbucket);
    const auto tree = fit(table, params(0.0, 2 * minbucket, minbucket));
    CAPTURE(trial);
    if (!oracle) {
      CHECK(tree.root().is_leaf());
      continue;
    }
    REQUIRE_FALSE(tree.root().is_leaf());
    const auto& split = *tree.root().split;
    CHECK(split.feature == oracle->feature);
    if (oracle->feature == Feature::fuel_type) {
      CHECK(std::get<CategoricalRule>(split.rule).left_set == oracle->left_set);
    } else {
      CHECK(std::get<NumericRule>(split.rule).threshold == oracle->threshold);
    }
  }
}

TEST_CASE("fitted trees satisfy node invariants") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const auto table = emx::testing::random_table(rng, 50 + rng.below(400));
    const int minbucket = 1 + static_cast<int>(rng.below(10));
    const int minsplit = minbucket + static_cast<int>(rng.below(20));
    const int depth = 1 + static_cast<int>(rng.below(8));
    const auto tree = fit(table, params(rng.uniform() * 0.01, minsplit, minbucket, 0, depth));
    std::map<std::size_t, std::vector<double>> targets;
    collect(tree, 0, table.rows, targets);
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const auto& node = tree.nodes[i];
      const auto& values = targets[i];
      REQUIRE(values.size() == node.n);
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      CHECK(node.mean == doctest::Approx(mean).epsilon(1e-9).scale(1.0));
      CHECK(node.deviance == doctest::Approx(emx::testing::naive_sse(values)).epsilon(1e-9).scale(1.0));
      CHECK(node.n >= static_cast<std::size_t>(minbucket));
      if (!node.is_leaf()) {
        CHECK(node.n >= static_cast<std::size_t>(minsplit));
        CHECK(node.left > static_cast<std::int32_t>(i));
        CHECK(node.right > node.left);
      }
    }
    int max_depth = 0;
    std::vector<std::pair<std::size_t, int>> stack = {{0, 0}};
    while (!stack.empty()) {
      const auto [i, d] = stack.back();
      stack.pop_back();
      max_depth = std::max(max_depth, d);
      if (!tree.nodes[i].is_leaf()) {
        stack.push_back({static_cast<std::size_t>(tree.nodes[i].left), d + 1});
        stack.push_back({static_cast<std::size_t>(tree.nodes[i].right), d + 1});
      }
    }
    CHECK(max_depth <= depth);
  }
}

TEST_CASE("CP table invariants and nested pruning") {
  Rng rng(31337);
  for (int trial = 0; trial < 40; ++trial) {
    const auto table = emx::testing::random_table(rng, 100 + rng.below(400));
    const auto tree = fit(table, params(0.0, 4, 2, 4, 30, trial));
    const auto& cp = tree.cp_table;
    REQUIRE_FALSE(cp.empty());
    CHECK(cp[0].nsplit == 0);
    CHECK(cp[0].rel_error == 1.0);
    CHECK(cp.back().nsplit == tree.split_count());
    const auto points = evaluation_points(cp);
    REQUIRE(points.size() == cp.size());
    FittedTree previous = prune(tree, points[0]);
    CHECK(previous.split_count() == 0);
    for (std::size_t k = 1; k < cp.size(); ++k) {
      CHECK(cp[k].nsplit > cp[k - 1].nsplit);
      CHECK(cp[k].rel_error <= cp[k - 1].rel_error);
      CHECK(cp[k].cp < cp[k - 1].cp);
      const auto pruned = prune(tree, points[k]);
      CHECK(pruned.split_count() == cp[k].nsplit);
      CHECK(pruned.relative_error() == doctest::Approx(cp[k].rel_error));
      CHECK(emx::testing::is_rooted_subtree(previous, pruned));
      previous = pruned;
    }
    CHECK(prune(tree, 0.0).nodes.size() == tree.nodes.size());
    CHECK(prune(tree, std::numeric_limits<double>::infinity()).nodes.size() == 1);
  }
}

TEST_CASE("predict_pruned agrees with the materialised pruned tree") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto table = emx::testing::random_table(rng, 300);
    const auto tree = fit(table, params(0.0, 4, 2));
    for (double cp : evaluation_points(tree.cp_table)) {
      const auto pruned = prune(tree, cp);
      for (std::size_t i = 0; i < 30; ++i) {
        const auto& x = table.rows[i].x;
        CHECK(predict_pruned(tree, x, cp).value == predict(pruned, x).value);
      }
    }
  }
}

TEST_CASE("cross-validation") {
  SUBCASE("noiseless piecewise data reaches near-zero xerror") {
    std::vector<TrainingRow> rows;
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
      const int year = 2000 + static_cast<int>(rng.below(16));
      const double cc = 1000.0 + 100.0 * static_cast<double>(rng.below(20));
      const FuelType fuel = rng.uniform() < 0.5 ? FuelType::DIE : FuelType::PET;
      const double y = (year < 2008 ? 150 : 120) + (cc >= 2000 ? 40 : 0) + (fuel == FuelType::DIE ? -10 : 0);
      rows.push_back(row(year, cc, fuel, y));
    }
    const auto tree = fit(table_of(rows), params(1e-4, 20, 7, 10));
    REQUIRE(tree.cp_table.back().xerror);
    CHECK(*tree.cp_table.back().xerror < 0.01);
    CHECK(*tree.cp_table.front().xerror == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("deterministic for a seed") {
    Rng rng(11);
    const auto table = emx::testing::random_table(rng, 300);
    const auto a = cross_validate(table, params(0.0, 4, 2, 5, 30, 9));
    const auto b = cross_validate(table, params(0.0, 4, 2, 5, 30, 9));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(*a[i].xerror == *b[i].xerror);
      CHECK(*a[i].xstd == *b[i].xstd);
    }
  }
}

TEST_CASE("unseen fuel codes follow the configured policy") {
  std::vector<TrainingRow> rows;
  for (int i = 0; i < 20; ++i) {
    rows.push_back(row(2010, 1000, FuelType::DIE, 10));
    rows.push_back(row(2010, 1000, FuelType::PET, 20));
  }
  const auto tree = fit(table_of(rows), params(0.0, 2, 1));
  REQUIRE(tree.split_count() == 1);
  const FeatureVector seen{2010, 1000, FuelType::DIE};
  const FeatureVector unseen{2010, 1000, FuelType::LPG};
  CHECK_FALSE(predict(tree, seen).unmatched_category);
  const auto right = predict(tree, unseen);
  CHECK(right.unmatched_category);
  CHECK(right.value == 20.0);
  CHECK(predict(tree, unseen, UnseenCategory::go_left).value == 10.0);
  CHECK_THROWS_AS(predict(tree, unseen, UnseenCategory::fail), Error);
}

TEST_CASE("relative error lies in (0, 1] for pruned noisy trees") {
  Rng rng(8);
  const auto table = emx::testing::random_table(rng, 400);
  const auto tree = fit(table, params(0.0, 4, 2));
  for (double cp : evaluation_points(tree.cp_table)) {
    const double rel = prune(tree, cp).relative_error();
    CHECK(rel >= 0.0);
    CHECK(rel <= 1.0);
  }
}
