/*
 * Copyright 2026 The Linker Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "doctest.h"
#include "linker/metrics.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace linker {
namespace {

double ap_oracle(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  std::size_t total = 0;
  for (auto v : y) total += v;
  double ap = 0.0;
  std::size_t last = 0;
  for (double t : thresholds) {
    std::size_t tp = 0, called = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] >= t) {
        ++called;
        tp += y[i];
      }
    ap += static_cast<double>(tp - last) / static_cast<double>(total) *
          (static_cast<double>(tp) / static_cast<double>(called));
    last = tp;
  }
  return ap;
}

double auc_oracle(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  std::uint64_t score = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] && !y[j]) {
        pairs += 2;
        score += s[i] > s[j] ? 2 : s[i] == s[j] ? 1 : 0;
      }
  return static_cast<double>(score) / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("curve fixtures") {
  const std::vector<double> s{0.9, 0.8, 0.3};
  const std::vector<std::uint8_t> y{1, 0, 1};
  const PrCurve pr = pr_curve(s, y);
  CHECK(pr.ap == doctest::Approx(0.5 + 0.5 * 2.0 / 3.0).epsilon(1e-15));
  CHECK(std::abs(pr.ap - 0.8333) <= 1e-4);
  REQUIRE(pr.points.size() == 3);
  CHECK(pr.points[0].threshold == 0.9);
  CHECK(pr.points[0].precision == 1.0);
  CHECK(pr.points[0].recall == 0.5);
  CHECK(pr.points.back().recall == 1.0);
  CHECK(pr.points.back().precision == doctest::Approx(2.0 / 3.0));

  const RocCurve roc = roc_curve(s, y);
  CHECK(roc.auc == 0.5);
  CHECK(std::isinf(roc.points.front().threshold));
  CHECK(roc.points.front().fpr == 0.0);
  CHECK(roc.points.front().tpr == 0.0);
  CHECK(roc.points.back().fpr == 1.0);
  CHECK(roc.points.back().tpr == 1.0);

  CHECK(pr_curve({0.9, 0.8, 0.1}, {1, 1, 0}).ap == 1.0);
  CHECK(roc_curve({0.9, 0.8, 0.1}, {1, 1, 0}).auc == 1.0);
  CHECK(roc_curve(s, {0, 1, 0}).auc == 0.5);

  // a tie across classes is one threshold
  const PrCurve tied = pr_curve({0.5, 0.5, 0.1}, {1, 0, 1});
  CHECK(tied.points.size() == 2);
  CHECK(tied.ap == doctest::Approx(0.5 * 0.5 + 0.5 * 2.0 / 3.0).epsilon(1e-15));
  CHECK(roc_curve({0.5, 0.5}, {1, 0}).auc == 0.5);

  CHECK_THROWS_AS(pr_curve({0.1, 0.2}, {0, 0}), NoPositives);
  CHECK_THROWS_AS(roc_curve({0.1, 0.2}, {1, 1}), DegenerateLabels);
  CHECK_THROWS_AS(roc_curve({0.1, 0.2}, {0, 0}), DegenerateLabels);
}

TEST_CASE("sweep agrees with brute-force enumeration") {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 63;
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    const unsigned levels = 1 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % levels) / 7.0;
      y[i] = rng() % 3 == 0;
    }
    y[rng() % n] = 1;
    const PrCurve pr = pr_curve(s, y);
    CHECK(pr.ap == ap_oracle(s, y));
    CHECK(pr.points.back().recall == 1.0);
    CHECK(pr.points.back().precision == doctest::Approx(prevalence(y)).epsilon(1e-15));
    bool has_negative = false;
    for (auto v : y) has_negative = has_negative || v == 0;
    if (!has_negative) continue;
    const RocCurve roc = roc_curve(s, y);
    CHECK(roc.auc == auc_oracle(s, y));

    std::vector<std::uint8_t> flipped(n);
    bool has_positive_flip = false;
    for (std::size_t i = 0; i < n; ++i) {
      flipped[i] = !y[i];
      has_positive_flip = has_positive_flip || flipped[i];
    }
    if (has_positive_flip) CHECK(roc_curve(s, flipped).auc == doctest::Approx(1.0 - roc.auc).epsilon(1e-15));

    std::vector<double> warped(n);
    for (std::size_t i = 0; i < n; ++i) warped[i] = std::exp(3.0 * s[i]) - 11.0;
    CHECK(pr_curve(warped, y).ap == pr.ap);
    CHECK(roc_curve(warped, y).auc == roc.auc);
  }
}

TEST_CASE("random scores give AP near prevalence") {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 200000;
  std::vector<double> s(n);
  std::vector<std::uint8_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = u(rng);
    y[i] = u(rng) < 0.0243;
  }
  CHECK(std::abs(pr_curve(s, y).ap - prevalence(y)) < 0.005);
  CHECK(std::abs(roc_curve(s, y).auc - 0.5) < 0.02);
}

TEST_CASE("weighted precision, prevalence and enrichment") {
  CHECK(weighted_precision({1, 1, 0}, {1.0, 0.5, 0.9}) == 0.75);
  CHECK(weighted_precision({1, 0, 1}, {1.0, 0.2, 1.0}) == 1.0);
  CHECK_THROWS_AS(weighted_precision({0, 0}, {1.0, 1.0}), NoPredictions);

  CHECK(prevalence({1, 0, 0, 0}) == 0.25);
  CHECK(enrichment(0.5, 0.25) == 2.0);
  CHECK(enrichment(0.1067, 0.000613) == doctest::Approx(174.0).epsilon(0.001));
  CHECK_THROWS_AS(enrichment(0.5, 0.0), NoPositives);

  const PrCurve pr = pr_curve({0.9, 0.8, 0.3, 0.2}, {1, 0, 1, 0});
  CHECK(enrichment_at_recall(pr, 0.5, 0.5) == 2.0);
  CHECK(enrichment_at_recall(pr, 0.5, 1.0) == doctest::Approx((2.0 / 3.0) / 0.5));
}

TEST_CASE("rmse") {
  CHECK(rmse({1.0, 2.0}, {1.0, 2.0}) == 0.0);
  CHECK(rmse({0.0, 0.0}, {1.0, 1.0}) == 1.0);
  Rng rng(3);
  std::vector<double> a(17), b(17);
  double acc = 0.0;
  for (std::size_t i = 0; i < 17; ++i) {
    a[i] = static_cast<double>(rng() % 100) / 9.0;
    b[i] = static_cast<double>(rng() % 100) / 13.0;
    acc += (a[i] - b[i]) * (a[i] - b[i]);
  }
  CHECK(rmse(a, b) == doctest::Approx(std::sqrt(acc / 17)).epsilon(1e-15));
  CHECK_THROWS_AS(rmse({1.0}, {1.0, 2.0}), LengthMismatch);
  CHECK_THROWS_AS(rmse({}, {}), LengthMismatch);
}

TEST_CASE("report JSON and curve CSV") {
  EvalReport rep;
  rep.level = "residue";
  rep.n = 3;
  rep.ap = 0.8333;
  rep.roc_auc = 0.5;
  rep.prevalence = 2.0 / 3.0;
  rep.enrichment_at_recall = {{0.5, 1.5}};
  rep.weighted_precision_at = {{0.5, 0.75}, {0.99, std::nullopt}};
  const auto j = nlohmann::json::parse(rep.to_json());
  CHECK(j["level"] == "residue");
  CHECK(j["n"] == 3);
  CHECK(j["precision_axis_hint"] == "log");
  CHECK(j["weighted_precision_at"][0]["value"] == 0.75);
  CHECK(j["weighted_precision_at"][1]["value"].is_null());
  CHECK(j["enrichment_at_recall"][0]["enrichment"] == 1.5);

  const PrCurve pr = pr_curve({0.9, 0.8, 0.3}, {1, 0, 1});
  const std::string csv = pr_curve_csv(pr);
  CHECK(csv.rfind("threshold,precision,recall\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const std::string roc = roc_curve_csv(roc_curve({0.9, 0.8, 0.3}, {1, 0, 1}));
  CHECK(roc.rfind("threshold,fpr,tpr\n", 0) == 0);
}

}  // namespace linker
