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

#ifndef LINKER_METRICS_HPP_
#define LINKER_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "linker/losses.hpp"

namespace linker {

class NoPositives : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateLabels : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NoPredictions : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // thresholds descending
  double ap = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // starts at (inf, 0, 0)
  double auc = 0.0;
};

// Samples with equal scores change class together at a single threshold.
PrCurve pr_curve(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);
RocCurve roc_curve(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

// sum(pred * y) / sum(pred).
double weighted_precision(const std::vector<std::uint8_t>& preds, const std::vector<double>& y);

double prevalence(const std::vector<std::uint8_t>& labels);
double enrichment(double precision, double prevalence_value);
// Enrichment at the first curve point whose recall reaches `recall`.
double enrichment_at_recall(const PrCurve& curve, double prevalence_value, double recall);

double rmse(const std::vector<double>& preds, const std::vector<double>& truths);

struct EvalReport {
  std::string level;
  std::size_t n = 0;
  double ap = 0.0;
  double roc_auc = 0.0;
  double prevalence = 0.0;
  std::vector<std::pair<double, double>> enrichment_at_recall;
  // nullopt when no prediction clears the threshold.
  std::vector<std::pair<double, std::optional<double>>> weighted_precision_at;
  std::optional<double> rmse;

  std::string to_json() const;
};

std::string pr_curve_csv(const PrCurve& curve);
std::string roc_curve_csv(const RocCurve& curve);

}  // namespace linker

#endif  // LINKER_METRICS_HPP_
