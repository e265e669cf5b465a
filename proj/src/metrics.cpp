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

#include "linker/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace linker {
namespace {

struct Group {
  double threshold;
  std::uint64_t pos;
  std::uint64_t neg;
};

std::vector<Group> tie_groups(const std::vector<double>& scores,
                              const std::vector<std::uint8_t>& labels) {
  if (scores.size() != labels.size()) {
    throw LengthMismatch("metric: " + std::to_string(scores.size()) + " scores, " +
                         std::to_string(labels.size()) + " labels");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<Group> out;
  for (std::size_t idx : order) {
    if (out.empty() || scores[idx] != out.back().threshold) out.push_back({scores[idx], 0, 0});
    (labels[idx] ? out.back().pos : out.back().neg) += 1;
  }
  return out;
}

std::uint64_t count_positive(const std::vector<std::uint8_t>& labels) {
  return static_cast<std::uint64_t>(
      std::count_if(labels.begin(), labels.end(), [](std::uint8_t v) { return v != 0; }));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

PrCurve pr_curve(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  const auto groups = tie_groups(scores, labels);
  const std::uint64_t total_pos = count_positive(labels);
  if (total_pos == 0) throw NoPositives("precision-recall needs at least one positive");
  PrCurve curve;
  std::uint64_t tp = 0, fp = 0;
  for (const auto& g : groups) {
    tp += g.pos;
    fp += g.neg;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    curve.ap += static_cast<double>(g.pos) / static_cast<double>(total_pos) * precision;
    curve.points.push_back({g.threshold, precision, recall});
  }
  return curve;
}

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  const auto groups = tie_groups(scores, labels);
  const std::uint64_t total_pos = count_positive(labels);
  const std::uint64_t total_neg = labels.size() - total_pos;
  if (total_pos == 0 || total_neg == 0) {
    throw DegenerateLabels("ROC needs at least one positive and one negative");
  }
  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::uint64_t tp = 0, fp = 0;
  // Twice the trapezoid area in units of (1 / P) x (1 / N).
  std::uint64_t area2 = 0;
  for (const auto& g : groups) {
    area2 += g.neg * (2 * tp + g.pos);
    tp += g.pos;
    fp += g.neg;
    curve.points.push_back({g.threshold, static_cast<double>(fp) / static_cast<double>(total_neg),
                            static_cast<double>(tp) / static_cast<double>(total_pos)});
  }
  curve.auc = static_cast<double>(area2) /
              (2.0 * static_cast<double>(total_pos) * static_cast<double>(total_neg));
  return curve;
}

double weighted_precision(const std::vector<std::uint8_t>& preds, const std::vector<double>& y) {
  if (preds.size() != y.size()) {
    throw LengthMismatch("weighted_precision: " + std::to_string(preds.size()) +
                         " predictions, " + std::to_string(y.size()) + " labels");
  }
  double num = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!preds[i]) continue;
    num += y[i];
    ++count;
  }
  if (count == 0) throw NoPredictions("weighted precision undefined without predictions");
  return num / static_cast<double>(count);
}

double prevalence(const std::vector<std::uint8_t>& labels) {
  if (labels.empty()) throw NoPositives("prevalence of an empty label set");
  return static_cast<double>(count_positive(labels)) / static_cast<double>(labels.size());
}

double enrichment(double precision, double prevalence_value) {
  if (!(prevalence_value > 0.0)) throw NoPositives("enrichment undefined at zero prevalence");
  return precision / prevalence_value;
}

double enrichment_at_recall(const PrCurve& curve, double prevalence_value, double recall) {
  for (const auto& p : curve.points) {
    if (p.recall >= recall) return enrichment(p.precision, prevalence_value);
  }
  return enrichment(curve.points.empty() ? 0.0 : curve.points.back().precision, prevalence_value);
}

double rmse(const std::vector<double>& preds, const std::vector<double>& truths) {
  if (preds.size() != truths.size() || preds.empty()) {
    throw LengthMismatch("rmse: lengths " + std::to_string(preds.size()) + " and " +
                         std::to_string(truths.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - truths[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(preds.size()));
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["level"] = level;
  j["n"] = n;
  j["ap"] = ap;
  j["roc_auc"] = roc_auc;
  j["prevalence"] = prevalence;
  j["enrichment_at_recall"] = nlohmann::ordered_json::array();
  for (const auto& [r, e] : enrichment_at_recall) {
    j["enrichment_at_recall"].push_back({{"recall", r}, {"enrichment", e}});
  }
  j["weighted_precision_at"] = nlohmann::ordered_json::array();
  for (const auto& [t, v] : weighted_precision_at) {
    nlohmann::ordered_json e{{"threshold", t}};
    e["value"] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    j["weighted_precision_at"].push_back(e);
  }
  j["rmse"] = rmse ? nlohmann::ordered_json(*rmse) : nlohmann::ordered_json(nullptr);
  j["precision_axis_hint"] = "log";
  return j.dump(2);
}

std::string pr_curve_csv(const PrCurve& curve) {
  std::string out = "threshold,precision,recall\n";
  for (const auto& p : curve.points) {
    out += fmt(p.threshold) + "," + fmt(p.precision) + "," + fmt(p.recall) + "\n";
  }
  return out;
}

std::string roc_curve_csv(const RocCurve& curve) {
  std::string out = "threshold,fpr,tpr\n";
  for (const auto& p : curve.points) {
    out += fmt(p.threshold) + "," + fmt(p.fpr) + "," + fmt(p.tpr) + "\n";
  }
  return out;
}

}  // namespace linker
