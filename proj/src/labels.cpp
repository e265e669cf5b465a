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

#include "linker/labels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "linker/pairwise_unet.hpp"

namespace linker {

std::uint8_t LabelSet::at(std::size_t r, std::size_t f, std::size_t k) const {
  if (r >= residues || f >= groups || k >= kInteractionTypes) {
    throw IndexOutOfRange("LabelSet::at out of range");
  }
  return values[(r * groups + f) * kInteractionTypes + k];
}

Tensor LabelSet::as_tensor() const {
  return Tensor({residues, groups, kInteractionTypes},
                std::vector<double>(values.begin(), values.end()));
}

LabelSet parse_label_record(const std::string& line, const std::string& expected_hash) {
  const auto j = nlohmann::json::parse(line);
  LabelSet ls;
  ls.protein_id = j.at("protein_id").get<std::string>();
  ls.ligand_id = j.at("ligand_id").get<std::string>();
  ls.residues = j.at("R").get<std::size_t>();
  ls.groups = j.at("F").get<std::size_t>();
  ls.catalogue_hash = j.at("catalogue_hash").get<std::string>();
  if (!expected_hash.empty() && ls.catalogue_hash != expected_hash) {
    throw CatalogueMismatch("labels for " + ls.protein_id + "/" + ls.ligand_id +
                            " use catalogue " + ls.catalogue_hash + ", expected " +
                            expected_hash);
  }
  ls.values.assign(ls.residues * ls.groups * kInteractionTypes, 0);
  for (const auto& t : j.at("triples")) {
    if (!t.is_array() || t.size() != 3) throw IndexOutOfRange("label triple must have 3 entries");
    const long r = t[0].get<long>(), f = t[1].get<long>(), k = t[2].get<long>();
    if (r < 0 || f < 0 || k < 0 || static_cast<std::size_t>(r) >= ls.residues ||
        static_cast<std::size_t>(f) >= ls.groups ||
        static_cast<std::size_t>(k) >= kInteractionTypes) {
      throw IndexOutOfRange("label triple [" + std::to_string(r) + "," + std::to_string(f) +
                            "," + std::to_string(k) + "] outside R=" +
                            std::to_string(ls.residues) + ", F=" + std::to_string(ls.groups) +
                            ", K=7");
    }
    ls.values[(static_cast<std::size_t>(r) * ls.groups + static_cast<std::size_t>(f)) *
                  kInteractionTypes +
              static_cast<std::size_t>(k)] = 1;
  }
  return ls;
}

std::vector<LabelSet> load_labels(const std::string& path, const std::string& expected_hash) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<LabelSet> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_label_record(line, expected_hash));
  }
  return out;
}

std::string label_record_json(const LabelSet& labels) {
  nlohmann::ordered_json j;
  j["protein_id"] = labels.protein_id;
  j["ligand_id"] = labels.ligand_id;
  j["R"] = labels.residues;
  j["F"] = labels.groups;
  j["catalogue_hash"] = labels.catalogue_hash;
  j["triples"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < labels.residues; ++r)
    for (std::size_t f = 0; f < labels.groups; ++f)
      for (std::size_t k = 0; k < kInteractionTypes; ++k)
        if (labels.at(r, f, k)) j["triples"].push_back({r, f, k});
  return j.dump();
}

std::vector<std::uint8_t> residue_hard(const LabelSet& labels) {
  std::vector<std::uint8_t> out(labels.residues, 0);
  const std::size_t row = labels.groups * kInteractionTypes;
  for (std::size_t r = 0; r < labels.residues; ++r) {
    const auto begin = labels.values.begin() + static_cast<long>(r * row);
    out[r] = std::any_of(begin, begin + static_cast<long>(row), [](std::uint8_t v) { return v != 0; });
  }
  return out;
}

std::vector<double> smooth(const std::vector<std::uint8_t>& hard, double sigma) {
  if (!(sigma > 0.0)) throw InvalidSigma("smoothing sigma must be > 0");
  std::vector<std::size_t> anchors;
  for (std::size_t i = 0; i < hard.size(); ++i)
    if (hard[i]) anchors.push_back(i);
  std::vector<double> out(hard.size(), 0.0);
  const double denom = 2.0 * sigma * sigma;
  for (std::size_t i = 0; i < hard.size(); ++i) {
    double best = 0.0;
    for (std::size_t c : anchors) {
      const double d = static_cast<double>(i) - static_cast<double>(c);
      best = std::max(best, std::exp(-(d * d) / denom));
    }
    out[i] = best;
  }
  return out;
}

std::vector<double> residue_scores(const Tensor& probs) {
  if (probs.rank() != 3 || probs.dim(2) != kInteractionTypes || probs.dim(1) == 0) {
    throw ShapeMismatch("residue_scores: expected (R, F, 7), got " + shape_str(probs.shape()));
  }
  NoGradGuard no_grad;
  const Tensor per_type = max(probs, 1);  // U[r, k]
  const Tensor per_residue = max(per_type, 1);
  return {per_residue.data().begin(), per_residue.data().end()};
}

}  // namespace linker
