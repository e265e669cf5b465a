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

#ifndef LINKER_LABELS_HPP_
#define LINKER_LABELS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "linker/tensor.hpp"

namespace linker {

class IndexOutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Label file and FGParser build disagree on the group index semantics.
class CatalogueMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSigma : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense binary ground truth Y (R x F x 7).
struct LabelSet {
  std::string protein_id;
  std::string ligand_id;
  std::size_t residues = 0;
  std::size_t groups = 0;
  std::string catalogue_hash;
  std::vector<std::uint8_t> values;

  std::uint8_t at(std::size_t r, std::size_t f, std::size_t k) const;
  Tensor as_tensor() const;
};

// One JSON-lines record:
// {"protein_id","ligand_id","R","F","catalogue_hash","triples":[[r,f,k],...]}
// Duplicate triples collapse. An empty `expected_hash` skips the check.
LabelSet parse_label_record(const std::string& line, const std::string& expected_hash);
std::vector<LabelSet> load_labels(const std::string& path, const std::string& expected_hash);
std::string label_record_json(const LabelSet& labels);

std::vector<std::uint8_t> residue_hard(const LabelSet& labels);

// y[i] = max over anchors c of exp(-(i - c)^2 / (2 sigma^2)); zero without
// anchors. Evaluated exactly over every anchor.
std::vector<double> smooth(const std::vector<std::uint8_t>& hard, double sigma);

// y[r] = max_k max_f P[r, f, k].
std::vector<double> residue_scores(const Tensor& probs);

}  // namespace linker

#endif  // LINKER_LABELS_HPP_
