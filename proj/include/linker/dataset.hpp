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

#ifndef LINKER_DATASET_HPP_
#define LINKER_DATASET_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "linker/labels.hpp"
#include "linker/model.hpp"

namespace linker {

// Bad or inconsistent input data; the message names the complex.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One JSON-lines manifest entry. Relative paths resolve against the
// manifest's directory.
//   {"id", "protein_id", "ligand_id"?, "fasta", "embeddings"?, "smiles",
//    "labels"?, "affinity"?, "split"? ("train" | "val")}
struct ManifestRecord {
  std::string id;
  std::string protein_id;
  std::string ligand_id;
  std::string fasta;
  std::string embeddings;
  std::string smiles;
  std::string labels;
  std::optional<double> affinity;
  std::string split = "train";
};

std::vector<ManifestRecord> load_manifest(const std::string& path);

struct Sample {
  ComplexInput input;
  std::optional<LabelSet> labels;
  std::optional<double> affinity;
  std::string split;
};

// Groups for a SMILES string, read from / written to `cache_dir` when it is
// non-empty (keyed by SHA-256 of SMILES and catalogue hash).
LigandGroups featurize_groups(const MolecularGraph& graph, const std::string& smiles,
                              const std::string& cache_dir);
LigandInput featurize_ligand(const std::string& smiles, const std::string& cache_dir = "");

// Value of LINKER_CACHE, or empty.
std::string cache_dir_from_env();

Sample load_sample(const ManifestRecord& record, const ModelConfig& config,
                   bool require_labels, const std::string& cache_dir = "");

// Parallel over records with `jobs` workers; order follows the manifest.
std::vector<Sample> load_samples(const std::vector<ManifestRecord>& records,
                                 const ModelConfig& config, bool require_labels,
                                 std::size_t jobs = 1, const std::string& cache_dir = "");

}  // namespace linker

#endif  // LINKER_DATASET_HPP_
