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

#ifndef LINKER_TESTS_SYNTHETIC_HPP_
#define LINKER_TESTS_SYNTHETIC_HPP_

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "linker/dataset.hpp"
#include "linker/fgparser.hpp"
#include "linker/hashing.hpp"
#include "linker/labels.hpp"

namespace linker::testing {

inline const std::vector<std::string>& synthetic_ligands() {
  static const std::vector<std::string> smiles{
      "CC(=O)Oc1ccccc1C(=O)O", "Oc1ccccc1C(=O)N", "CC(=O)NCCO",      "c1ccncc1CC(=O)O",
      "OCC(=O)O",              "CCOC(=O)CN",      "Nc1ccc(Cl)cc1",   "CC(C)CC(=O)O",
      "OC(=O)CCC(=O)N",        "c1ccccc1O",       "CN(C)C(=O)c1ccccc1", "OCCOCCO"};
  return smiles;
}

struct SyntheticDataset {
  std::filesystem::path dir;
  std::string manifest;
  std::string labels;
};

inline ModelConfig tiny_model_config(std::uint64_t seed = 0) {
  ModelConfig c;
  c.model_dim = 8;
  c.heads = 2;
  c.graph_dim = 8;
  c.fg_dim = 4;
  c.pos_dim = 4;
  c.unet_base_channels = 4;
  c.unet_out_channels = 4;
  c.affinity_hidden1 = 16;
  c.affinity_hidden2 = 8;
  c.seed = seed;
  return c;
}

// n complexes with planted interaction triples and affinities; the last
// `n_val` entries are marked as validation.
inline SyntheticDataset write_synthetic_dataset(const std::filesystem::path& dir, std::size_t n,
                                                std::uint64_t seed, std::size_t n_val = 0) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::mt19937_64 rng(seed);
  const std::string alphabet = "ACDEFGHIKLMNPQRSTVWY";
  const std::string hash = catalogue_hash(default_catalogue());
  SyntheticDataset ds{dir, (dir / "manifest.jsonl").string(), (dir / "labels.jsonl").string()};
  std::ofstream manifest(ds.manifest), labels(ds.labels);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "cx" + std::to_string(i);
    const std::size_t r = 6 + rng() % 5;
    std::string seq;
    for (std::size_t k = 0; k < r; ++k) seq.push_back(alphabet[rng() % alphabet.size()]);
    std::ofstream(dir / (id + ".fasta")) << ">" << id << "\n" << seq << "\n";
    const std::string& smiles = synthetic_ligands()[i % synthetic_ligands().size()];
    const std::size_t f = featurize_ligand(smiles).matrix.n_groups;
    std::string triples = "[";
    for (std::size_t t = 0; t < 3; ++t) {
      if (t) triples += ",";
      triples += "[" + std::to_string(rng() % r) + "," + std::to_string(rng() % f) + "," +
                 std::to_string(rng() % 7) + "]";
    }
    triples += "]";
    labels << R"({"protein_id":")" << id << R"(","ligand_id":")" << id << R"(","R":)" << r
           << R"(,"F":)" << f << R"(,"catalogue_hash":")" << hash << R"(","triples":)"
           << triples << "}\n";
    const double affinity = 4.0 + 0.35 * static_cast<double>(f) + 0.1 * static_cast<double>(r) +
                            0.01 * static_cast<double>(i);
    manifest << R"({"id":")" << id << R"(","fasta":")" << id << R"(.fasta","smiles":")" << smiles
             << R"(","labels":"labels.jsonl","affinity":)" << affinity << R"(,"split":")"
             << (i + n_val >= n ? "val" : "train") << "\"}\n";
  }
  return ds;
}

}  // namespace linker::testing

#endif  // LINKER_TESTS_SYNTHETIC_HPP_
