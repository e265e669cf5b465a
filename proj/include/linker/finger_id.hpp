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

#ifndef LINKER_FINGER_ID_HPP_
#define LINKER_FINGER_ID_HPP_

#include <vector>

#include "linker/fgparser.hpp"
#include "linker/molgraph.hpp"
#include "linker/nn.hpp"
#include "linker/tensor.hpp"

namespace linker {

struct FingerIdConfig {
  std::size_t gcn_layers = 2;
  std::size_t graph_dim = 64;  // D_graph
  std::size_t fg_dim = 16;     // d_FG
  std::size_t pos_dim = 16;    // d_pos
  std::size_t model_dim = 64;  // D, must match the protein side
  std::size_t n_patterns = 0;  // catalogue size; table has one extra FALLBACK row

  std::size_t concat_dim() const { return 2 * graph_dim + fg_dim + pos_dim; }
};

class EmptyGroup : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Everything FINGER-ID needs about one ligand, precomputed once.
struct LigandInput {
  MolecularGraph graph;
  Tensor features;       // (N, 5)
  Tensor adjacency;      // (N, N) symmetric-normalized with self-loops
  Tensor pooling;        // (F, N) row g averages the atoms of group g
  std::vector<int> pattern_ids;  // per group, kFallbackPattern allowed
  AtomGroupMatrix matrix;
};

// D^{-1/2} (A + I) D^{-1/2}.
Tensor normalized_adjacency(const MolecularGraph& graph);
// (F, N) averaging operator built from M; throws EmptyGroup on empty columns.
Tensor group_pooling_matrix(const AtomGroupMatrix& matrix);
// Fixed sinusoidal encoding of group indices 0..count-1.
Tensor sinusoidal_positions(std::size_t count, std::size_t width);

LigandInput make_ligand_input(const MolecularGraph& graph, const LigandGroups& groups);

Tensor group_pool(const Tensor& atom_embeddings, const AtomGroupMatrix& matrix);
Tensor global_readout(const Tensor& atom_embeddings);  // mean over atoms, (1, D_graph)

class FingerId {
 public:
  FingerId() = default;
  FingerId(const FingerIdConfig& config, Rng& rng);

  const FingerIdConfig& config() const { return config_; }

  // Z' = relu(Â Z W + b) per layer.
  Tensor gcn_forward(const Tensor& adjacency, const Tensor& features) const;
  // H = [z_inter | e_FG | e_pos | z_global], before projection. (F, D_concat)
  Tensor assemble_features(const Tensor& group_embeddings,
                           const std::vector<int>& pattern_ids,
                           const Tensor& global_embedding) const;
  Tensor project(const Tensor& assembled) const;

  // H_l, (F, D).
  Tensor forward(const LigandInput& ligand) const;

  void collect(ParamList& out, const std::string& prefix) const;

  std::vector<Linear>& gcn_layers() { return gcn_; }
  Tensor& type_table() { return type_table_; }
  Linear& projection() { return projection_; }

 private:
  std::size_t table_row(int pattern_id) const;

  FingerIdConfig config_;
  std::vector<Linear> gcn_;
  Tensor type_table_;  // (n_patterns + 1, d_FG)
  Linear projection_;
};

}  // namespace linker

#endif  // LINKER_FINGER_ID_HPP_
