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

#include "linker/finger_id.hpp"

#include <cmath>

namespace linker {

Tensor normalized_adjacency(const MolecularGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 1.0;
  for (const Bond& b : graph.bonds) {
    a[b.a * n + b.b] = 1.0;
    a[b.b * n + b.a] = 1.0;
  }
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) d += a[i * n + j];
    inv_sqrt_deg[i] = 1.0 / std::sqrt(d);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] *= inv_sqrt_deg[i] * inv_sqrt_deg[j];
  return Tensor({n, n}, std::move(a));
}

Tensor group_pooling_matrix(const AtomGroupMatrix& m) {
  std::vector<double> p(m.n_groups * m.n_atoms, 0.0);
  for (std::size_t g = 0; g < m.n_groups; ++g) {
    double count = 0.0;
    for (std::size_t a = 0; a < m.n_atoms; ++a) count += m.at(a, g);
    if (count == 0.0) {
      throw EmptyGroup("functional group " + std::to_string(g) + " has no atoms");
    }
    for (std::size_t a = 0; a < m.n_atoms; ++a)
      if (m.at(a, g)) p[g * m.n_atoms + a] = 1.0 / count;
  }
  return Tensor({m.n_groups, m.n_atoms}, std::move(p));
}

Tensor sinusoidal_positions(std::size_t count, std::size_t width) {
  std::vector<double> v(count * width, 0.0);
  for (std::size_t pos = 0; pos < count; ++pos) {
    for (std::size_t i = 0; i < width; ++i) {
      const double pair = static_cast<double>(i / 2 * 2);
      const double freq = std::pow(10000.0, -pair / static_cast<double>(width));
      const double angle = static_cast<double>(pos) * freq;
      v[pos * width + i] = i % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return Tensor({count, width}, std::move(v));
}

LigandInput make_ligand_input(const MolecularGraph& graph, const LigandGroups& groups) {
  LigandInput in;
  in.graph = graph;
  in.features = atom_features(graph);
  in.adjacency = normalized_adjacency(graph);
  in.pooling = group_pooling_matrix(groups.matrix);
  for (const auto& g : groups.groups) in.pattern_ids.push_back(g.pattern_id);
  in.matrix = groups.matrix;
  return in;
}

Tensor group_pool(const Tensor& atom_embeddings, const AtomGroupMatrix& matrix) {
  return matmul(group_pooling_matrix(matrix), atom_embeddings);
}

Tensor global_readout(const Tensor& atom_embeddings) {
  return reshape(mean(atom_embeddings, 0), {1, atom_embeddings.dim(1)});
}

FingerId::FingerId(const FingerIdConfig& config, Rng& rng) : config_(config) {
  std::size_t in = kAtomFeatureWidth;
  for (std::size_t l = 0; l < config.gcn_layers; ++l) {
    gcn_.emplace_back(in, config.graph_dim, rng);
    in = config.graph_dim;
  }
  type_table_ = uniform_param({config.n_patterns + 1, config.fg_dim}, 0.5, rng);
  projection_ = Linear(config.concat_dim(), config.model_dim, rng);
}

Tensor FingerId::gcn_forward(const Tensor& adjacency, const Tensor& features) const {
  Tensor z = features;
  for (const Linear& layer : gcn_) z = relu(layer.forward(matmul(adjacency, z)));
  return z;
}

std::size_t FingerId::table_row(int pattern_id) const {
  if (pattern_id == kFallbackPattern) return config_.n_patterns;
  if (pattern_id < 0 || static_cast<std::size_t>(pattern_id) >= config_.n_patterns) {
    throw ShapeMismatch("FingerId: pattern id " + std::to_string(pattern_id) +
                        " outside the type table");
  }
  return static_cast<std::size_t>(pattern_id);
}

Tensor FingerId::assemble_features(const Tensor& group_embeddings,
                                   const std::vector<int>& pattern_ids,
                                   const Tensor& global_embedding) const {
  const std::size_t f = group_embeddings.dim(0);
  if (pattern_ids.size() != f || f == 0) {
    throw ShapeMismatch("FingerId: " + std::to_string(pattern_ids.size()) +
                        " pattern ids for " + std::to_string(f) + " groups");
  }
  std::vector<std::size_t> rows;
  for (int id : pattern_ids) rows.push_back(table_row(id));
  const Tensor type_rows = gather_rows(type_table_, rows);
  const Tensor positions = sinusoidal_positions(f, config_.pos_dim);
  const Tensor global = broadcast_to(global_embedding, {f, global_embedding.dim(1)});
  return concat({group_embeddings, type_rows, positions, global}, 1);
}

Tensor FingerId::project(const Tensor& assembled) const {
  if (assembled.rank() != 2 || assembled.dim(1) != config_.concat_dim()) {
    throw ShapeMismatch("FingerId::project: expected width " +
                        std::to_string(config_.concat_dim()) + ", got " +
                        shape_str(assembled.shape()));
  }
  return projection_.forward(assembled);
}

Tensor FingerId::forward(const LigandInput& ligand) const {
  const Tensor z = gcn_forward(ligand.adjacency, ligand.features);
  const Tensor inter = matmul(ligand.pooling, z);
  return project(assemble_features(inter, ligand.pattern_ids, global_readout(z)));
}

void FingerId::collect(ParamList& out, const std::string& prefix) const {
  for (std::size_t l = 0; l < gcn_.size(); ++l)
    gcn_[l].collect(out, prefix + ".gcn" + std::to_string(l));
  out.push_back({prefix + ".type_table", type_table_});
  projection_.collect(out, prefix + ".projection");
}

}  // namespace linker
