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

#include "linker/affinity_head.hpp"

#include "linker/pairwise_unet.hpp"

namespace linker {

Tensor edge_strength(const Tensor& probs, const Tensor& type_weights) {
  if (probs.rank() != 3 || probs.dim(2) != kInteractionTypes ||
      type_weights.numel() != kInteractionTypes) {
    throw ShapeMismatch("edge_strength: probabilities " + shape_str(probs.shape()) +
                        " and weights " + shape_str(type_weights.shape()));
  }
  const std::size_t r = probs.dim(0), f = probs.dim(1);
  const Tensor flat = reshape(probs, {r * f, kInteractionTypes});
  const Tensor w = reshape(type_weights, {kInteractionTypes, 1});
  return reshape(matmul(flat, w), {r, f});
}

BidirectionalAttention bidirectional_attention(const Tensor& strength) {
  if (strength.rank() != 2) throw ShapeMismatch("bidirectional_attention: " + shape_str(strength.shape()));
  return {softmax(strength, 1), softmax(strength, 0)};
}

PoolingWeights pooling_weights(const Tensor& node_strength) {
  const std::size_t n = node_strength.numel();
  bool any_negative = false;
  double total = 0.0;
  for (double v : node_strength.data()) {
    any_negative = any_negative || v < 0.0;
    total += v;
  }
  if (any_negative) return {softmax(node_strength, 0), PoolingMode::kSoftmax};
  if (total == 0.0) {
    return {Tensor::full({n}, 1.0 / static_cast<double>(n)), PoolingMode::kUniform};
  }
  return {div(node_strength, sum(node_strength)), PoolingMode::kRatio};
}

AffinityHead::AffinityHead(const AffinityHeadConfig& config, Rng& rng)
    : config_(config),
      type_weights_(Tensor::full({kInteractionTypes}, 1.0, true)),
      proj_p_(config.model_dim, config.model_dim, rng),
      proj_l_(config.model_dim, config.model_dim, rng) {
  mlp_.emplace_back(2 * config.model_dim + kInteractionTypes, config.hidden1, rng);
  mlp_.emplace_back(config.hidden1, config.hidden2, rng);
  mlp_.emplace_back(config.hidden2, 1, rng);
}

std::pair<Tensor, Tensor> AffinityHead::contact_enrich(
    const Tensor& protein, const Tensor& ligand,
    const BidirectionalAttention& attention) const {
  const Tensor& a_pl = attention.protein_to_ligand;
  const Tensor& a_lp = attention.ligand_to_protein;
  if (a_pl.rank() != 2 || a_pl.dim(0) != protein.dim(0) || a_pl.dim(1) != ligand.dim(0) ||
      protein.dim(1) != ligand.dim(1)) {
    throw ShapeMismatch("contact_enrich: protein " + shape_str(protein.shape()) +
                        ", ligand " + shape_str(ligand.shape()) + ", attention " +
                        shape_str(a_pl.shape()));
  }
  const Tensor context_p = matmul(a_pl, ligand);              // c^l_r, (R, D)
  const Tensor context_l = matmul(transpose(a_lp), protein);  // c^p_f, (F, D)
  return {add(protein, proj_p_.forward(context_p)), add(ligand, proj_l_.forward(context_l))};
}

AffinityFeatures AffinityHead::fusion(const Tensor& strength, const Tensor& protein_enriched,
                                      const Tensor& ligand_enriched, const Tensor& probs) const {
  const std::size_t r = strength.dim(0), f = strength.dim(1);
  const PoolingWeights beta_p = pooling_weights(sum(strength, 1));
  const PoolingWeights beta_l = pooling_weights(sum(strength, 0));
  const Tensor pool_p = matmul(reshape(beta_p.weights, {1, r}), protein_enriched);
  const Tensor pool_l = matmul(reshape(beta_l.weights, {1, f}), ligand_enriched);
  // s_k = (sum_{r,f} P[r,f,k]) w_k
  const Tensor type_totals = sum(reshape(probs, {r * f, kInteractionTypes}), 0);
  const Tensor s = reshape(mul(type_totals, type_weights_), {1, kInteractionTypes});
  AffinityFeatures out;
  out.h = reshape(concat({pool_p, s, pool_l}, 1), {2 * protein_enriched.dim(1) + kInteractionTypes});
  out.protein_mode = beta_p.mode;
  out.ligand_mode = beta_l.mode;
  return out;
}

Tensor AffinityHead::predict_affinity(const Tensor& h) const {
  const std::size_t width = 2 * config_.model_dim + kInteractionTypes;
  if (h.numel() != width) {
    throw ShapeMismatch("predict_affinity: expected width " + std::to_string(width) +
                        ", got " + shape_str(h.shape()));
  }
  Tensor x = reshape(h, {1, width});
  for (std::size_t i = 0; i < mlp_.size(); ++i) {
    x = mlp_[i].forward(x);
    if (i + 1 < mlp_.size()) x = relu(x);
  }
  return reshape(x, {});
}

AffinityHead::Output AffinityHead::forward(const Tensor& protein, const Tensor& ligand,
                                           const Tensor& probs) const {
  const Tensor s = edge_strength(probs, type_weights_);
  const auto [hp, hl] = contact_enrich(protein, ligand, bidirectional_attention(s));
  Output out;
  out.features = fusion(s, hp, hl, probs);
  out.prediction = predict_affinity(out.features.h);
  return out;
}

void AffinityHead::collect(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".type_weights", type_weights_});
  proj_p_.collect(out, prefix + ".proj_protein");
  proj_l_.collect(out, prefix + ".proj_ligand");
  for (std::size_t i = 0; i < mlp_.size(); ++i) mlp_[i].collect(out, prefix + ".mlp" + std::to_string(i));
}

}  // namespace linker
