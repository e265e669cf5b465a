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

#ifndef LINKER_AFFINITY_HEAD_HPP_
#define LINKER_AFFINITY_HEAD_HPP_

#include <utility>

#include "linker/nn.hpp"
#include "linker/tensor.hpp"

namespace linker {

// S[r, f] = sum_k P[r, f, k] w_k.
Tensor edge_strength(const Tensor& probs, const Tensor& type_weights);

struct BidirectionalAttention {
  Tensor protein_to_ligand;  // row-softmax of S, rows sum to 1
  Tensor ligand_to_protein;  // column-softmax of S, columns sum to 1
};
BidirectionalAttention bidirectional_attention(const Tensor& strength);

enum class PoolingMode {
  kRatio,    // beta = s / sum(s), all strengths non-negative
  kSoftmax,  // some strength negative
  kUniform,  // total strength is zero (degenerate)
};

struct PoolingWeights {
  Tensor weights;  // (n)
  PoolingMode mode = PoolingMode::kRatio;
};

// Normalizes per-node strengths into pooling weights. Never divides by zero.
PoolingWeights pooling_weights(const Tensor& node_strength);

struct AffinityFeatures {
  Tensor h;  // (2D + 7) laid out [pool_p | s | pool_l]
  PoolingMode protein_mode = PoolingMode::kRatio;
  PoolingMode ligand_mode = PoolingMode::kRatio;
  bool degenerate() const {
    return protein_mode == PoolingMode::kUniform || ligand_mode == PoolingMode::kUniform;
  }
};

struct AffinityHeadConfig {
  std::size_t model_dim = 64;
  std::size_t hidden1 = 256;
  std::size_t hidden2 = 64;
};

class AffinityHead {
 public:
  AffinityHead() = default;
  AffinityHead(const AffinityHeadConfig& config, Rng& rng);

  const AffinityHeadConfig& config() const { return config_; }

  // Residual context enrichment; returns (H'_p, H'_l).
  std::pair<Tensor, Tensor> contact_enrich(const Tensor& protein, const Tensor& ligand,
                                           const BidirectionalAttention& attention) const;
  AffinityFeatures fusion(const Tensor& strength, const Tensor& protein_enriched,
                          const Tensor& ligand_enriched, const Tensor& probs) const;
  Tensor predict_affinity(const Tensor& h) const;  // scalar

  struct Output {
    AffinityFeatures features;
    Tensor prediction;
  };
  Output forward(const Tensor& protein, const Tensor& ligand, const Tensor& probs) const;

  void collect(ParamList& out, const std::string& prefix) const;

  Tensor& type_weights() { return type_weights_; }
  Linear& protein_projection() { return proj_p_; }
  Linear& ligand_projection() { return proj_l_; }
  std::vector<Linear>& mlp() { return mlp_; }

 private:
  AffinityHeadConfig config_;
  Tensor type_weights_;  // (7)
  Linear proj_p_, proj_l_;
  std::vector<Linear> mlp_;  // (2D+7) -> hidden1 -> hidden2 -> 1
};

}  // namespace linker

#endif  // LINKER_AFFINITY_HEAD_HPP_
