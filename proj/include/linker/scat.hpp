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

#ifndef LINKER_SCAT_HPP_
#define LINKER_SCAT_HPP_

#include <optional>
#include <vector>

#include "linker/nn.hpp"
#include "linker/tensor.hpp"

namespace linker {

// Pre-norm transformer encoder layer. With `cross` set, keys and values come
// from a second sequence that gets its own layer norm.
class AttentionBlock {
 public:
  AttentionBlock() = default;
  AttentionBlock(std::size_t width, std::size_t heads, bool cross, Rng& rng);

  std::size_t width() const { return width_; }
  std::size_t heads() const { return heads_; }

  // `key_mask`, when given, has one entry per key row; false keys receive no
  // attention. `weights` receives one (Lq, Lkv) matrix per head.
  Tensor forward(const Tensor& queries, const Tensor& keys_values,
                 const std::vector<bool>* key_mask = nullptr,
                 std::vector<Tensor>* weights = nullptr) const;
  Tensor self_attend(const Tensor& x, const std::vector<bool>* key_mask = nullptr,
                     std::vector<Tensor>* weights = nullptr) const;

  void collect(ParamList& out, const std::string& prefix) const;

  Linear& query() { return query_; }
  Linear& key() { return key_; }
  Linear& value() { return value_; }
  Linear& output() { return output_; }
  Linear& ff_in() { return ff_in_; }
  Linear& ff_out() { return ff_out_; }

 private:
  std::size_t width_ = 0;
  std::size_t heads_ = 1;
  bool cross_ = false;
  LayerNorm norm_q_;
  LayerNorm norm_kv_;
  LayerNorm norm_ff_;
  Linear query_, key_, value_, output_;
  Linear ff_in_, ff_out_;  // D -> 4D -> D
};

struct ScatOutput {
  Tensor protein;  // H''_p (R, D)
  Tensor ligand;   // H''_l (F, D)
};

// Self-attention per modality, then cross-attention in both directions, each
// direction reading the self-attended outputs.
class Scat {
 public:
  Scat() = default;
  Scat(std::size_t width, std::size_t heads, Rng& rng);

  ScatOutput forward(const Tensor& protein, const Tensor& ligand) const;
  void collect(ParamList& out, const std::string& prefix) const;

  AttentionBlock& protein_self() { return sa_p_; }
  AttentionBlock& ligand_self() { return sa_l_; }
  AttentionBlock& protein_from_ligand() { return ca_pl_; }
  AttentionBlock& ligand_from_protein() { return ca_lp_; }

 private:
  AttentionBlock sa_p_, sa_l_, ca_pl_, ca_lp_;
};

}  // namespace linker

#endif  // LINKER_SCAT_HPP_
