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

#ifndef LINKER_MODEL_HPP_
#define LINKER_MODEL_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "linker/affinity_head.hpp"
#include "linker/checkpoint.hpp"
#include "linker/finger_id.hpp"
#include "linker/nn.hpp"
#include "linker/pairwise_unet.hpp"
#include "linker/protein_embed.hpp"
#include "linker/scat.hpp"

namespace linker {

class CheckpointMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ProteinMode { kFallback, kFile };

struct ModelConfig {
  std::size_t model_dim = kDefaultFallbackEmbeddingDim;
  std::size_t heads = 4;
  ProteinMode protein_mode = ProteinMode::kFallback;
  std::size_t gcn_layers = 2;
  std::size_t graph_dim = 64;
  std::size_t fg_dim = 16;
  std::size_t pos_dim = 16;
  std::size_t unet_base_channels = 16;
  std::size_t unet_out_channels = 16;
  std::size_t affinity_hidden1 = 256;
  std::size_t affinity_hidden2 = 64;
  std::uint64_t seed = 0;

  FingerIdConfig finger_id() const;
  UNetConfig unet() const;
  AffinityHeadConfig affinity() const;

  // [model] section of a key-value config tree.
  static ModelConfig from_tree(const boost::property_tree::ptree& tree);
  void to_tree(boost::property_tree::ptree& tree) const;
  std::string to_text() const;
  static ModelConfig from_text(const std::string& text);
  bool operator==(const ModelConfig&) const = default;
};

struct ComplexInput {
  std::string id;
  ProteinSequence protein;
  std::optional<Tensor> embeddings;  // (R, D) file-backed, else fallback
  LigandInput ligand;
};

struct InteractionOutput {
  Tensor protein;  // H_p (R, D) before SCAT
  Tensor ligand;   // H_l (F, D)
  Tensor probs;    // P (R, F, 7)
};

class InteractionModel {
 public:
  InteractionModel() = default;
  explicit InteractionModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  Tensor protein_embeddings(const ComplexInput& input) const;
  InteractionOutput forward(const Tensor& protein, const LigandInput& ligand) const;
  InteractionOutput forward(const ComplexInput& input) const;

  ParamList parameters() const;

  FallbackEmbedder& embedder() { return embedder_; }
  FingerId& finger_id() { return finger_id_; }
  Scat& scat() { return scat_; }
  PairwiseUNet& unet() { return unet_; }

 private:
  ModelConfig config_;
  FallbackEmbedder embedder_;
  FingerId finger_id_;
  Scat scat_;
  PairwiseUNet unet_;
};

struct AffinityOutput {
  InteractionOutput interaction;
  AffinityHead::Output head;
};

// Backbone runs without gradient recording; only the head is trainable.
class AffinityModel {
 public:
  AffinityModel() = default;
  AffinityModel(InteractionModel backbone, std::uint64_t seed);

  AffinityOutput forward(const ComplexInput& input) const;

  const InteractionModel& backbone() const { return backbone_; }
  InteractionModel& backbone() { return backbone_; }
  AffinityHead& head() { return head_; }
  ParamList head_parameters() const;

 private:
  InteractionModel backbone_;
  AffinityHead head_;
};

inline constexpr const char* kConfigRecord = "model_config";
inline constexpr const char* kCatalogueRecord = "catalogue_hash";

// SHA-256 over parameter names, shapes and values in declaration order.
std::string parameter_hash(const ParamList& params);

std::vector<CheckpointRecord> model_records(const InteractionModel& model);
// Rebuilds a model from its own checkpoint. Throws CheckpointMismatch if the
// stored catalogue differs from the compiled one, or if `expected` is given
// and the stored dimensions differ from it.
InteractionModel load_model(const std::vector<CheckpointRecord>& records,
                            const ModelConfig* expected = nullptr);

}  // namespace linker

#endif  // LINKER_MODEL_HPP_
