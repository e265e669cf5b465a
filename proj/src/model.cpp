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

#include "linker/model.hpp"

#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "binary_io.hpp"
#include "linker/hashing.hpp"

namespace linker {
namespace pt = boost::property_tree;

FingerIdConfig ModelConfig::finger_id() const {
  FingerIdConfig c;
  c.gcn_layers = gcn_layers;
  c.graph_dim = graph_dim;
  c.fg_dim = fg_dim;
  c.pos_dim = pos_dim;
  c.model_dim = model_dim;
  c.n_patterns = default_catalogue().size();
  return c;
}

UNetConfig ModelConfig::unet() const {
  return UNetConfig{2 * model_dim, unet_base_channels, unet_out_channels};
}

AffinityHeadConfig ModelConfig::affinity() const {
  return AffinityHeadConfig{model_dim, affinity_hidden1, affinity_hidden2};
}

ModelConfig ModelConfig::from_tree(const pt::ptree& tree) {
  ModelConfig c;
  const auto get = [&](const char* key, std::size_t def) {
    return tree.get<std::size_t>(std::string("model.") + key, def);
  };
  c.model_dim = get("dim", c.model_dim);
  c.heads = get("heads", c.heads);
  c.gcn_layers = get("gcn_layers", c.gcn_layers);
  c.graph_dim = get("graph_dim", c.graph_dim);
  c.fg_dim = get("fg_dim", c.fg_dim);
  c.pos_dim = get("pos_dim", c.pos_dim);
  c.unet_base_channels = get("unet_base_channels", c.unet_base_channels);
  c.unet_out_channels = get("unet_out_channels", c.unet_out_channels);
  c.affinity_hidden1 = get("affinity_hidden1", c.affinity_hidden1);
  c.affinity_hidden2 = get("affinity_hidden2", c.affinity_hidden2);
  c.seed = tree.get<std::uint64_t>("model.seed", c.seed);
  std::string mode = tree.get<std::string>("model.protein_mode", "fallback");
  if (mode.size() >= 2 && mode.front() == '"' && mode.back() == '"') {
    mode = mode.substr(1, mode.size() - 2);
  }
  if (mode == "fallback") {
    c.protein_mode = ProteinMode::kFallback;
  } else if (mode == "file") {
    c.protein_mode = ProteinMode::kFile;
  } else {
    throw std::invalid_argument("model.protein_mode must be fallback or file, got " + mode);
  }
  if (c.model_dim == 0 || c.heads == 0 || c.model_dim % c.heads != 0) {
    throw std::invalid_argument("model.dim must be a positive multiple of model.heads");
  }
  return c;
}

void ModelConfig::to_tree(pt::ptree& tree) const {
  tree.put("model.dim", model_dim);
  tree.put("model.heads", heads);
  tree.put("model.protein_mode", protein_mode == ProteinMode::kFile ? "file" : "fallback");
  tree.put("model.gcn_layers", gcn_layers);
  tree.put("model.graph_dim", graph_dim);
  tree.put("model.fg_dim", fg_dim);
  tree.put("model.pos_dim", pos_dim);
  tree.put("model.unet_base_channels", unet_base_channels);
  tree.put("model.unet_out_channels", unet_out_channels);
  tree.put("model.affinity_hidden1", affinity_hidden1);
  tree.put("model.affinity_hidden2", affinity_hidden2);
  tree.put("model.seed", seed);
}

std::string ModelConfig::to_text() const {
  pt::ptree tree;
  to_tree(tree);
  std::ostringstream os;
  pt::write_ini(os, tree);
  return os.str();
}

ModelConfig ModelConfig::from_text(const std::string& text) {
  std::istringstream is(text);
  pt::ptree tree;
  pt::read_ini(is, tree);
  return from_tree(tree);
}

InteractionModel::InteractionModel(const ModelConfig& config) : config_(config) {
  Rng rng(config.seed);
  if (config.protein_mode == ProteinMode::kFallback) {
    embedder_ = FallbackEmbedder(config.model_dim, rng);
  }
  finger_id_ = FingerId(config.finger_id(), rng);
  scat_ = Scat(config.model_dim, config.heads, rng);
  unet_ = PairwiseUNet(config.unet(), rng);
}

Tensor InteractionModel::protein_embeddings(const ComplexInput& input) const {
  if (input.embeddings) return *input.embeddings;
  if (config_.protein_mode == ProteinMode::kFile) {
    throw std::invalid_argument("complex " + input.id +
                                ": file-mode model needs residue embeddings");
  }
  return embedder_.embed(input.protein).matrix;
}

InteractionOutput InteractionModel::forward(const Tensor& protein,
                                            const LigandInput& ligand) const {
  if (protein.rank() != 2 || protein.dim(1) != config_.model_dim) {
    throw ShapeMismatch("protein embeddings " + shape_str(protein.shape()) +
                        " do not match model dim " + std::to_string(config_.model_dim));
  }
  InteractionOutput out;
  out.protein = protein;
  out.ligand = finger_id_.forward(ligand);
  const ScatOutput mixed = scat_.forward(out.protein, out.ligand);
  out.probs = unet_.forward(build_pairwise(mixed.protein, mixed.ligand));
  return out;
}

InteractionOutput InteractionModel::forward(const ComplexInput& input) const {
  return forward(protein_embeddings(input), input.ligand);
}

ParamList InteractionModel::parameters() const {
  ParamList out;
  if (config_.protein_mode == ProteinMode::kFallback) embedder_.collect(out, "protein");
  finger_id_.collect(out, "finger_id");
  scat_.collect(out, "scat");
  unet_.collect(out, "unet");
  return out;
}

AffinityModel::AffinityModel(InteractionModel backbone, std::uint64_t seed)
    : backbone_(std::move(backbone)) {
  Rng rng(seed);
  head_ = AffinityHead(backbone_.config().affinity(), rng);
}

AffinityOutput AffinityModel::forward(const ComplexInput& input) const {
  AffinityOutput out;
  {
    NoGradGuard frozen;
    out.interaction = backbone_.forward(input);
  }
  out.head = head_.forward(out.interaction.protein, out.interaction.ligand,
                           out.interaction.probs);
  return out;
}

ParamList AffinityModel::head_parameters() const {
  ParamList out;
  head_.collect(out, "affinity");
  return out;
}

std::string parameter_hash(const ParamList& params) {
  std::string buf;
  for (const auto& p : params) {
    binio::put_u32(buf, static_cast<std::uint32_t>(p.name.size()));
    buf += p.name;
    binio::put_u32(buf, static_cast<std::uint32_t>(p.tensor.rank()));
    for (auto d : p.tensor.shape()) binio::put_u64(buf, d);
    for (double v : p.tensor.data()) binio::put_f64(buf, v);
  }
  return sha256_hex(buf);
}

std::vector<CheckpointRecord> model_records(const InteractionModel& model) {
  std::vector<CheckpointRecord> out;
  out.push_back(text_record(kConfigRecord, model.config().to_text()));
  out.push_back(text_record(kCatalogueRecord, catalogue_hash(default_catalogue())));
  for (const auto& p : model.parameters()) out.push_back(tensor_record(p.name, p.tensor));
  return out;
}

InteractionModel load_model(const std::vector<CheckpointRecord>& records,
                            const ModelConfig* expected) {
  const auto* cfg = find_record(records, kConfigRecord);
  if (!cfg) throw FormatError("checkpoint has no model_config record");
  const ModelConfig stored = ModelConfig::from_text(cfg->bytes);
  if (expected) {
    ModelConfig a = stored, b = *expected;
    a.seed = b.seed = 0;
    if (!(a == b)) {
      throw CheckpointMismatch("checkpoint dimensions differ from the configured model:\n" +
                               stored.to_text() + "vs\n" + expected->to_text());
    }
  }
  const auto* cat = find_record(records, kCatalogueRecord);
  const std::string current = catalogue_hash(default_catalogue());
  if (!cat || cat->bytes != current) {
    throw CheckpointMismatch("checkpoint catalogue " + (cat ? cat->bytes : std::string("?")) +
                             " differs from " + current);
  }
  InteractionModel model(stored);
  load_parameters(records, model.parameters());
  return model;
}

}  // namespace linker
