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

#include <cmath>

#include "doctest.h"
#include "linker/checkpoint.hpp"
#include "linker/dataset.hpp"
#include "linker/fgparser.hpp"
#include "linker/hashing.hpp"
#include "linker/model.hpp"
#include "test_util.hpp"

namespace linker {
namespace {

ModelConfig tiny(std::uint64_t seed = 0) {
  ModelConfig c;
  c.model_dim = 8;
  c.heads = 2;
  c.graph_dim = 8;
  c.fg_dim = 4;
  c.pos_dim = 4;
  c.unet_base_channels = 4;
  c.unet_out_channels = 4;
  c.affinity_hidden1 = 8;
  c.affinity_hidden2 = 4;
  c.seed = seed;
  return c;
}

ComplexInput aspirin_complex() {
  ComplexInput in;
  in.id = "c1";
  in.protein = {"p1", "MKLVAGH"};
  in.ligand = featurize_ligand("CC(=O)Oc1ccccc1C(=O)O");
  return in;
}

double sum_abs_grad(const ParamList& params) {
  double s = 0.0;
  for (const auto& p : params)
    for (double g : p.tensor.grad()) s += std::abs(g);
  return s;
}

}  // namespace

TEST_CASE("model config text round trip") {
  ModelConfig c = tiny(42);
  c.protein_mode = ProteinMode::kFile;
  CHECK(ModelConfig::from_text(c.to_text()) == c);

  const ModelConfig partial = ModelConfig::from_text("[model]\ndim = 12\nheads = 3\nprotein_mode = \"file\"\n");
  CHECK(partial.model_dim == 12);
  CHECK(partial.heads == 3);
  CHECK(partial.protein_mode == ProteinMode::kFile);
  CHECK(partial.gcn_layers == ModelConfig{}.gcn_layers);
  CHECK(ModelConfig{}.affinity_hidden1 == 256);
  CHECK(ModelConfig{}.affinity_hidden2 == 64);

  CHECK_THROWS_AS(ModelConfig::from_text("[model]\ndim = 10\nheads = 4\n"), std::invalid_argument);
  CHECK_THROWS_AS(ModelConfig::from_text("[model]\nprotein_mode = esm\n"), std::invalid_argument);

  CHECK(tiny().unet().in_channels == 16);
  CHECK(tiny().finger_id().n_patterns == default_catalogue().size());
}

TEST_CASE("initialization is a function of the seed") {
  const InteractionModel a(tiny(1)), b(tiny(1)), c(tiny(2));
  CHECK(parameter_hash(a.parameters()) == parameter_hash(b.parameters()));
  CHECK(parameter_hash(a.parameters()) != parameter_hash(c.parameters()));

  const ParamList params = a.parameters();
  for (const char* prefix : {"protein.", "finger_id.", "scat.", "unet."}) {
    bool found = false;
    for (const auto& p : params) found = found || p.name.starts_with(prefix);
    CHECK_MESSAGE(found, prefix);
  }
}

TEST_CASE("interaction forward shapes") {
  const InteractionModel model(tiny());
  const ComplexInput in = aspirin_complex();
  const InteractionOutput out = model.forward(in);
  const std::size_t f = in.ligand.pooling.dim(0);
  CHECK(out.protein.shape() == Shape{7, 8});
  CHECK(out.ligand.shape() == Shape{f, 8});
  CHECK(out.probs.shape() == Shape{7, f, 7});
  for (double v : out.probs.data()) CHECK((v > 0.0 && v < 1.0));

  CHECK_THROWS_AS(model.forward(Tensor::zeros({7, 6}), in.ligand), ShapeMismatch);
}

TEST_CASE("file mode uses supplied embeddings") {
  ModelConfig cfg = tiny();
  cfg.protein_mode = ProteinMode::kFile;
  const InteractionModel model(cfg);
  for (const auto& p : model.parameters()) CHECK_FALSE(p.name.starts_with("protein."));
  ComplexInput in = aspirin_complex();
  CHECK_THROWS_AS(model.forward(in), std::invalid_argument);
  Rng rng(3);
  in.embeddings = testing::random_tensor({7, 8}, rng);
  const InteractionOutput out = model.forward(in);
  for (std::size_t i = 0; i < out.protein.numel(); ++i) CHECK(out.protein.data()[i] == in.embeddings->data()[i]);
}

TEST_CASE("affinity model trains only the head") {
  AffinityModel model(InteractionModel(tiny()), 9);
  const ComplexInput in = aspirin_complex();
  const ParamList head = model.head_parameters();
  const ParamList backbone = model.backbone().parameters();
  for (const auto& p : head) CHECK(p.name.starts_with("affinity."));
  for (auto p : head) p.tensor.zero_grad();
  for (auto p : backbone) p.tensor.zero_grad();
  {
    Tape tape;
    const AffinityOutput out = model.forward(in);
    CHECK(out.head.prediction.rank() == 0);
    backward(out.head.prediction);
  }
  CHECK(sum_abs_grad(head) > 0.0);
  CHECK(sum_abs_grad(backbone) == 0.0);
}

TEST_CASE("checkpoint round trip restores the model") {
  const InteractionModel model(tiny(5));
  const auto bytes = encode_checkpoint(model_records(model));
  const auto records = decode_checkpoint(bytes);
  const InteractionModel back = load_model(records);
  CHECK(parameter_hash(back.parameters()) == parameter_hash(model.parameters()));
  CHECK(back.config() == model.config());
  const ComplexInput in = aspirin_complex();
  const Tensor p1 = model.forward(in).probs, p2 = back.forward(in).probs;
  for (std::size_t i = 0; i < p1.numel(); ++i) CHECK(p1.data()[i] == p2.data()[i]);

  const ModelConfig other_seed = tiny(99);
  CHECK_NOTHROW(load_model(records, &other_seed));
  ModelConfig wider = tiny();
  wider.model_dim = 16;
  CHECK_THROWS_AS(load_model(records, &wider), CheckpointMismatch);

  auto tampered = records;
  for (auto& r : tampered)
    if (r.name == kCatalogueRecord) r.bytes = std::string(64, '0');
  CHECK_THROWS_AS(load_model(tampered), CheckpointMismatch);
}

}  // namespace linker
