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

#include "linker/pairwise_unet.hpp"

namespace linker {

Tensor build_pairwise(const Tensor& protein, const Tensor& ligand) {
  if (protein.rank() != 2 || ligand.rank() != 2 || protein.dim(1) != ligand.dim(1)) {
    throw ShapeMismatch("build_pairwise: protein " + shape_str(protein.shape()) +
                        " and ligand " + shape_str(ligand.shape()));
  }
  const std::size_t r = protein.dim(0), f = ligand.dim(0), d = protein.dim(1);
  const Tensor ep = broadcast_to(reshape(protein, {r, 1, d}), {r, f, d});
  const Tensor el = broadcast_to(reshape(ligand, {1, f, d}), {r, f, d});
  return concat({ep, el}, 2);
}

PairwiseUNet::PairwiseUNet(const UNetConfig& config, Rng& rng)
    : config_(config),
      enc0_(config.in_channels, config.base_channels, 3, rng),
      enc1_(config.base_channels, 2 * config.base_channels, 3, rng),
      bottleneck_(2 * config.base_channels, 4 * config.base_channels, 3, rng),
      dec1_(4 * config.base_channels + 2 * config.base_channels, 2 * config.base_channels, 3, rng),
      dec0_(2 * config.base_channels + config.base_channels, config.base_channels, 3, rng),
      out_(config.base_channels, config.out_channels, 3, rng),
      head0_(config.out_channels, config.out_channels, 1, rng),
      head1_(config.out_channels, kInteractionTypes, 1, rng) {}

Tensor PairwiseUNet::run_grid(const Tensor& grid) const {
  const Tensor s0 = relu(enc0_.forward(grid));
  const Tensor s1 = relu(enc1_.forward(max_pool2d(s0)));
  const Tensor b = relu(bottleneck_.forward(max_pool2d(s1)));
  const Tensor d1 = relu(dec1_.forward(concat({up_sample2d(b), s1}, 0)));
  const Tensor d0 = relu(dec0_.forward(concat({up_sample2d(d1), s0}, 0)));
  return relu(out_.forward(d0));
}

Tensor PairwiseUNet::unet_forward(const Tensor& pairwise) const {
  if (pairwise.rank() != 3 || pairwise.dim(2) != config_.in_channels) {
    throw ShapeMismatch("PairwiseUNet: expected (R, F, " +
                        std::to_string(config_.in_channels) + "), got " +
                        shape_str(pairwise.shape()));
  }
  const std::size_t r = pairwise.dim(0), f = pairwise.dim(1);
  const auto round_up = [](std::size_t n) {
    return (n + kGridMultiple - 1) / kGridMultiple * kGridMultiple;
  };
  Tensor grid = permute(pairwise, {2, 0, 1});
  const std::size_t rp = round_up(r), fp = round_up(f);
  if (rp != r || fp != f) grid = pad2d(grid, rp - r, fp - f);
  Tensor u = run_grid(grid);
  if (rp != r) u = slice(u, 1, 0, r);
  if (fp != f) u = slice(u, 2, 0, f);
  return permute(u, {1, 2, 0});
}

Tensor PairwiseUNet::type_logits(const Tensor& features) const {
  if (features.rank() != 3 || features.dim(2) != config_.out_channels) {
    throw ShapeMismatch("PairwiseUNet head: got " + shape_str(features.shape()));
  }
  const Tensor grid = permute(features, {2, 0, 1});
  const Tensor logits = head1_.forward(relu(head0_.forward(grid)));
  return permute(logits, {1, 2, 0});
}

Tensor PairwiseUNet::predict_types(const Tensor& features) const {
  return sigmoid(type_logits(features));
}

void PairwiseUNet::collect(ParamList& out, const std::string& prefix) const {
  enc0_.collect(out, prefix + ".enc0");
  enc1_.collect(out, prefix + ".enc1");
  bottleneck_.collect(out, prefix + ".bottleneck");
  dec1_.collect(out, prefix + ".dec1");
  dec0_.collect(out, prefix + ".dec0");
  out_.collect(out, prefix + ".out");
  head0_.collect(out, prefix + ".head0");
  head1_.collect(out, prefix + ".head1");
}

ParamList PairwiseUNet::parameters() const {
  ParamList out;
  collect(out, "unet");
  return out;
}

}  // namespace linker
