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

#ifndef LINKER_PAIRWISE_UNET_HPP_
#define LINKER_PAIRWISE_UNET_HPP_

#include <array>
#include <string>
#include <string_view>

#include "linker/nn.hpp"
#include "linker/tensor.hpp"

namespace linker {

inline constexpr std::size_t kInteractionTypes = 7;
inline constexpr std::array<std::string_view, kInteractionTypes> kInteractionTypeOrder = {
    "hydrogen_bond", "hydrophobic", "pi_stacking", "pi_cation",
    "salt_bridge",   "water_bridge", "halogen_bond"};

// Z[r, f] = [Hp[r] | Hl[f]], shape (R, F, 2D).
Tensor build_pairwise(const Tensor& protein, const Tensor& ligand);

struct UNetConfig {
  std::size_t in_channels = 128;  // 2D
  std::size_t base_channels = 16;
  std::size_t out_channels = 16;  // D_unet
};

// Two-level encoder/decoder over the (R, F) grid with skip concatenation,
// 3x3 same-padded convolutions, 2x2 max pooling and nearest upsampling.
// Inputs are zero-padded to multiples of 4 and cropped back.
class PairwiseUNet {
 public:
  static constexpr std::size_t kGridMultiple = 4;

  PairwiseUNet() = default;
  PairwiseUNet(const UNetConfig& config, Rng& rng);

  const UNetConfig& config() const { return config_; }

  // (R, F, 2D) -> (R, F, D_unet).
  Tensor unet_forward(const Tensor& pairwise) const;
  // (R, F, D_unet) -> probabilities (R, F, 7).
  Tensor predict_types(const Tensor& features) const;
  // Logits before the sigmoid, (R, F, 7).
  Tensor type_logits(const Tensor& features) const;

  Tensor forward(const Tensor& pairwise) const { return predict_types(unet_forward(pairwise)); }

  void collect(ParamList& out, const std::string& prefix) const;
  ParamList parameters() const;

 private:
  // Channels-first core on a padded grid.
  Tensor run_grid(const Tensor& grid) const;

  UNetConfig config_;
  Conv2d enc0_, enc1_, bottleneck_, dec1_, dec0_, out_;
  Conv2d head0_, head1_;  // 1x1
};

}  // namespace linker

#endif  // LINKER_PAIRWISE_UNET_HPP_
