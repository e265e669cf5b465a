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

#ifndef LINKER_NN_HPP_
#define LINKER_NN_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "linker/tensor.hpp"

namespace linker {

using Rng = std::mt19937_64;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};
using ParamList = std::vector<NamedTensor>;

// Trainable leaf drawn from U(-bound, bound).
Tensor uniform_param(Shape shape, double bound, Rng& rng);
// Glorot-uniform initialization for a fan_in -> fan_out map.
Tensor glorot_param(Shape shape, std::size_t fan_in, std::size_t fan_out,
                    Rng& rng);

// y = x W + b, with W stored as (in, out).
struct Linear {
  Tensor weight;
  Tensor bias;

  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng);

  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
  Tensor forward(const Tensor& x) const;
  void collect(ParamList& out, const std::string& prefix) const;
};

struct LayerNorm {
  Tensor gain;
  Tensor bias;

  LayerNorm() = default;
  explicit LayerNorm(std::size_t width);

  Tensor forward(const Tensor& x) const;
  void collect(ParamList& out, const std::string& prefix) const;
};

struct Conv2d {
  Tensor weight;  // (out, in, k, k)
  Tensor bias;

  Conv2d() = default;
  Conv2d(std::size_t in, std::size_t out, std::size_t kernel, Rng& rng);

  Tensor forward(const Tensor& x) const;
  void collect(ParamList& out, const std::string& prefix) const;
};

std::vector<Tensor> tensors_of(const ParamList& params);

// ---- Adam --------------------------------------------------------------------

struct AdamConfig {
  double learning_rate = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // L2 added to the gradient; off by default
  double grad_clip = 0.0;     // global-norm clip; off when <= 0
};

struct AdamState {
  std::int64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

// One bias-corrected update of a single buffer. `step` is the 1-based count
// after this update.
void adam_update(std::span<double> param, std::span<const double> grad,
                 std::span<double> first_moment, std::span<double> second_moment,
                 std::int64_t step, const AdamConfig& config);

// Updates every tensor from its accumulated gradient. State is lazily sized
// on first use and must then stay aligned with `params`.
void adam_step(std::span<Tensor> params, AdamState& state,
               const AdamConfig& config);

void zero_grads(std::span<Tensor> params);

}  // namespace linker

#endif  // LINKER_NN_HPP_
