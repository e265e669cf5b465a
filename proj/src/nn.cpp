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

#include "linker/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace linker {

Tensor uniform_param(Shape shape, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> values(shape_numel(shape));
  for (double& v : values) v = dist(rng);
  return Tensor(std::move(shape), std::move(values), /*requires_grad=*/true);
}

Tensor glorot_param(Shape shape, std::size_t fan_in, std::size_t fan_out,
                    Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform_param(std::move(shape), bound, rng);
}

Linear::Linear(std::size_t in, std::size_t out, Rng& rng)
    : weight(glorot_param({in, out}, in, out, rng)),
      bias(Tensor::zeros({out}, true)) {}

Tensor Linear::forward(const Tensor& x) const {
  return add(matmul(x, weight), bias);
}

void Linear::collect(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

LayerNorm::LayerNorm(std::size_t width)
    : gain(Tensor::full({width}, 1.0, true)), bias(Tensor::zeros({width}, true)) {}

Tensor LayerNorm::forward(const Tensor& x) const {
  return layer_norm(x, gain, bias);
}

void LayerNorm::collect(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".gain", gain});
  out.push_back({prefix + ".bias", bias});
}

Conv2d::Conv2d(std::size_t in, std::size_t out, std::size_t kernel, Rng& rng)
    : weight(glorot_param({out, in, kernel, kernel}, in * kernel * kernel,
                          out * kernel * kernel, rng)),
      bias(Tensor::zeros({out}, true)) {}

Tensor Conv2d::forward(const Tensor& x) const {
  return conv2d(x, weight, bias);
}

void Conv2d::collect(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

std::vector<Tensor> tensors_of(const ParamList& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.tensor);
  return out;
}

void adam_update(std::span<double> param, std::span<const double> grad,
                 std::span<double> first_moment, std::span<double> second_moment,
                 std::int64_t step, const AdamConfig& config) {
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    double g = grad[i];
    if (config.weight_decay > 0.0) g += config.weight_decay * param[i];
    first_moment[i] = config.beta1 * first_moment[i] + (1.0 - config.beta1) * g;
    second_moment[i] =
        config.beta2 * second_moment[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = first_moment[i] / c1;
    const double v_hat = second_moment[i] / c2;
    param[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

void adam_step(std::span<Tensor> params, AdamState& state,
               const AdamConfig& config) {
  if (state.first_moment.empty()) {
    for (const Tensor& p : params) {
      state.first_moment.emplace_back(p.numel(), 0.0);
      state.second_moment.emplace_back(p.numel(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw std::invalid_argument("adam_step: optimizer state does not match parameters");
  }
  double clip_scale = 1.0;
  if (config.grad_clip > 0.0) {
    double sq = 0.0;
    for (const Tensor& p : params)
      for (double g : p.grad()) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > config.grad_clip) clip_scale = config.grad_clip / norm;
  }
  ++state.step;
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::vector<double> g = params[i].grad();
    if (clip_scale != 1.0)
      for (double& v : g) v *= clip_scale;
    adam_update(params[i].mutable_data(), g, state.first_moment[i],
                state.second_moment[i], state.step, config);
  }
}

void zero_grads(std::span<Tensor> params) {
  for (Tensor& p : params) p.zero_grad();
}

}  // namespace linker
