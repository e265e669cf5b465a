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

#include "linker/losses.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace linker {

Tensor focal_loss(const Tensor& probs, const Tensor& targets, const FocalConfig& cfg) {
  if (probs.shape() != targets.shape()) {
    throw ShapeMismatch("focal_loss: " + shape_str(probs.shape()) + " vs " +
                        shape_str(targets.shape()));
  }
  if (probs.numel() == 0) throw ShapeMismatch("focal_loss: empty input");
  const auto y = targets.data();
  std::vector<double> weight(y.size()), pos(y.size()), negsign(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool positive = y[i] > 0.5;
    weight[i] = positive ? cfg.alpha : 1.0 - cfg.alpha;
    pos[i] = positive ? 1.0 : 0.0;
    negsign[i] = positive ? 1.0 : -1.0;
  }
  const Tensor p = clamp(probs, kFocalEpsilon, 1.0 - kFocalEpsilon);
  // p_t = y p + (1 - y)(1 - p) = (1 - y) + sign * p
  std::vector<double> offset(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) offset[i] = 1.0 - pos[i];
  const Tensor pt = add(Tensor(probs.shape(), std::move(offset)),
                        mul(Tensor(probs.shape(), std::move(negsign)), p));
  Tensor term = log(pt);
  if (cfg.gamma != 0.0) term = mul(pow(add_scalar(neg(pt), 1.0), cfg.gamma), term);
  term = mul(Tensor(probs.shape(), std::move(weight)), term);
  return neg(mean(term));
}

Tensor mse(const Tensor& pred, const Tensor& truth) {
  if (pred.numel() != truth.numel() || pred.numel() == 0) {
    throw LengthMismatch("mse: lengths " + std::to_string(pred.numel()) + " and " +
                         std::to_string(truth.numel()));
  }
  const Tensor a = reshape(pred, {pred.numel()});
  const Tensor b = reshape(truth, {truth.numel()});
  const Tensor d = sub(a, b);
  return mean(mul(d, d));
}

std::vector<std::size_t> positive_partners(const std::vector<double>& affinities) {
  const std::size_t n = affinities.size();
  if (n < 2) throw BatchTooSmall("InfoNCE needs a batch of at least 2");
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = i == 0 ? 1 : 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = std::abs(affinities[i] - affinities[j]);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    out[i] = arg;
  }
  return out;
}

Tensor info_nce(const Tensor& h, const std::vector<double>& affinities, double tau) {
  if (h.rank() != 2) throw ShapeMismatch("info_nce: expected (B, W), got " + shape_str(h.shape()));
  const std::size_t b = h.dim(0);
  if (b < 2 || affinities.size() < 2) throw BatchTooSmall("InfoNCE needs a batch of at least 2");
  if (affinities.size() != b) {
    throw LengthMismatch("info_nce: " + std::to_string(b) + " embeddings, " +
                         std::to_string(affinities.size()) + " affinities");
  }
  const auto partner = positive_partners(affinities);
  std::vector<double> select(b * b, 0.0);
  for (std::size_t i = 0; i < b; ++i) select[i * b + partner[i]] = 1.0;
  const Tensor z = l2_normalize(h, 1);
  const Tensor logits = scale(matmul(z, transpose(z)), 1.0 / tau);
  const Tensor log_prob = log(softmax(logits, 1));
  const Tensor picked = sum(mul(log_prob, Tensor({b, b}, std::move(select))));
  return scale(picked, -1.0 / static_cast<double>(b));
}

Tensor uniformity(const Tensor& z) {
  if (z.rank() != 2 || z.dim(0) == 0) {
    throw ShapeMismatch("uniformity: expected (B, W), got " + shape_str(z.shape()));
  }
  const std::size_t b = z.dim(0), w = z.dim(1);
  const auto v = z.data();
  for (std::size_t i = 0; i < b; ++i) {
    double ss = 0.0;
    for (std::size_t k = 0; k < w; ++k) ss += v[i * w + k] * v[i * w + k];
    if (std::abs(std::sqrt(ss) - 1.0) > 1e-6) {
      throw NotNormalized("uniformity: row " + std::to_string(i) + " has norm " +
                          std::to_string(std::sqrt(ss)));
    }
  }
  const Tensor sq = sum(mul(z, z), 1);  // (B)
  const Tensor gram = matmul(z, transpose(z));
  const Tensor d2 = sub(add(reshape(sq, {b, 1}), reshape(sq, {1, b})), scale(gram, 2.0));
  return log(mean(exp(scale(d2, -2.0))));
}

Tensor total_affinity_loss(const Tensor& mse_term, const Tensor& nce, const Tensor& unif,
                           const LatentConfig& cfg) {
  return add(mse_term, scale(add(nce, scale(unif, cfg.lambda)), cfg.beta));
}

}  // namespace linker
