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

#ifndef LINKER_LOSSES_HPP_
#define LINKER_LOSSES_HPP_

#include <stdexcept>
#include <vector>

#include "linker/tensor.hpp"

namespace linker {

class LengthMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BatchTooSmall : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotNormalized : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FocalConfig {
  double alpha = 0.85;
  double gamma = 1.0;
};

struct LatentConfig {
  double beta = 2.0;
  double lambda = 0.1;
  double tau = 0.1;
};

inline constexpr double kFocalEpsilon = 1e-7;

// Mean over every entry of -a_t (1 - p_t)^gamma log p_t, where a_t = alpha
// for positives and 1 - alpha for negatives.
Tensor focal_loss(const Tensor& probs, const Tensor& targets, const FocalConfig& cfg = {});

Tensor mse(const Tensor& pred, const Tensor& truth);

// Positive partner of every sample: closest affinity among the others, ties
// resolved to the lowest index.
std::vector<std::size_t> positive_partners(const std::vector<double>& affinities);

// Rows are L2-normalised internally. The softmax denominator keeps j = i.
Tensor info_nce(const Tensor& h, const std::vector<double>& affinities, double tau);

// log mean_{i,j} exp(-2 |z_i - z_j|^2) over all ordered pairs, i = j included.
Tensor uniformity(const Tensor& z);

Tensor total_affinity_loss(const Tensor& mse_term, const Tensor& nce, const Tensor& unif,
                           const LatentConfig& cfg = {});

}  // namespace linker

#endif  // LINKER_LOSSES_HPP_
