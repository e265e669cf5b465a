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

#include "linker/scat.hpp"

#include <cmath>

namespace linker {

namespace {
constexpr double kMaskedLogit = -1e30;
}

AttentionBlock::AttentionBlock(std::size_t width, std::size_t heads, bool cross, Rng& rng)
    : width_(width), heads_(heads), cross_(cross),
      norm_q_(width), norm_kv_(width), norm_ff_(width),
      query_(width, width, rng), key_(width, width, rng), value_(width, width, rng),
      output_(width, width, rng), ff_in_(width, 4 * width, rng), ff_out_(4 * width, width, rng) {
  if (heads == 0 || width % heads != 0) {
    throw ShapeMismatch("AttentionBlock: width " + std::to_string(width) +
                        " not divisible by " + std::to_string(heads) + " heads");
  }
}

Tensor AttentionBlock::forward(const Tensor& queries, const Tensor& keys_values,
                               const std::vector<bool>* key_mask,
                               std::vector<Tensor>* weights) const {
  if (queries.rank() != 2 || keys_values.rank() != 2 || queries.dim(1) != width_ ||
      keys_values.dim(1) != width_) {
    throw ShapeMismatch("AttentionBlock: inputs " + shape_str(queries.shape()) + " and " +
                        shape_str(keys_values.shape()) + " for width " +
                        std::to_string(width_));
  }
  if (queries.dim(0) == 0 || keys_values.dim(0) == 0) {
    throw ShapeMismatch("AttentionBlock: empty sequence");
  }
  const std::size_t lkv = keys_values.dim(0);
  const Tensor qn = norm_q_.forward(queries);
  const Tensor kvn = cross_ ? norm_kv_.forward(keys_values) : norm_q_.forward(keys_values);
  const Tensor q = query_.forward(qn);
  const Tensor k = key_.forward(kvn);
  const Tensor v = value_.forward(kvn);

  std::optional<Tensor> mask_row;
  if (key_mask != nullptr) {
    if (key_mask->size() != lkv) throw ShapeMismatch("AttentionBlock: key mask length");
    std::vector<double> m(lkv);
    for (std::size_t j = 0; j < lkv; ++j) m[j] = (*key_mask)[j] ? 0.0 : kMaskedLogit;
    mask_row = Tensor({1, lkv}, std::move(m));
  }

  const std::size_t head_dim = width_ / heads_;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<Tensor> head_out;
  for (std::size_t h = 0; h < heads_; ++h) {
    const Tensor qh = slice(q, 1, h * head_dim, head_dim);
    const Tensor kh = slice(k, 1, h * head_dim, head_dim);
    const Tensor vh = slice(v, 1, h * head_dim, head_dim);
    Tensor logits = scale(matmul(qh, transpose(kh)), inv_sqrt);
    if (mask_row) logits = add(logits, *mask_row);
    const Tensor attn = softmax(logits, 1);
    if (weights != nullptr) weights->push_back(attn);
    head_out.push_back(matmul(attn, vh));
  }
  const Tensor attended = add(queries, output_.forward(concat(head_out, 1)));
  const Tensor ff = ff_out_.forward(relu(ff_in_.forward(norm_ff_.forward(attended))));
  return add(attended, ff);
}

Tensor AttentionBlock::self_attend(const Tensor& x, const std::vector<bool>* key_mask,
                                   std::vector<Tensor>* weights) const {
  return forward(x, x, key_mask, weights);
}

void AttentionBlock::collect(ParamList& out, const std::string& prefix) const {
  norm_q_.collect(out, prefix + ".norm_q");
  if (cross_) norm_kv_.collect(out, prefix + ".norm_kv");
  norm_ff_.collect(out, prefix + ".norm_ff");
  query_.collect(out, prefix + ".query");
  key_.collect(out, prefix + ".key");
  value_.collect(out, prefix + ".value");
  output_.collect(out, prefix + ".output");
  ff_in_.collect(out, prefix + ".ff_in");
  ff_out_.collect(out, prefix + ".ff_out");
}

Scat::Scat(std::size_t width, std::size_t heads, Rng& rng)
    : sa_p_(width, heads, false, rng),
      sa_l_(width, heads, false, rng),
      ca_pl_(width, heads, true, rng),
      ca_lp_(width, heads, true, rng) {}

ScatOutput Scat::forward(const Tensor& protein, const Tensor& ligand) const {
  if (protein.rank() != 2 || ligand.rank() != 2 || protein.dim(1) != ligand.dim(1)) {
    throw ShapeMismatch("Scat: protein " + shape_str(protein.shape()) + " and ligand " +
                        shape_str(ligand.shape()));
  }
  const Tensor hp = sa_p_.self_attend(protein);
  const Tensor hl = sa_l_.self_attend(ligand);
  return {ca_pl_.forward(hp, hl), ca_lp_.forward(hl, hp)};
}

void Scat::collect(ParamList& out, const std::string& prefix) const {
  sa_p_.collect(out, prefix + ".sa_protein");
  sa_l_.collect(out, prefix + ".sa_ligand");
  ca_pl_.collect(out, prefix + ".ca_protein");
  ca_lp_.collect(out, prefix + ".ca_ligand");
}

}  // namespace linker
