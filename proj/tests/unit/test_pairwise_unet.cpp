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

#include <algorithm>

#include "doctest.h"
#include "linker/pairwise_unet.hpp"
#include "test_util.hpp"

namespace linker {
namespace {

UNetConfig tiny(std::size_t in = 4) { return UNetConfig{in, 2, 3}; }

}  // namespace

TEST_CASE("interaction type order") {
  CHECK(kInteractionTypes == 7);
  CHECK(kInteractionTypeOrder[0] == "hydrogen_bond");
  CHECK(kInteractionTypeOrder[1] == "hydrophobic");
  CHECK(kInteractionTypeOrder[6] == "halogen_bond");
}

TEST_CASE("pairwise tensor layout") {
  Rng rng(1);
  const Tensor p1 = testing::random_tensor({1, 3}, rng);
  const Tensor l1 = testing::random_tensor({1, 3}, rng);
  const Tensor z1 = build_pairwise(p1, l1);
  CHECK(z1.shape() == Shape{1, 1, 6});
  for (std::size_t d = 0; d < 3; ++d) {
    CHECK(z1.data()[d] == p1.data()[d]);
    CHECK(z1.data()[3 + d] == l1.data()[d]);
  }
  const Tensor p = testing::random_tensor({5, 4}, rng);
  const Tensor l = testing::random_tensor({3, 4}, rng);
  const Tensor z = build_pairwise(p, l);
  CHECK(z.shape() == Shape{5, 3, 8});
  for (int t = 0; t < 20; ++t) {
    const std::size_t r = rng() % 5, f = rng() % 3, d = rng() % 8;
    const double want = d < 4 ? p.at({r, d}) : l.at({f, d - 4});
    CHECK(z.at({r, f, d}) == want);
  }
  const Tensor zs = build_pairwise(gather_rows(p, {1, 0, 2, 3, 4}), l);
  for (std::size_t f = 0; f < 3; ++f)
    for (std::size_t d = 0; d < 8; ++d) {
      CHECK(zs.at({0, f, d}) == z.at({1, f, d}));
      CHECK(zs.at({1, f, d}) == z.at({0, f, d}));
      CHECK(zs.at({4, f, d}) == z.at({4, f, d}));
    }
  CHECK_THROWS_AS(build_pairwise(p, testing::random_tensor({3, 5}, rng)), ShapeMismatch);
}

TEST_CASE("shape law over ragged grids") {
  Rng rng(2);
  PairwiseUNet net(tiny(), rng);
  for (std::size_t r : {1u, 4u, 5u, 7u, 13u, 32u}) {
    for (std::size_t f : {1u, 2u, 6u, 9u}) {
      const Tensor z = testing::random_tensor({r, f, 4}, rng);
      const Tensor u = net.unet_forward(z);
      CHECK(u.shape() == Shape{r, f, 3});
      const Tensor p = net.forward(z);
      CHECK(p.shape() == Shape{r, f, 7});
      for (double v : p.data()) CHECK((v > 0.0 && v < 1.0));
    }
  }
}

TEST_CASE("zero input with zero biases gives zero output") {
  Rng rng(3);
  PairwiseUNet net(tiny(), rng);
  for (const auto& p : net.parameters())
    if (p.name.ends_with(".bias"))
      for (double v : p.tensor.data()) REQUIRE(v == 0.0);
  const Tensor u = net.unet_forward(Tensor::zeros({6, 5, 4}));
  for (double v : u.data()) CHECK(v == 0.0);
}

TEST_CASE("head: zero logits give one half; logits act independently per type") {
  Rng rng(4);
  PairwiseUNet net(tiny(), rng);
  ParamList params = net.parameters();
  Tensor head_bias;
  for (auto& p : params) {
    if (p.name.starts_with("unet.head1")) {
      auto d = p.tensor.mutable_data();
      std::fill(d.begin(), d.end(), 0.0);
    }
    if (p.name == "unet.head1.bias") head_bias = p.tensor;
  }
  const Tensor u = testing::random_tensor({3, 2, 3}, rng);
  const Tensor half = net.predict_types(u);
  for (double v : half.data()) CHECK(v == 0.5);
  head_bias.mutable_data()[2] = 0.7;
  const Tensor moved = net.predict_types(u);
  for (std::size_t i = 0; i < moved.numel(); ++i) {
    if (i % 7 == 2) {
      CHECK(moved.data()[i] > 0.5);
    } else {
      CHECK(moved.data()[i] == 0.5);
    }
  }
}

TEST_CASE("padding does not leak into the interior") {
  Rng rng(5);
  PairwiseUNet net(tiny(), rng);
  ParamList params = net.parameters();
  for (auto& p : params) {
    if (p.name.ends_with(".bias")) {
      Rng b(11);
      for (double& v : p.tensor.mutable_data()) v = std::uniform_real_distribution<double>(-0.2, 0.2)(b);
    }
  }
  const Tensor z = testing::random_tensor({32, 32, 4}, rng);
  std::vector<double> big(40 * 40 * 4, 0.0);
  for (std::size_t r = 0; r < 32; ++r)
    for (std::size_t f = 0; f < 32; ++f)
      for (std::size_t c = 0; c < 4; ++c) big[(r * 40 + f) * 4 + c] = z.at({r, f, c});
  const Tensor a = net.forward(z);
  const Tensor b = net.forward(Tensor({40, 40, 4}, big));
  for (std::size_t r = 0; r < 12; ++r)
    for (std::size_t f = 0; f < 12; ++f)
      for (std::size_t k = 0; k < 7; ++k) CHECK(std::abs(a.at({r, f, k}) - b.at({r, f, k})) <= 1e-12);
}

TEST_CASE("U-Net gradient check at R=F=6") {
  Rng rng(6);
  PairwiseUNet net(tiny(), rng);
  ParamList params = net.parameters();
  for (auto& p : params)
    if (p.name.ends_with(".bias"))
      for (double& v : p.tensor.mutable_data()) v = std::uniform_real_distribution<double>(0.05, 0.3)(rng);
  Tensor z = testing::random_tensor({6, 6, 4}, rng, -1, 1, true);
  std::vector<Tensor> leaves = tensors_of(params);
  leaves.push_back(z);
  const auto rep = testing::check_gradients([&] { return mean(net.forward(z)); }, leaves);
  CHECK_MESSAGE(rep.ok, rep.detail);
}

}  // namespace linker
