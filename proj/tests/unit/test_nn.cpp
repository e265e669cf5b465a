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
#include "linker/nn.hpp"
#include "test_util.hpp"

namespace linker {

TEST_CASE("adam: one step on a scalar") {
  std::vector<double> p{1.0}, g{1.0}, m{0.0}, v{0.0};
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  adam_update(p, g, m, v, 1, cfg);
  // m_hat = 1, v_hat = 1, step = lr / (1 + eps)
  CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-7));
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  Tensor w({3}, {1.0, -2.0, 0.5}, true);
  std::vector<Tensor> params{w};
  AdamState st;
  adam_step(params, st, AdamConfig{});
  CHECK(w.data()[0] == 1.0);
  CHECK(w.data()[1] == -2.0);
  CHECK(w.data()[2] == 0.5);
  CHECK(st.step == 1);
}

TEST_CASE("adam: steps decrease a convex quadratic") {
  Tensor w({2}, {3.0, -4.0}, true);
  std::vector<Tensor> params{w};
  AdamState st;
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  const auto loss_value = [&] { return w.data()[0] * w.data()[0] + w.data()[1] * w.data()[1]; };
  double prev = loss_value();
  for (int i = 0; i < 2; ++i) {
    zero_grads(params);
    {
      Tape tape;
      backward(sum(mul(w, w)));
    }
    adam_step(params, st, cfg);
    const double now = loss_value();
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("adam: gradient clipping bounds the update direction") {
  Tensor w({2}, {0.0, 0.0}, true);
  std::vector<Tensor> params{w};
  {
    Tape tape;
    backward(sum(mul(w, Tensor({2}, {300.0, 400.0}))));
  }
  AdamConfig cfg;
  cfg.grad_clip = 1.0;
  AdamState st;
  adam_step(params, st, cfg);
  CHECK(st.first_moment[0][0] == doctest::Approx(0.1 * 0.6));
  CHECK(st.first_moment[0][1] == doctest::Approx(0.1 * 0.8));
}

TEST_CASE("constant loss gives zero gradients") {
  Rng rng(1);
  Linear lin(3, 2, rng);
  std::vector<Tensor> params = tensors_of([&] {
    ParamList pl;
    lin.collect(pl, "lin");
    return pl;
  }());
  {
    Tape tape;
    backward(scale(sum(lin.forward(Tensor::zeros({1, 3}))), 0.0));
  }
  for (const auto& p : params)
    for (double g : p.grad()) CHECK(g == 0.0);
}

TEST_CASE("tiny network passes the gradient check") {
  Rng rng(9);
  Linear lin(4, 3, rng);
  LayerNorm ln(3);
  Conv2d conv(2, 2, 3, rng);
  const Tensor x = testing::random_tensor({5, 4}, rng);
  const Tensor img = testing::random_tensor({2, 4, 4}, rng);
  ParamList pl;
  lin.collect(pl, "lin");
  ln.collect(pl, "ln");
  conv.collect(pl, "conv");
  CHECK(pl[0].name == "lin.weight");
  CHECK(pl.size() == 6);
  const auto rep = testing::check_gradients(
      [&] { return add(mean(sigmoid(ln.forward(lin.forward(x)))), mean(sigmoid(conv.forward(img)))); },
      tensors_of(pl));
  CHECK_MESSAGE(rep.ok, rep.detail);
}

}  // namespace linker
