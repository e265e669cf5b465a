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
#include "linker/tensor.hpp"
#include "test_util.hpp"

namespace linker {
namespace {

using testing::check_gradients;
using testing::random_tensor;

Tensor conv_oracle(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride,
                   std::size_t pad) {
  const std::size_t c = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t o = w.dim(0), k = w.dim(2);
  const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (wd + 2 * pad - k) / stride + 1;
  std::vector<double> out(o * oh * ow, 0.0);
  for (std::size_t oc = 0; oc < o; ++oc)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        double acc = b.data()[oc];
        for (std::size_t ic = 0; ic < c; ++ic)
          for (std::size_t di = 0; di < k; ++di)
            for (std::size_t dj = 0; dj < k; ++dj) {
              const long yi = static_cast<long>(i * stride + di) - static_cast<long>(pad);
              const long xj = static_cast<long>(j * stride + dj) - static_cast<long>(pad);
              if (yi < 0 || xj < 0 || yi >= static_cast<long>(h) || xj >= static_cast<long>(wd))
                continue;
              acc += x.at({ic, static_cast<std::size_t>(yi), static_cast<std::size_t>(xj)}) *
                     w.at({oc, ic, di, dj});
            }
        out[(oc * oh + i) * ow + j] = acc;
      }
  return Tensor({o, oh, ow}, out);
}

}  // namespace

TEST_CASE("construction and accessors") {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.rank() == 2);
  CHECK(t.numel() == 6);
  CHECK(t.at({1, 2}) == 6.0);
  CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), ShapeMismatch);
  CHECK_THROWS_AS(t.item(), ShapeMismatch);
  CHECK(Tensor::scalar(3.5).item() == 3.5);
  CHECK(t.grad() == std::vector<double>(6, 0.0));
}

TEST_CASE("broadcasting follows numpy rules") {
  CHECK(broadcast_shape({3, 1}, {1, 4}) == Shape{3, 4});
  CHECK(broadcast_shape({4}, {2, 3, 4}) == Shape{2, 3, 4});
  CHECK_THROWS_AS(broadcast_shape({3}, {4}), ShapeMismatch);
  const Tensor a({2, 1}, {1, 2});
  const Tensor b({3}, {10, 20, 30});
  const Tensor c = add(a, b);
  CHECK(c.shape() == Shape{2, 3});
  CHECK(c.at({1, 2}) == 32.0);
}

TEST_CASE("matmul, reductions and softmax values") {
  const Tensor a({2, 2}, {1, 2, 3, 4});
  const Tensor b({2, 2}, {5, 6, 7, 8});
  const Tensor c = matmul(a, b);
  CHECK(c.data()[0] == 19.0);
  CHECK(c.data()[3] == 50.0);
  CHECK(sum(a).item() == 10.0);
  CHECK(mean(a, 0).data()[1] == 3.0);
  CHECK(max(a, 1).data()[0] == 2.0);
  const Tensor s = softmax(Tensor({3}, {0, 0, 0}), 0);
  for (double v : s.data()) CHECK(v == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(matmul(a, Tensor({3, 1}, {1, 2, 3})), ShapeMismatch);
}

TEST_CASE("backward requires a tape and accumulates on leaves") {
  Tensor x({2}, {1.0, 2.0}, true);
  const Tensor y = sum(mul(x, x));
  CHECK_THROWS_AS(backward(y), NoTape);
  {
    Tape tape;
    backward(sum(mul(x, x)));
  }
  CHECK(x.grad() == std::vector<double>{2.0, 4.0});
  {
    Tape tape;
    backward(sum(mul(x, x)));
  }
  CHECK(x.grad() == std::vector<double>{4.0, 8.0});
  x.zero_grad();
  CHECK(x.grad() == std::vector<double>{0.0, 0.0});
}

TEST_CASE("NoGradGuard suppresses recording") {
  Tensor x({2}, {1.0, 2.0}, true);
  Tape tape;
  {
    NoGradGuard guard;
    const Tensor y = mul(x, x);
    CHECK_FALSE(y.requires_grad());
  }
  CHECK(mul(x, x).requires_grad());
  CHECK(tape.size() == 1);
}

TEST_CASE("conv2d matches a brute-force oracle") {
  Rng rng(7);
  for (std::size_t stride : {1u, 2u}) {
    for (std::size_t k : {1u, 3u, 5u}) {
      const Tensor x = random_tensor({3, 9, 7}, rng);
      const Tensor w = random_tensor({4, 3, k, k}, rng);
      const Tensor b = random_tensor({4}, rng);
      const std::size_t pad = k / 2;
      const Tensor got = conv2d(x, w, b, Conv2dOptions{stride, static_cast<int>(pad),
                                                        static_cast<int>(pad)});
      const Tensor want = conv_oracle(x, w, b, stride, pad);
      REQUIRE(got.shape() == want.shape());
      for (std::size_t i = 0; i < got.numel(); ++i) {
        CHECK(got.data()[i] == doctest::Approx(want.data()[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("pool and upsample shapes") {
  const Tensor x({1, 4, 4}, std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15});
  const Tensor p = max_pool2d(x, 2);
  CHECK(p.shape() == Shape{1, 2, 2});
  CHECK(p.data()[0] == 5.0);
  CHECK(p.data()[3] == 15.0);
  const Tensor u = up_sample2d(p, 2);
  CHECK(u.shape() == Shape{1, 4, 4});
  CHECK(u.at({0, 1, 1}) == 5.0);
  CHECK_THROWS_AS(max_pool2d(Tensor::zeros({1, 3, 4}), 2), ShapeMismatch);
}

TEST_CASE("elementwise gradients") {
  Rng rng(11);
  Tensor a = random_tensor({3, 4}, rng, 0.5, 1.5, true);
  Tensor b = random_tensor({4}, rng, 0.5, 1.5, true);
  const std::vector<std::pair<const char*, std::function<Tensor()>>> cases = {
      {"add", [&] { return sum(mul(add(a, b), add(a, b))); }},
      {"sub", [&] { return sum(mul(sub(a, b), a)); }},
      {"div", [&] { return sum(div(a, b)); }},
      {"pow", [&] { return sum(pow(a, 2.5)); }},
      {"exp_log", [&] { return sum(log(add_scalar(exp(a), 1.0))); }},
      {"sqrt", [&] { return sum(sqrt(a)); }},
      {"sigmoid", [&] { return sum(mul(sigmoid(a), b)); }},
      {"relu", [&] { return sum(mul(relu(add_scalar(a, -1.0)), b)); }},
      {"clamp", [&] { return sum(mul(clamp(a, 0.8, 1.2), a)); }},
      {"scale_neg", [&] { return sum(neg(scale(mul(a, b), 3.0))); }},
  };
  for (const auto& [name, f] : cases) {
    CAPTURE(name);
    const auto rep = check_gradients(f, {a, b});
    CHECK_MESSAGE(rep.ok, rep.detail);
  }
}

TEST_CASE("structural and reduction gradients") {
  Rng rng(13);
  Tensor a = random_tensor({2, 3, 4}, rng, -1, 1, true);
  Tensor m = random_tensor({4, 5}, rng, -1, 1, true);
  Tensor w = random_tensor({2, 3, 4}, rng);
  const auto weighted = [&](const Tensor& t) {
    Rng local(99);
    return sum(mul(t, random_tensor(t.shape(), local)));
  };
  const std::vector<std::pair<const char*, std::function<Tensor()>>> cases = {
      {"reshape", [&] { return weighted(reshape(a, {6, 4})); }},
      {"permute", [&] { return weighted(permute(a, {2, 0, 1})); }},
      {"concat", [&] { return weighted(concat({a, mul(a, a)}, 1)); }},
      {"slice", [&] { return weighted(slice(a, 2, 1, 2)); }},
      {"gather", [&] { return weighted(gather_rows(reshape(a, {6, 4}), {0, 5, 5, 2})); }},
      {"pad2d", [&] { return weighted(pad2d(a, 2, 1)); }},
      {"matmul", [&] { return weighted(matmul(reshape(a, {6, 4}), m)); }},
      {"sum_axis", [&] { return weighted(sum(a, 1)); }},
      {"mean_axis", [&] { return weighted(mean(a, 2)); }},
      {"max_axis", [&] { return weighted(max(a, 0)); }},
      {"softmax", [&] { return weighted(softmax(a, 2)); }},
      {"l2_normalize", [&] { return weighted(l2_normalize(a, 2)); }},
      {"broadcast", [&] { return weighted(broadcast_to(reshape(m, {1, 4, 5}), {3, 4, 5})); }},
      {"transpose", [&] { return weighted(transpose(m)); }},
      {"mul_bcast", [&] { return weighted(mul(a, w)); }},
  };
  for (const auto& [name, f] : cases) {
    CAPTURE(name);
    const auto rep = check_gradients(f, {a, m});
    CHECK_MESSAGE(rep.ok, rep.detail);
  }
}

TEST_CASE("layer norm and convolution gradients") {
  Rng rng(17);
  Tensor x = random_tensor({3, 6}, rng, -1, 1, true);
  Tensor g = random_tensor({6}, rng, 0.5, 1.5, true);
  Tensor b = random_tensor({6}, rng, -0.5, 0.5, true);
  const auto rep_ln = check_gradients(
      [&] {
        Rng local(5);
        return sum(mul(layer_norm(x, g, b), random_tensor({3, 6}, local)));
      },
      {x, g, b});
  CHECK_MESSAGE(rep_ln.ok, rep_ln.detail);

  Tensor img = random_tensor({2, 6, 6}, rng, -1, 1, true);
  Tensor w = random_tensor({3, 2, 3, 3}, rng, -1, 1, true);
  Tensor bias = random_tensor({3}, rng, -1, 1, true);
  for (std::size_t stride : {1u, 2u}) {
    const auto rep = check_gradients(
        [&] {
          Rng local(3);
          const Tensor y = conv2d(img, w, bias, Conv2dOptions{stride, 1, 1});
          return sum(mul(y, random_tensor(y.shape(), local)));
        },
        {img, w, bias});
    CHECK_MESSAGE(rep.ok, rep.detail);
  }
  const auto rep_pool = check_gradients(
      [&] {
        Rng local(4);
        const Tensor y = up_sample2d(max_pool2d(img, 2), 2);
        return sum(mul(y, random_tensor(y.shape(), local)));
      },
      {img});
  CHECK_MESSAGE(rep_pool.ok, rep_pool.detail);
}

}  // namespace linker
