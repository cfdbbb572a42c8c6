// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "metastyle/losses.hpp"
#include "oracles.hpp"

using namespace metastyle;

namespace {

// Random probability map: softmax of uniform logits so rows sum to one.
Tensor4 random_probs(Rng& rng, int n, int k, int h, int w) {
  Tensor4 p(n, k, h, w);
  for (int i = 0; i < n; ++i) {
    for (std::size_t px = 0; px < p.plane(); ++px) {
      double sum = 0.0;
      std::vector<double> e(k);
      for (int c = 0; c < k; ++c) {
        e[c] = std::exp(rng.uniform(-1.0, 1.0));
        sum += e[c];
      }
      for (int c = 0; c < k; ++c) p.channel(i, c)[px] = e[c] / sum;
    }
  }
  return p;
}

MaskBatch random_mask(Rng& rng, int n, int k, int h, int w) {
  MaskBatch m(n, h, w);
  for (auto& v : m.labels) v = static_cast<std::uint8_t>(rng.below(k));
  return m;
}

}  // namespace

TEST_CASE("feature_embed: basis vector, zero rule, 3-4-5 normalization") {
  // One-hot channel activation -> matching basis vector.
  Tensor4 f(1, 3, 2, 2);
  f.fill(0.0);
  for (std::size_t i = 0; i < f.plane(); ++i) f.channel(0, 1)[i] = 2.5;
  EmbeddingBatch e = feature_embed(f);
  CHECK(e.v[0][0] == 0.0);
  CHECK(e.v[0][1] == 1.0);
  CHECK(e.v[0][2] == 0.0);

  // All-zero features -> first basis vector.
  Tensor4 z(1, 3, 2, 2);
  z.fill(0.0);
  e = feature_embed(z);
  CHECK(e.v[0][0] == 1.0);
  CHECK(e.v[0][1] == 0.0);

  // Channel means (3, 4) -> (0.6, 0.8).
  Tensor4 g(1, 2, 1, 2);
  g.channel(0, 0)[0] = 2.0;
  g.channel(0, 0)[1] = 4.0;  // mean 3
  g.channel(0, 1)[0] = 4.0;
  g.channel(0, 1)[1] = 4.0;  // mean 4
  e = feature_embed(g);
  CHECK(e.v[0][0] == Catch::Approx(0.6).epsilon(1e-12));
  CHECK(e.v[0][1] == Catch::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("feature_embed output is unit length") {
  Rng rng(3);
  Tensor4 f(4, 6, 5, 5);
  for (std::size_t i = 0; i < f.size(); ++i) f.data()[i] = rng.uniform(-2, 2);
  const EmbeddingBatch e = feature_embed(f);
  for (const auto& v : e.v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    CHECK(std::sqrt(norm) == Catch::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("align_loss: spec examples") {
  PairBatch pb;
  // Positive identical pair -> 0.
  pb.a = {{1.0, 0.0}};
  pb.b = {{1.0, 0.0}};
  pb.label = {1};
  CHECK(align_loss(pb, 1.0) == 0.0);

  // Negative pair with D >= margin -> 0.
  pb.a = {{1.0, 0.0}};
  pb.b = {{0.0, 1.0}};  // D = sqrt(2) > 1
  pb.label = {0};
  CHECK(align_loss(pb, 1.0) == 0.0);

  // Single negative pair, D = 0.5, m = 1 -> 0.25.
  pb.a = {{0.5, 0.0}};
  pb.b = {{0.0, 0.0}};
  pb.label = {0};
  CHECK(align_loss(pb, 1.0) == Catch::Approx(0.25).epsilon(1e-12));

  // Averaging over pairs.
  pb.a = {{0.5, 0.0}, {1.0, 0.0}};
  pb.b = {{0.0, 0.0}, {0.0, 0.0}};
  pb.label = {0, 1};
  // pair 0: 0.25; pair 1: d^2 = 1 -> mean 0.625.
  CHECK(align_loss(pb, 1.0) == Catch::Approx(0.625).epsilon(1e-12));
}

TEST_CASE("align_loss input validation") {
  PairBatch pb;
  CHECK_THROWS_AS(align_loss(pb, 1.0), ValueError);
  pb.a = {{1.0}};
  pb.b = {{1.0}, {2.0}};
  pb.label = {1};
  CHECK_THROWS_AS(align_loss(pb, 1.0), DimensionError);
  pb.b = {{1.0, 3.0}};
  CHECK_THROWS_AS(align_loss(pb, 1.0), DimensionError);
  pb.b = {{1.0}};
  pb.label = {2};
  CHECK_THROWS_AS(align_loss(pb, 1.0), ValueError);
  pb.label = {1};
  CHECK_THROWS_AS(align_loss(pb, 0.0), ValueError);
}

TEST_CASE("align_loss is invariant under a common rotation") {
  Rng rng(11);
  PairBatch pb;
  for (int i = 0; i < 6; ++i) {
    std::vector<double> a(4), b(4);
    double na = 0, nb = 0;
    for (int c = 0; c < 4; ++c) {
      a[c] = rng.uniform(-1, 1);
      b[c] = rng.uniform(-1, 1);
      na += a[c] * a[c];
      nb += b[c] * b[c];
    }
    for (int c = 0; c < 4; ++c) {
      a[c] /= std::sqrt(na);
      b[c] /= std::sqrt(nb);
    }
    pb.a.push_back(a);
    pb.b.push_back(b);
    pb.label.push_back(i % 2);
  }
  const double before = align_loss(pb, 1.0);
  // Givens rotation in the (0, 2) plane by 0.7 rad applied to every vector.
  const double cs = std::cos(0.7), sn = std::sin(0.7);
  PairBatch rot = pb;
  for (auto* side : {&rot.a, &rot.b}) {
    for (auto& v : *side) {
      const double x = v[0], y = v[2];
      v[0] = cs * x - sn * y;
      v[2] = sn * x + cs * y;
    }
  }
  CHECK(align_loss(rot, 1.0) == Catch::Approx(before).epsilon(1e-12));
}

TEST_CASE("align_loss gradient matches finite differences") {
  Rng rng(23);
  PairBatch pb;
  for (int i = 0; i < 5; ++i) {
    std::vector<double> a(3), b(3);
    for (int c = 0; c < 3; ++c) {
      a[c] = rng.uniform(-1, 1);
      b[c] = rng.uniform(-1, 1);
    }
    pb.a.push_back(a);
    pb.b.push_back(b);
    pb.label.push_back(i % 2);
  }
  const double margin = 1.0;
  std::vector<std::vector<double>> da, db;
  align_loss_backward(pb, margin, &da, &db);
  const double h = 1e-6;
  for (std::size_t i = 0; i < pb.a.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      // Skip coordinates near the hinge kink where the derivative jumps.
      double d_sq = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double diff = pb.a[i][k] - pb.b[i][k];
        d_sq += diff * diff;
      }
      const double d = std::sqrt(d_sq);
      if (pb.label[i] == 0 && std::abs(d - margin) < 1e-3) continue;

      const double fd_a = oracles::central_diff(
          [&](double x) {
            PairBatch t = pb;
            t.a[i][c] = x;
            return align_loss(t, margin);
          },
          pb.a[i][c], h);
      const double fd_b = oracles::central_diff(
          [&](double x) {
            PairBatch t = pb;
            t.b[i][c] = x;
            return align_loss(t, margin);
          },
          pb.b[i][c], h);
      CHECK(oracles::rel_err(da[i][c], fd_a) < 1e-4);
      CHECK(oracles::rel_err(db[i][c], fd_b) < 1e-4);
    }
  }
}

TEST_CASE("consistency_loss: zero, derived two-class pixel, symmetry") {
  Rng rng(5);
  Tensor4 p = random_probs(rng, 2, 3, 4, 4);
  CHECK(consistency_loss(p, p) == 0.0);

  Tensor4 a(1, 2, 1, 1), b(1, 2, 1, 1);
  a.channel(0, 0)[0] = 1.0;
  a.channel(0, 1)[0] = 0.0;
  b.channel(0, 0)[0] = 0.0;
  b.channel(0, 1)[0] = 1.0;
  CHECK(consistency_loss(a, b) == Catch::Approx(2.0).epsilon(1e-12));

  Tensor4 q = random_probs(rng, 2, 3, 4, 4);
  CHECK(consistency_loss(p, q) == Catch::Approx(consistency_loss(q, p)));

  Tensor4 wrong(2, 3, 4, 5);
  CHECK_THROWS_AS(consistency_loss(p, wrong), DimensionError);
}

TEST_CASE("consistency_loss averages over instances") {
  // Two instances: one identical, one maximally flipped single pixel.
  Tensor4 a(2, 2, 1, 1), b(2, 2, 1, 1);
  a.channel(0, 0)[0] = 1.0;
  a.channel(0, 1)[0] = 0.0;
  b.channel(0, 0)[0] = 1.0;
  b.channel(0, 1)[0] = 0.0;
  a.channel(1, 0)[0] = 1.0;
  a.channel(1, 1)[0] = 0.0;
  b.channel(1, 0)[0] = 0.0;
  b.channel(1, 1)[0] = 1.0;
  CHECK(consistency_loss(a, b) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("consistency_loss gradient matches finite differences") {
  Rng rng(7);
  Tensor4 p = random_probs(rng, 2, 2, 3, 3);
  Tensor4 q = random_probs(rng, 2, 2, 3, 3);
  Tensor4 dp, dq;
  consistency_loss_backward(p, q, &dp, &dq);
  // Finite differences bypass the probability validation by evaluating the
  // raw quadratic; perturbation keeps values in [0, 1] anyway for h = 1e-7.
  std::vector<std::size_t> coords;
  for (int i = 0; i < 20; ++i) coords.push_back(rng.below(p.size()));
  for (const auto c : coords) {
    const double h = 1e-7;
    const double orig = p.data()[c];
    p.data()[c] = orig + h;
    const double up = consistency_loss(p, q);
    p.data()[c] = orig - h;
    const double down = consistency_loss(p, q);
    p.data()[c] = orig;
    const double fd = (up - down) / (2 * h);
    CHECK(oracles::rel_err(dp.data()[c], fd) < 1e-4);
  }
}

TEST_CASE("dice_loss: perfect, disjoint, half overlap") {
  // Perfect one-hot prediction -> ~0.
  Tensor4 p(1, 2, 4, 4);
  MaskBatch m(1, 4, 4);
  for (std::size_t i = 0; i < 16; ++i) {
    const bool fg = i < 8;
    m.labels[i] = fg ? 1 : 0;
    p.channel(0, 1)[i] = fg ? 1.0 : 0.0;
    p.channel(0, 0)[i] = fg ? 0.0 : 1.0;
  }
  CHECK(dice_loss(p, m) == Catch::Approx(0.0).margin(1e-5));

  // Fully disjoint full-confidence prediction -> ~1.
  Tensor4 q(1, 2, 4, 4);
  for (std::size_t i = 0; i < 16; ++i) {
    const bool fg = i >= 8;  // opposite half
    q.channel(0, 1)[i] = fg ? 1.0 : 0.0;
    q.channel(0, 0)[i] = fg ? 0.0 : 1.0;
  }
  CHECK(dice_loss(q, m) == Catch::Approx(1.0).margin(1e-5));

  // Covering half the target with equal areas -> 0.5.
  Tensor4 r(1, 2, 4, 4);
  for (std::size_t i = 0; i < 16; ++i) {
    const bool fg = i >= 4 && i < 12;  // overlaps mask fg on [4, 8)
    r.channel(0, 1)[i] = fg ? 1.0 : 0.0;
    r.channel(0, 0)[i] = fg ? 0.0 : 1.0;
  }
  CHECK(dice_loss(r, m) == Catch::Approx(0.5).margin(1e-5));
}

TEST_CASE("dice_loss multi-class averages foreground classes") {
  Rng rng(9);
  Tensor4 p = random_probs(rng, 2, 4, 6, 6);
  MaskBatch m = random_mask(rng, 2, 4, 6, 6);
  const double loss = dice_loss(p, m);
  CHECK(loss >= 0.0);
  CHECK(loss <= 1.0);

  MaskBatch bad = m;
  bad.labels[0] = 7;
  CHECK_THROWS_AS(dice_loss(p, bad), DataError);
}

TEST_CASE("dice_loss gradient matches finite differences") {
  Rng rng(13);
  Tensor4 p = random_probs(rng, 2, 3, 4, 4);
  MaskBatch m = random_mask(rng, 2, 3, 4, 4);
  const Tensor4 grad = dice_loss_backward(p, m);
  std::vector<std::size_t> coords;
  for (int i = 0; i < 20; ++i) coords.push_back(rng.below(p.size()));
  for (const auto c : coords) {
    const double h = 1e-7;
    const double orig = p.data()[c];
    p.data()[c] = orig + h;
    const double up = dice_loss(p, m);
    p.data()[c] = orig - h;
    const double down = dice_loss(p, m);
    p.data()[c] = orig;
    const double fd = (up - down) / (2 * h);
    if (std::abs(fd) < 1e-12 && std::abs(grad.data()[c]) < 1e-12) continue;
    CHECK(oracles::rel_err(grad.data()[c], fd) < 1e-4);
  }
}

TEST_CASE("prediction map validation") {
  Tensor4 p(1, 2, 1, 1);
  p.channel(0, 0)[0] = 0.7;
  p.channel(0, 1)[0] = 0.4;  // sums to 1.1
  CHECK_THROWS_AS(validate_prediction_map(p, "test"), ValueError);
  p.channel(0, 0)[0] = -0.1;
  p.channel(0, 1)[0] = 1.1;
  CHECK_THROWS_AS(validate_prediction_map(p, "test"), ValueError);
  p.channel(0, 0)[0] = 0.25;
  p.channel(0, 1)[0] = 0.75;
  CHECK_NOTHROW(validate_prediction_map(p, "test"));
}

TEST_CASE("aux_loss: endpoints, derived midpoint, fixed point") {
  CHECK(aux_loss(0.2, 0.4, 0.0) == Catch::Approx(0.2));
  CHECK(aux_loss(0.2, 0.4, 0.5) == Catch::Approx(0.3).epsilon(1e-12));
  CHECK(aux_loss(0.7, 0.7, 0.123) == Catch::Approx(0.7).epsilon(1e-12));
  CHECK_THROWS_AS(aux_loss(0.1, 0.1, 1.0), ValueError);
  CHECK_THROWS_AS(aux_loss(0.1, 0.1, -0.01), ValueError);
}

TEST_CASE("total_loss: endpoints, derived midpoint, linearity") {
  CHECK(total_loss(0.2, 0.4, 0.0) == Catch::Approx(0.4));
  CHECK(total_loss(0.2, 0.4, 1.0) == Catch::Approx(0.2));
  CHECK(total_loss(0.2, 0.4, 0.5) == Catch::Approx(0.3).epsilon(1e-12));
  // Scaling both components by c scales the total by c.
  const double c = 3.7;
  CHECK(total_loss(c * 0.2, c * 0.4, 0.3) ==
        Catch::Approx(c * total_loss(0.2, 0.4, 0.3)).epsilon(1e-12));
  CHECK_THROWS_AS(total_loss(0.1, 0.1, 1.5), ValueError);
}

TEST_CASE("feature_embed_backward matches finite differences") {
  Rng rng(29);
  Tensor4 f(2, 3, 4, 4);
  for (std::size_t i = 0; i < f.size(); ++i) f.data()[i] = rng.uniform(-1, 1);
  const EmbeddingBatch emb = feature_embed(f);
  // Loss: weighted sum of embedding entries (arbitrary fixed weights).
  std::vector<std::vector<double>> weights(2, std::vector<double>(3));
  for (auto& row : weights) {
    for (auto& v : row) v = rng.uniform(-1, 1);
  }
  const auto loss_of = [&](const Tensor4& x) {
    const EmbeddingBatch e = feature_embed(x);
    double total = 0.0;
    for (int n = 0; n < 2; ++n) {
      for (int c = 0; c < 3; ++c) total += weights[n][c] * e.v[n][c];
    }
    return total;
  };
  const Tensor4 grad = feature_embed_backward(f, emb, weights);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t c = rng.below(f.size());
    const double h = 1e-6;
    const double orig = f.data()[c];
    f.data()[c] = orig + h;
    const double up = loss_of(f);
    f.data()[c] = orig - h;
    const double down = loss_of(f);
    f.data()[c] = orig;
    const double fd = (up - down) / (2 * h);
    if (std::abs(fd) < 1e-12 && std::abs(grad.data()[c]) < 1e-12) continue;
    CHECK(oracles::rel_err(grad.data()[c], fd) < 1e-4);
  }
}
