// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "metastyle/common.hpp"
#include "metastyle/metrics.hpp"
#include "oracles.hpp"

using namespace metastyle;

namespace {

// Mask with each pixel set with probability `fill`; fill <= 0 gives an empty
// mask so the degenerate conventions get exercised too.
BinaryMask random_binary(Rng& rng, int h, int w, double fill) {
  BinaryMask m(h, w);
  for (auto& v : m.v) v = rng.uniform() < fill ? 1 : 0;
  return m;
}

BinaryMask rect_mask(int h, int w, int y0, int x0, int y1, int x1) {
  BinaryMask m(h, w);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) m.set(y, x, 1);
  }
  return m;
}

}  // namespace

TEST_CASE("dice_coefficient hand values") {
  BinaryMask a = rect_mask(8, 8, 0, 0, 2, 3);  // 6 pixels
  BinaryMask b = rect_mask(8, 8, 0, 0, 2, 2);  // 4 pixels, all inside a
  // 2 * 4 / (6 + 4) = 0.8
  CHECK(dice_coefficient(a, b) == Catch::Approx(0.8).epsilon(1e-15));
  CHECK(dice_coefficient(a, a) == 1.0);

  BinaryMask c = rect_mask(8, 8, 4, 4, 6, 6);  // disjoint from a
  CHECK(dice_coefficient(a, c) == 0.0);

  BinaryMask e1(8, 8), e2(8, 8);
  CHECK(dice_coefficient(e1, e2) == 1.0);  // empty vs empty is perfect
  CHECK(dice_coefficient(a, e1) == 0.0);

  BinaryMask d(4, 4);
  CHECK_THROWS_AS(dice_coefficient(a, d), DimensionError);
}

TEST_CASE("boundary_pixels excludes interior, keeps image border") {
  // Solid 3x3 block centered in 5x5: all 9 pixels minus the single interior
  // center pixel -> 8 boundary pixels.
  BinaryMask m = rect_mask(5, 5, 1, 1, 4, 4);
  CHECK(boundary_pixels(m).size() == 8);

  // A full image keeps only its perimeter ring.
  BinaryMask full = rect_mask(4, 6, 0, 0, 4, 6);
  CHECK(boundary_pixels(full).size() == 2 * 4 + 2 * 6 - 4);

  // Single pixel is its own boundary.
  BinaryMask one(3, 3);
  one.set(1, 1, 1);
  const auto pts = boundary_pixels(one);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0] == std::make_pair(1, 1));

  CHECK(boundary_pixels(BinaryMask(3, 3)).empty());
}

TEST_CASE("hausdorff_distance hand values") {
  // Two single pixels with offset (3, 4) -> distance 5.
  BinaryMask a(10, 10), b(10, 10);
  a.set(1, 1, 1);
  b.set(4, 5, 1);
  CHECK(hausdorff_distance(a, b) == Catch::Approx(5.0).epsilon(1e-15));
  CHECK(hausdorff_distance(a, a) == 0.0);

  // A square and the same square shifted by 2 columns: every boundary point
  // finds a partner within 2 and the extremes need exactly 2.
  BinaryMask s1 = rect_mask(10, 10, 2, 2, 6, 6);
  BinaryMask s2 = rect_mask(10, 10, 2, 4, 6, 8);
  CHECK(hausdorff_distance(s1, s2) == Catch::Approx(2.0).epsilon(1e-15));

  // Degenerate conventions.
  BinaryMask e1(6, 8), e2(6, 8);
  CHECK(hausdorff_distance(e1, e2) == 0.0);
  CHECK(hausdorff_distance(a, BinaryMask(10, 10)) ==
        Catch::Approx(std::sqrt(200.0)).epsilon(1e-15));
  CHECK(hausdorff_distance(BinaryMask(6, 8), rect_mask(6, 8, 0, 0, 2, 2)) ==
        Catch::Approx(10.0).epsilon(1e-15));

  CHECK_THROWS_AS(hausdorff_distance(a, e1), DimensionError);
}

TEST_CASE("hausdorff is symmetric and dominated by the directed extremes") {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    BinaryMask a = random_binary(rng, 16, 16, 0.3);
    BinaryMask b = random_binary(rng, 16, 16, 0.3);
    CHECK(hausdorff_distance(a, b) == hausdorff_distance(b, a));
  }
}

TEST_CASE("dice and hausdorff match brute-force oracles on random masks") {
  Rng rng(97);
  for (int trial = 0; trial < 60; ++trial) {
    // Mix of sparse, dense, and occasionally empty masks.
    const double fa = trial % 7 == 0 ? 0.0 : rng.uniform(0.05, 0.8);
    const double fb = trial % 11 == 0 ? 0.0 : rng.uniform(0.05, 0.8);
    BinaryMask a = random_binary(rng, 24, 24, fa);
    BinaryMask b = random_binary(rng, 24, 24, fb);
    CHECK(dice_coefficient(a, b) == oracles::brute_dice(a, b));
    CHECK(hausdorff_distance(a, b) == oracles::brute_hausdorff(a, b));
  }
  // A few full-size trials at the dimensions the training pipeline uses.
  for (int trial = 0; trial < 5; ++trial) {
    BinaryMask a = random_binary(rng, 64, 64, rng.uniform(0.1, 0.6));
    BinaryMask b = random_binary(rng, 64, 64, rng.uniform(0.1, 0.6));
    CHECK(dice_coefficient(a, b) == oracles::brute_dice(a, b));
    CHECK(hausdorff_distance(a, b) == oracles::brute_hausdorff(a, b));
  }
}

TEST_CASE("class_mask extracts one label as a binary mask") {
  MaskBatch batch(2, 2, 3);
  // Instance 0: labels 0 1 2 / 1 1 0. Instance 1: all 2.
  const std::uint8_t vals[] = {0, 1, 2, 1, 1, 0};
  for (int i = 0; i < 6; ++i) batch.labels[i] = vals[i];
  for (int i = 0; i < 6; ++i) batch.labels[6 + i] = 2;

  BinaryMask m1 = class_mask(batch, 0, 1);
  CHECK(m1.v == std::vector<std::uint8_t>({0, 1, 0, 1, 1, 0}));
  BinaryMask m2 = class_mask(batch, 1, 2);
  CHECK(m2.v == std::vector<std::uint8_t>({1, 1, 1, 1, 1, 1}));
  BinaryMask m0 = class_mask(batch, 1, 0);
  CHECK(m0.v == std::vector<std::uint8_t>({0, 0, 0, 0, 0, 0}));
}
