#include "doctest.h"
#include "oracles.hpp"
#include "shcnn/augment.hpp"
#include "shcnn/error.hpp"

using namespace shcnn;

TEST_CASE("augment_one: counts and disabled level") {
  Rng rng(1);
  const auto img = oracle::random_gray(rng, 16, 16);
  CHECK(augment_one(img, AugmentationLevel(0), 5).empty());
  CHECK(augment_one(img, AugmentationLevel(4), 5).size() == 4);
  CHECK_THROWS_AS(AugmentationLevel(-1), Error);
}

TEST_CASE("apply_transform: identity parameters reproduce the input") {
  Rng rng(2);
  const auto img = oracle::random_gray(rng, 13, 9);
  CHECK(apply_transform(img, TransformParams{}) == img);
}

TEST_CASE("apply_transform: reflection and pure translation") {
  GrayImage img(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) img.at(x, y) = static_cast<std::uint8_t>(10 * y + x);
  TransformParams flip;
  flip.flip = true;
  const auto f = apply_transform(img, flip);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) CHECK(f.at(x, y) == img.at(x, 3 - y));

  TransformParams shift;
  shift.shift_x = 0.25;  // one pixel right
  const auto s = apply_transform(img, shift);
  for (int y = 0; y < 4; ++y) {
    CHECK(s.at(0, y) == img.at(0, y));  // edge replicated
    for (int x = 1; x < 4; ++x) CHECK(s.at(x, y) == img.at(x - 1, y));
  }

  TransformParams quarter;
  quarter.angle_deg = 90.0;
  const auto r = apply_transform(img, quarter);
  // Rotating by +90 degrees (y down) moves the source pixel (x, y) to (3 - y, x).
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) CHECK(r.at(3 - y, x) == img.at(x, y));
}

TEST_CASE("sample_augmentations: parameter ranges scale with the level") {
  for (int l : {0, 1, 2, 4}) {
    const AugmentationLevel level(l);
    int total = 0;
    for (std::uint64_t seed = 0; total < 1000 || l == 0; ++seed) {
      const auto ps = sample_augmentations(level, seed);
      CHECK(ps.size() == static_cast<std::size_t>(l));
      if (l == 0) break;
      for (const auto& p : ps) {
        CHECK(std::abs(p.angle_deg) <= 2.0 * l);
        CHECK(std::abs(p.shift_x) <= 0.05 * l);
        CHECK(std::abs(p.shift_y) <= 0.05 * l);
        CHECK(p.scale >= 1.0 - 0.02 * l);
        CHECK(p.scale <= 1.0 + 0.02 * l);
        ++total;
      }
    }
  }
}

TEST_CASE("augment_dataset: count law, label preservation, determinism") {
  Rng rng(3);
  std::vector<LabeledPatch> patches;
  for (int i = 0; i < 10; ++i) patches.push_back({oracle::random_gray(rng, 8, 8), i % 3});
  CHECK(augment_dataset(patches, AugmentationLevel(2), 9).size() == 30);
  const auto same = augment_dataset(patches, AugmentationLevel(0), 9);
  REQUIRE(same.size() == 10);
  for (int i = 0; i < 10; ++i) CHECK(same[i].image == patches[i].image);

  for (int l = 0; l <= 4; ++l) {
    const auto out = augment_dataset(patches, AugmentationLevel(l), 4);
    CHECK(out.size() == patches.size() * static_cast<std::size_t>(l + 1));
    for (std::size_t k = patches.size(); k < out.size(); ++k) {
      const std::size_t src = (k - patches.size()) / static_cast<std::size_t>(l);
      CHECK(out[k].label == patches[src].label);
    }
  }
  const auto a = augment_dataset(patches, AugmentationLevel(3), 11);
  const auto b = augment_dataset(patches, AugmentationLevel(3), 11);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].image == b[k].image);
}
