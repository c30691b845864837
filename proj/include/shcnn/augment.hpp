#pragma once

#include <cstdint>
#include <vector>

#include "shcnn/image.hpp"

namespace shcnn {

// Augmentation level l >= 0: l copies per original, each drawn from ranges
// that widen linearly with l. Level 0 disables augmentation.
class AugmentationLevel {
 public:
  constexpr AugmentationLevel() = default;
  explicit AugmentationLevel(int l);
  constexpr int value() const { return l_; }

  double max_angle_deg() const { return 2.0 * l_; }
  double max_shift_fraction() const { return 0.05 * l_; }
  double max_scale_delta() const { return 0.02 * l_; }

 private:
  int l_ = 0;
};

struct TransformParams {
  double angle_deg = 0.0;
  double shift_x = 0.0;  // fraction of the image width
  double shift_y = 0.0;  // fraction of the image height
  double scale = 1.0;
  bool flip = false;  // reflection across the horizontal (x) axis
};

// Rotation, then translation, then scaling, then reflection, all about the
// image center; bilinear sampling with edge replication.
GrayImage apply_transform(const GrayImage& img, const TransformParams& p);

// Parameters of the `level.value()` copies generated for one image;
// copy k draws from Rng(derive_seed(seed, k)).
std::vector<TransformParams> sample_augmentations(AugmentationLevel level, std::uint64_t seed);

std::vector<GrayImage> augment_one(const GrayImage& img, AugmentationLevel level, std::uint64_t seed);

struct LabeledPatch {
  GrayImage image;
  int label = 0;
};

// Originals first (in order), then the copies of item i (seeded by
// derive_seed(seed, i)) in item order. |out| = |patches| * (l + 1).
std::vector<LabeledPatch> augment_dataset(const std::vector<LabeledPatch>& patches, AugmentationLevel level,
                                          std::uint64_t seed);

}  // namespace shcnn
