#include "shcnn/augment.hpp"

#include <algorithm>
#include <cmath>

#include "shcnn/error.hpp"
#include "shcnn/rng.hpp"

namespace shcnn {

AugmentationLevel::AugmentationLevel(int l) : l_(l) {
  if (l < 0) throw Error(ErrorCode::BadConfig, "augmentation level must be >= 0");
}

GrayImage apply_transform(const GrayImage& img, const TransformParams& p) {
  const int w = img.width();
  const int h = img.height();
  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;
  const double theta = p.angle_deg * M_PI / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double tx = p.shift_x * w;
  const double ty = p.shift_y * h;

  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Invert the forward chain R, T, S, F for the output pixel.
      double qx = x - cx;
      double qy = y - cy;
      if (p.flip) qy = -qy;
      qx = qx / p.scale - tx;
      qy = qy / p.scale - ty;
      const double sx = cs * qx + sn * qy + cx;
      const double sy = -sn * qx + cs * qy + cy;

      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const int x0 = static_cast<int>(fx);
      const int y0 = static_cast<int>(fy);
      const double ax = sx - fx;
      const double ay = sy - fy;
      const double v = (1 - ay) * ((1 - ax) * img.clamped(x0, y0) + ax * img.clamped(x0 + 1, y0)) +
                       ay * ((1 - ax) * img.clamped(x0, y0 + 1) + ax * img.clamped(x0 + 1, y0 + 1));
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

std::vector<TransformParams> sample_augmentations(AugmentationLevel level, std::uint64_t seed) {
  std::vector<TransformParams> out;
  out.reserve(static_cast<std::size_t>(level.value()));
  for (int k = 0; k < level.value(); ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    TransformParams p;
    const double a = level.max_angle_deg();
    const double s = level.max_shift_fraction();
    const double d = level.max_scale_delta();
    p.angle_deg = rng.uniform(-a, a);
    p.shift_x = rng.uniform(-s, s);
    p.shift_y = rng.uniform(-s, s);
    p.scale = rng.uniform(1.0 - d, 1.0 + d);
    p.flip = rng.bernoulli(0.5);
    out.push_back(p);
  }
  return out;
}

std::vector<GrayImage> augment_one(const GrayImage& img, AugmentationLevel level, std::uint64_t seed) {
  std::vector<GrayImage> out;
  for (const auto& p : sample_augmentations(level, seed)) out.push_back(apply_transform(img, p));
  return out;
}

std::vector<LabeledPatch> augment_dataset(const std::vector<LabeledPatch>& patches, AugmentationLevel level,
                                          std::uint64_t seed) {
  std::vector<LabeledPatch> out = patches;
  out.reserve(patches.size() * static_cast<std::size_t>(level.value() + 1));
  for (std::size_t i = 0; i < patches.size(); ++i) {
    for (auto& img : augment_one(patches[i].image, level, derive_seed(seed, i))) {
      out.push_back({std::move(img), patches[i].label});
    }
  }
  return out;
}

}  // namespace shcnn
