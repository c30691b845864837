#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shcnn/grid.hpp"
#include "shcnn/image.hpp"
#include "shcnn/imgproc.hpp"

namespace shcnn {

// Geometry and gray levels of a synthetic wafer. Chip (i, j) occupies the
// pitch x pitch cell whose center pixel is origin + (i, j) * pitch; the cell
// spans [center - pitch/2, center + pitch/2 - 1] on each axis. Streets are
// street_width wide and centered on cell boundaries, so half of each street
// lies in each neighbouring cell.
struct WaferLayout {
  int image_width = 832;
  int image_height = 832;
  int wafer_radius_px = 400;
  int chip_pitch_px = 32;
  int street_width_px = 8;
  int cut_width_px = 2;
  int chips_x = 24;
  int chips_y = 24;
  int cut_intensity = 30;
  int street_intensity = 90;
  int chip_intensity = 180;
  int background_intensity = 220;
  PixelPoint origin{416, 416};
  double noise_sigma = 4.0;

  // Throws InvalidLayout.
  void validate() const;

  int min_i() const { return -(chips_x - 1) / 2; }
  int max_i() const { return min_i() + chips_x - 1; }
  int min_j() const { return -(chips_y - 1) / 2; }
  int max_j() const { return min_j() + chips_y - 1; }

  PixelPoint chip_center(int i, int j) const {
    return {origin.x + i * chip_pitch_px, origin.y + j * chip_pitch_px};
  }
  // Top-left pixel of the chip cell.
  PixelPoint cell_origin(int i, int j) const {
    const auto c = chip_center(i, j);
    return {c.x - chip_pitch_px / 2, c.y - chip_pitch_px / 2};
  }

  bool has_chip(GridAddress a) const;
  bool has_street(GridAddress a) const;

  // Raster order (row by row).
  std::vector<GridAddress> chips() const;
  std::vector<GridAddress> streets() const;

  // Continuous centerline coordinate of a street (pixel-center convention):
  // x for streets with half-integer x, y otherwise.
  double street_centerline(GridAddress street) const;
};

enum class DefectKind : std::uint8_t { Hole = 0, BrokenCorner = 1, MisdirectedCut = 2 };
inline constexpr int kNumDefectKinds = 3;

std::string_view to_string(DefectKind k);

struct DefectSpec {
  DefectKind kind = DefectKind::Hole;
  GridAddress street;
  double magnitude = 0.5;  // in (0, 1]
  std::uint64_t rng_seed = 0;
};

// Subclass -> class mapping; indexed by DefectKind.
struct DefectClassMap {
  std::array<Label, kNumDefectKinds> label{Label::Anomaly, Label::Faulty, Label::Faulty};
  Label operator()(DefectKind k) const { return label[static_cast<std::size_t>(k)]; }
};

struct GroundTruth {
  StreetLabels street_labels;
  ChipLabels chip_labels;
  ChipPositions chip_positions;
};

struct WaferSample {
  GrayImage image;
  GroundTruth truth;
};

// Renders a wafer with the given defects. Pure in (layout, defects, seed).
// Throws InvalidLayout, DefectOutOfGrid.
WaferSample generate_wafer(const WaferLayout& layout, const std::vector<DefectSpec>& defects, std::uint64_t seed,
                           const DefectClassMap& class_map = {});

// Streets that border at least one Inside chip; these are the labelled ones.
std::vector<GridAddress> labelled_streets(const WaferLayout& layout);

struct DatasetOptions {
  std::array<double, kNumLabels> class_mix{1.0 / 3, 1.0 / 3, 1.0 / 3};
  double magnitude_min = 0.3;
  double magnitude_max = 1.0;
  DefectClassMap class_map;
};

// In-memory variant of generate_dataset; wafer k uses derive_seed(seed, k).
// Throws BadMix.
std::vector<WaferSample> synthesize_wafers(const WaferLayout& layout, const DatasetOptions& opts, int n_wafers,
                                           std::uint64_t seed);

struct ManifestRow {
  std::string path;
  bool is_chip = false;
  GridAddress address;
  std::optional<Label> label;  // absent for Outside chips
  ChipPosition position = ChipPosition::Inside;
};

// Writes wafer_NNNN.pgm images plus manifest.csv into `dir` and returns the
// manifest rows. Throws BadMix, IoFailure.
std::vector<ManifestRow> generate_dataset(const WaferLayout& layout, const DatasetOptions& opts, int n_wafers,
                                          std::uint64_t seed, const std::filesystem::path& dir);

std::string format_manifest(const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> parse_manifest(const std::string& text);

// Images and ground truth of a directory written by generate_dataset, in
// manifest order. Throws IoFailure.
std::vector<WaferSample> load_dataset(const std::filesystem::path& dir);

}  // namespace shcnn
