#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "shcnn/augment.hpp"
#include "shcnn/chip_mapping.hpp"
#include "shcnn/localization.hpp"
#include "shcnn/nn/train.hpp"
#include "shcnn/synthwafer.hpp"

namespace shcnn {

// S1 routing: Train sends localized patches through augmentation into
// training, Infer sends them straight to the classifier.
enum class StageMode { Train, Infer };

struct StageConfig {
  Template tmpl;
  AugmentationLevel augmentation;
  nn::NetworkConfig network;  // input_size and n_classes are set from the stage
  nn::TrainConfig training;
  StageMode mode = StageMode::Infer;
  std::shared_ptr<const nn::Network> model;
};

// Chip classes: Inside = 0, Outside = 1.
int chip_position_class(ChipPosition p);
ChipPosition chip_position_from_class(int c);

// Every chip cell of a wafer labelled with its true position.
std::vector<LabeledPatch> chip_stage_patches(const WaferSample& sample, const WaferLayout& layout);

// Street ROI in canonical orientation: horizontal streets are transposed so
// every street runs vertically through the patch.
GrayImage canonical_street_patch(const StreetROI& roi);

struct StreetPatch {
  GridAddress street;
  GridAddress chip;  // the chip the ROI was localized from
  GrayImage patch;  // canonical orientation
  Label label = Label::Flawless;
};

// Localized ROIs of every labelled street around the true Inside chips; a
// shared street yields one ROI from each side. Chips whose localization fails
// are skipped.
std::vector<StreetPatch> street_stage_patches(const WaferSample& sample, const WaferLayout& layout,
                                              const Template& tmpl);

// S1 = Train: balances the training classes, augments them at the stage's
// level, trains a fresh CNN and stores it in cfg.model. Throws EmptyClass.
nn::TrainResult train_stage(StageConfig& cfg, std::span<const LabeledPatch> train_set,
                            std::span<const LabeledPatch> val_set, int n_classes);

nn::TrainResult train_chip_stage(StageConfig& cfg, std::span<const WaferSample> train_wafers,
                                 std::span<const WaferSample> val_wafers, const WaferLayout& layout);
nn::TrainResult train_street_stage(StageConfig& cfg, std::span<const WaferSample> train_wafers,
                                   std::span<const WaferSample> val_wafers, const WaferLayout& layout);

// Chip positions predicted by the chip CNN. Throws LayoutMismatch, UntrainedModel.
ChipPositions run_chip_stage(const GrayImage& wafer, const WaferLayout& layout, const StageConfig& cfg);

// Street labels around the given Inside chips. A street seen from two chips
// keeps the worse verdict; a chip whose localization fails marks its four
// streets Anomaly. Throws UntrainedModel.
StreetLabels run_street_stage(const GrayImage& wafer, const WaferLayout& layout,
                              std::span<const GridAddress> inside_chips, const StageConfig& cfg);

struct WaferVerdict {
  StreetLabels street_labels;
  ChipLabels chip_labels;  // Inside chips only
  ChipPositions chip_positions;
};

// Chip stage first, then every street stage; street verdicts of several
// stages merge by severity. With only a chip stage the verdict holds
// positions only. Errors carry the failing stage's index and level.
WaferVerdict run_shcnn(const GrayImage& wafer, const WaferLayout& layout, std::span<const StageConfig> stages);

// `kind,x,y,label` rows: streets then Inside chips.
std::string format_verdict_csv(const WaferVerdict& v);
WaferVerdict parse_verdict_csv(const std::string& text);
// Per-class counts of streets and chips plus Inside/Outside totals.
std::string format_verdict_json(const WaferVerdict& v);

}  // namespace shcnn
