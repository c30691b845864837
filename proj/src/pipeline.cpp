#include "shcnn/pipeline.hpp"

#include <array>
#include <json.hpp>
#include <sstream>

#include "shcnn/error.hpp"
#include "shcnn/eval.hpp"

namespace shcnn {

int chip_position_class(ChipPosition p) { return p == ChipPosition::Inside ? 0 : 1; }

ChipPosition chip_position_from_class(int c) { return c == 0 ? ChipPosition::Inside : ChipPosition::Outside; }

std::vector<LabeledPatch> chip_stage_patches(const WaferSample& sample, const WaferLayout& layout) {
  std::vector<LabeledPatch> out;
  for (auto& cp : segment_chips(sample.image, layout)) {
    const auto it = sample.truth.chip_positions.find(cp.grid_index);
    const ChipPosition pos = it != sample.truth.chip_positions.end() ? it->second
                                                                   : chip_position_truth(cp.grid_index, layout);
    out.push_back({std::move(cp.patch), chip_position_class(pos)});
  }
  return out;
}

GrayImage canonical_street_patch(const StreetROI& roi) {
  return roi.orientation == Orientation::Horizontal ? roi.patch.transposed() : roi.patch;
}

std::vector<StreetPatch> street_stage_patches(const WaferSample& sample, const WaferLayout& layout,
                                              const Template& tmpl) {
  std::vector<StreetPatch> out;
  const auto chips = segment_chips(sample.image, layout);
  for (const auto& cp : chips) {
    const auto pos = sample.truth.chip_positions.find(cp.grid_index);
    if (pos == sample.truth.chip_positions.end() || pos->second != ChipPosition::Inside) continue;
    std::vector<StreetROI> rois;
    try {
      rois = locate_streets(sample.image, cp, tmpl);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NoContour || e.code() == ErrorCode::DegenerateContour) continue;
      throw;
    }
    for (const auto& roi : rois) {
      const auto lab = sample.truth.street_labels.find(roi.grid_index);
      if (lab == sample.truth.street_labels.end()) continue;
      out.push_back({roi.grid_index, cp.grid_index, canonical_street_patch(roi), lab->second});
    }
  }
  return out;
}

namespace {

std::vector<nn::Example> to_examples(std::span<const LabeledPatch> patches) {
  std::vector<nn::Example> out;
  out.reserve(patches.size());
  for (const auto& p : patches) out.push_back({nn::Tensor::from_image(p.image), p.label});
  return out;
}

const nn::Network& require_model(const StageConfig& cfg) {
  if (!cfg.model) throw Error(ErrorCode::UntrainedModel, "stage has no trained model");
  return *cfg.model;
}

}  // namespace

nn::TrainResult train_stage(StageConfig& cfg, std::span<const LabeledPatch> train_set,
                            std::span<const LabeledPatch> val_set, int n_classes) {
  if (train_set.empty()) throw Error(ErrorCode::EmptyClass, "no training patches");
  std::vector<int> labels;
  for (const auto& p : train_set) labels.push_back(p.label);
  std::vector<LabeledPatch> balanced;
  for (const auto i : balance_classes(labels, derive_seed(cfg.training.seed, 1))) balanced.push_back(train_set[i]);
  const auto augmented = augment_dataset(balanced, cfg.augmentation, derive_seed(cfg.training.seed, 2));

  nn::NetworkConfig net_cfg = cfg.network;
  net_cfg.input_size = train_set.front().image.width();
  net_cfg.n_classes = n_classes;
  nn::Network net = nn::build_cnn(net_cfg, derive_seed(cfg.training.seed, 3));
  const auto train_ex = to_examples(augmented);
  const auto val_ex = to_examples(val_set);
  auto result = nn::train(net, train_ex, val_ex, cfg.training);
  cfg.model = std::make_shared<const nn::Network>(std::move(net));
  return result;
}

nn::TrainResult train_chip_stage(StageConfig& cfg, std::span<const WaferSample> train_wafers,
                                 std::span<const WaferSample> val_wafers, const WaferLayout& layout) {
  std::vector<LabeledPatch> tr, va;
  for (const auto& w : train_wafers) {
    auto p = chip_stage_patches(w, layout);
    tr.insert(tr.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  }
  for (const auto& w : val_wafers) {
    auto p = chip_stage_patches(w, layout);
    va.insert(va.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  }
  return train_stage(cfg, tr, va, 2);
}

nn::TrainResult train_street_stage(StageConfig& cfg, std::span<const WaferSample> train_wafers,
                                   std::span<const WaferSample> val_wafers, const WaferLayout& layout) {
  auto collect = [&](std::span<const WaferSample> wafers) {
    std::vector<LabeledPatch> out;
    for (const auto& w : wafers) {
      for (auto& sp : street_stage_patches(w, layout, cfg.tmpl)) out.push_back({std::move(sp.patch), to_index(sp.label)});
    }
    return out;
  };
  const auto tr = collect(train_wafers);
  const auto va = collect(val_wafers);
  return train_stage(cfg, tr, va, kNumLabels);
}

ChipPositions run_chip_stage(const GrayImage& wafer, const WaferLayout& layout, const StageConfig& cfg) {
  nn::Network net = require_model(cfg);
  ChipPositions out;
  for (const auto& cp : segment_chips(wafer, layout)) {
    out.emplace(cp.grid_index, chip_position_from_class(nn::predict(net, nn::Tensor::from_image(cp.patch)).label));
  }
  return out;
}

StreetLabels run_street_stage(const GrayImage& wafer, const WaferLayout& layout,
                              std::span<const GridAddress> inside_chips, const StageConfig& cfg) {
  if (inside_chips.empty()) return {};
  nn::Network net = require_model(cfg);
  StreetLabels out;
  auto merge = [&](GridAddress s, Label l) {
    const auto [it, inserted] = out.emplace(s, l);
    if (!inserted) it->second = worse(it->second, l);
  };
  for (const auto& chip : inside_chips) {
    const PixelPoint o = layout.cell_origin(chip.chip_i(), chip.chip_j());
    ChipPatch cp{chip, o, wafer.crop(o.x, o.y, layout.chip_pitch_px, layout.chip_pitch_px)};
    std::vector<StreetROI> rois;
    try {
      rois = locate_streets(wafer, cp, cfg.tmpl);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoContour && e.code() != ErrorCode::DegenerateContour) throw;
      for (const auto& s : adjacent_streets(chip)) merge(s, Label::Anomaly);
      continue;
    }
    for (const auto& roi : rois) {
      const auto pred = nn::predict(net, nn::Tensor::from_image(canonical_street_patch(roi)));
      merge(roi.grid_index, label_from_index(pred.label));
    }
  }
  return out;
}

WaferVerdict run_shcnn(const GrayImage& wafer, const WaferLayout& layout, std::span<const StageConfig> stages) {
  if (stages.empty()) throw Error(ErrorCode::BadConfig, "no stages configured");
  WaferVerdict v;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const auto& st = stages[k];
    const std::string where = "stage " + std::to_string(k) + (st.tmpl.level == TemplateLevel::Chip ? " (chip)" : " (street)");
    try {
      if ((k == 0) != (st.tmpl.level == TemplateLevel::Chip))
        throw Error(ErrorCode::BadConfig, "the first stage must be the only chip-level stage");
      if (k == 0) {
        v.chip_positions = run_chip_stage(wafer, layout, st);
        continue;
      }
      std::vector<GridAddress> inside;
      for (const auto& [a, p] : v.chip_positions) {
        if (p == ChipPosition::Inside) inside.push_back(a);
      }
      for (const auto& [s, l] : run_street_stage(wafer, layout, inside, st)) {
        const auto [it, inserted] = v.street_labels.emplace(s, l);
        if (!inserted) it->second = worse(it->second, l);
      }
    } catch (const Error& e) {
      throw e.with_context(where);
    }
  }
  if (stages.size() > 1) {
    std::vector<GridAddress> inside;
    for (const auto& [a, p] : v.chip_positions) {
      if (p == ChipPosition::Inside) inside.push_back(a);
    }
    try {
      v.chip_labels = map_streets_to_chips(v.street_labels, inside);
    } catch (const Error& e) {
      throw e.with_context("mapping");
    }
  }
  return v;
}

std::string format_verdict_csv(const WaferVerdict& v) {
  std::ostringstream os;
  os << "kind,x,y,label\n";
  for (const auto& [a, l] : v.street_labels)
    os << "street," << format_half(a.twice_x) << ',' << format_half(a.twice_y) << ',' << to_index(l) << '\n';
  for (const auto& [a, l] : v.chip_labels)
    os << "chip," << format_half(a.twice_x) << ',' << format_half(a.twice_y) << ',' << to_index(l) << '\n';
  return os.str();
}

WaferVerdict parse_verdict_csv(const std::string& text) {
  WaferVerdict v;
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "kind,x,y,label") throw Error(ErrorCode::BadConfig, "missing verdict header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::array<std::string, 4> f;
    std::istringstream ls(line);
    for (auto& field : f) {
      if (!std::getline(ls, field, ',')) throw Error(ErrorCode::BadConfig, "short verdict row: " + line);
    }
    const GridAddress a{parse_half(f[1]), parse_half(f[2])};
    const Label l = label_from_index(std::stoi(f[3]));
    if (f[0] == "street" && a.is_street()) {
      v.street_labels.emplace(a, l);
    } else if (f[0] == "chip" && a.is_chip()) {
      v.chip_labels.emplace(a, l);
      v.chip_positions.emplace(a, ChipPosition::Inside);
    } else {
      throw Error(ErrorCode::BadConfig, "bad verdict row: " + line);
    }
  }
  return v;
}

std::string format_verdict_json(const WaferVerdict& v) {
  auto counts = [](const std::map<GridAddress, Label>& m) {
    nlohmann::ordered_json j;
    for (int c = 0; c < kNumLabels; ++c) j[std::string(to_string(label_from_index(c)))] = 0;
    for (const auto& [a, l] : m) j[std::string(to_string(l))] = j[std::string(to_string(l))].get<int>() + 1;
    return j;
  };
  int inside = 0, outside = 0;
  for (const auto& [a, p] : v.chip_positions) (p == ChipPosition::Inside ? inside : outside)++;
  nlohmann::ordered_json j;
  j["streets"] = counts(v.street_labels);
  j["chips"] = counts(v.chip_labels);
  j["inside_chips"] = inside;
  j["outside_chips"] = outside;
  return j.dump(2) + "\n";
}

}  // namespace shcnn
