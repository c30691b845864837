#include <vector>

#include "doctest.h"
#include "mapping_oracle.hpp"
#include "shcnn/error.hpp"
#include "shcnn/pipeline.hpp"
#include "test_util.hpp"

using namespace shcnn;

TEST_CASE("map_streets_to_chips: examples") {
  const std::vector<GridAddress> chip{GridAddress::chip(0, 0)};
  auto f = oracle::around_origin({0, 0, 0, 0});
  CHECK(map_streets_to_chips(f, chip).at(chip[0]) == Label::Flawless);
  auto a = oracle::around_origin({0, 0, 1, 0});
  CHECK(map_streets_to_chips(a, chip).at(chip[0]) == Label::Anomaly);
  auto x = oracle::around_origin({1, 2, 0, 0});
  CHECK(map_streets_to_chips(x, chip).at(chip[0]) == Label::Faulty);
  CHECK_THROWS_WITH_AS(map_streets_to_chips({}, chip), doctest::Contains("MissingAdjacency"), Error);
  StreetLabels partial{{GridAddress{1, 0}, Label::Anomaly}};
  CHECK(map_streets_to_chips(partial, chip).at(chip[0]) == Label::Anomaly);
}

TEST_CASE("map_streets_to_chips: exhaustive 81 combinations and monotonicity") {
  const std::vector<GridAddress> chip{GridAddress::chip(0, 0)};
  int checked = 0;
  oracle::for_each_combination([&](const std::array<int, 4>& l) {
    const int got = to_index(map_streets_to_chips(oracle::around_origin(l), chip).at(chip[0]));
    CHECK(got == oracle::max_severity(l));
    for (int k = 0; k < 4; ++k) {
      for (int up = l[k] + 1; up < 3; ++up) {
        auto u = l;
        u[k] = up;
        CHECK(to_index(map_streets_to_chips(oracle::around_origin(u), chip).at(chip[0])) >= got);
      }
    }
    ++checked;
  });
  CHECK(checked == 81);
}

TEST_CASE("canonical street patch transposes horizontal streets") {
  StreetROI roi;
  roi.patch = GrayImage(3, 2, 0);
  roi.patch.at(2, 0) = 9;
  roi.orientation = Orientation::Horizontal;
  const auto c = canonical_street_patch(roi);
  CHECK(c.width() == 2);
  CHECK(c.height() == 3);
  CHECK(c.at(0, 2) == 9);
  roi.orientation = Orientation::Vertical;
  CHECK(canonical_street_patch(roi) == roi.patch);
}

TEST_CASE("street stage patches carry ground-truth labels in canonical form") {
  const auto layout = testutil::small_layout();
  const auto w = generate_wafer(layout, {{DefectKind::MisdirectedCut, GridAddress::street_x(0, 0), 1.0, 3}}, 4);
  const auto tmpl = Template::for_layout(layout, TemplateLevel::Street, 32);
  const auto ps = street_stage_patches(w, layout, tmpl);
  int faulty = 0;
  for (const auto& p : ps) {
    CHECK(p.patch.width() == 32);
    CHECK(p.label == w.truth.street_labels.at(p.street));
    faulty += p.label == Label::Faulty;
  }
  CHECK(faulty == 2);  // the defective street is seen from both of its chips
}

TEST_CASE("stages: untrained model, empty inputs, stage identity") {
  const auto layout = testutil::small_layout();
  const auto w = generate_wafer(layout, {}, 1);
  StageConfig chip;
  chip.tmpl = Template::for_layout(layout, TemplateLevel::Chip, 32);
  CHECK_THROWS_WITH_AS(run_chip_stage(w.image, layout, chip), doctest::Contains("UntrainedModel"), Error);
  StageConfig street;
  street.tmpl = Template::for_layout(layout, TemplateLevel::Street, 32);
  CHECK(run_street_stage(w.image, layout, {}, street).empty());
  const std::vector<StageConfig> stages{chip, street};
  CHECK_THROWS_WITH_AS(run_shcnn(w.image, layout, stages), doctest::Contains("stage 0 (chip)"), Error);

  // single-class chip data: every chip Inside under a huge radius
  auto big = layout;
  big.wafer_radius_px = 10000;
  const auto inside = generate_wafer(big, {}, 2);
  std::vector<WaferSample> one{inside};
  chip.training.epochs = 1;
  CHECK_THROWS_WITH_AS(train_chip_stage(chip, one, {}, big), doctest::Contains("EmptyClass"), Error);
}

TEST_CASE("verdict csv and json") {
  WaferVerdict v;
  v.chip_positions[GridAddress::chip(0, 0)] = ChipPosition::Inside;
  v.chip_positions[GridAddress::chip(1, 0)] = ChipPosition::Outside;
  v.street_labels = oracle::around_origin({0, 1, 0, 2});
  v.chip_labels[GridAddress::chip(0, 0)] = Label::Faulty;
  const auto csv = format_verdict_csv(v);
  CHECK(format_verdict_csv(parse_verdict_csv(csv)) == csv);
  const auto json = format_verdict_json(v);
  CHECK(json.find("\"faulty\": 1") != std::string::npos);
  CHECK(json.find("\"inside_chips\": 1") != std::string::npos);
  CHECK(json.find("\"outside_chips\": 1") != std::string::npos);
}
