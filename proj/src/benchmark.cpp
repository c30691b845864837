#include "shcnn/benchmark.hpp"

#include <array>

#include "shcnn/augment.hpp"
#include "shcnn/error.hpp"
#include "shcnn/nn/network.hpp"

namespace shcnn {

GrayImage downsample(const GrayImage& img, int factor) {
  if (factor < 1 || img.width() % factor != 0 || img.height() % factor != 0)
    throw Error(ErrorCode::ShapeMismatch, "image size not divisible by the downsampling factor");
  GrayImage out(img.width() / factor, img.height() / factor);
  const int area = factor * factor;
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      int s = 0;
      for (int dy = 0; dy < factor; ++dy)
        for (int dx = 0; dx < factor; ++dx) s += img.at(x * factor + dx, y * factor + dy);
      out.at(x, y) = static_cast<std::uint8_t>((s + area / 2) / area);
    }
  }
  return out;
}

namespace {

constexpr int kMaxWafers = 2000;

// Pixel position of a street's midpoint between its two chips.
Point2d nominal_center(const WaferLayout& L, GridAddress s) {
  if (s.x_is_half()) {
    const auto c = L.chip_center((s.twice_x - 1) / 2, s.chip_j());
    return {L.street_centerline(s), static_cast<double>(c.y)};
  }
  const auto c = L.chip_center(s.chip_i(), (s.twice_y - 1) / 2);
  return {static_cast<double>(c.x), L.street_centerline(s)};
}

// The Inside chip a street is localized from: the lower-index neighbour when
// both qualify.
std::optional<GridAddress> anchor_chip(const WaferSample& w, GridAddress s) {
  const GridAddress a = s.x_is_half() ? GridAddress{s.twice_x - 1, s.twice_y} : GridAddress{s.twice_x, s.twice_y - 1};
  const GridAddress b = s.x_is_half() ? GridAddress{s.twice_x + 1, s.twice_y} : GridAddress{s.twice_x, s.twice_y + 1};
  for (const auto& c : {a, b}) {
    const auto it = w.truth.chip_positions.find(c);
    if (it != w.truth.chip_positions.end() && it->second == ChipPosition::Inside) return c;
  }
  return std::nullopt;
}

std::vector<LabeledPatch> pick(const std::vector<StreetSample>& all, const std::vector<std::size_t>& idx, bool localized) {
  std::vector<LabeledPatch> out;
  out.reserve(idx.size());
  for (const auto i : idx) out.push_back({localized ? all[i].localized : all[i].unlocalized, all[i].label});
  return out;
}

std::vector<nn::Example> examples(const std::vector<LabeledPatch>& ps) {
  std::vector<nn::Example> out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back({nn::Tensor::from_image(p.image), p.label});
  return out;
}

std::vector<int> labels_of(const std::vector<LabeledPatch>& ps) {
  std::vector<int> out;
  for (const auto& p : ps) out.push_back(p.label);
  return out;
}

double cnn_accuracy(const BenchmarkConfig& cfg, std::uint64_t seed, const std::vector<LabeledPatch>& train,
                    const std::vector<LabeledPatch>& val, const std::vector<LabeledPatch>& test, int level) {
  const auto augmented = augment_dataset(train, AugmentationLevel(level), derive_seed(seed, 10));
  nn::NetworkConfig nc = cfg.network;
  nc.input_size = cfg.patch_size;
  nc.n_classes = kNumLabels;
  nn::Network net = nn::build_cnn(nc, derive_seed(seed, 11));
  nn::TrainConfig tc = cfg.training;
  tc.seed = derive_seed(seed, 12);
  nn::train(net, examples(augmented), examples(val), tc);
  std::vector<int> pred;
  for (const auto& p : test) pred.push_back(nn::predict(net, nn::Tensor::from_image(p.image)).label);
  return accuracy(pred, labels_of(test));
}

}  // namespace

std::vector<StreetSample> build_street_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.n_patches < kNumLabels) throw Error(ErrorCode::TooFew, "benchmark needs at least one patch per class");
  if (cfg.context % cfg.patch_size != 0) throw Error(ErrorCode::BadConfig, "context must be a multiple of patch_size");
  const WaferLayout& L = cfg.layout;
  const Template tmpl = Template::for_layout(L, TemplateLevel::Street, cfg.patch_size);
  const int quota = cfg.n_patches / kNumLabels;
  std::array<int, kNumLabels> have{};
  std::vector<StreetSample> out;
  const int jitter = L.chip_pitch_px / 4;

  for (int k = 0; k < kMaxWafers; ++k) {
    const std::uint64_t wseed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
    const WaferSample w = synthesize_wafers(L, cfg.dataset, 1, wseed).front();
    Rng rng(derive_seed(wseed, 0xC0));
    for (const auto& [s, label] : w.truth.street_labels) {
      const int c = to_index(label);
      const int dx = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * jitter + 1))) - jitter;
      const int dy = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * jitter + 1))) - jitter;
      if (have[static_cast<std::size_t>(c)] >= quota) continue;
      const auto chip = anchor_chip(w, s);
      if (!chip) continue;
      const PixelPoint o = L.cell_origin(chip->chip_i(), chip->chip_j());
      const ChipPatch cp{*chip, o, w.image.crop(o.x, o.y, L.chip_pitch_px, L.chip_pitch_px)};
      std::vector<StreetROI> rois;
      try {
        rois = locate_streets(w.image, cp, tmpl);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NoContour || e.code() == ErrorCode::DegenerateContour) continue;
        throw;
      }
      for (const auto& roi : rois) {
        if (roi.grid_index != s) continue;
        const Point2d nc = nominal_center(L, s);
        StreetSample sample;
        sample.localized = roi.orientation == Orientation::Horizontal ? roi.patch.transposed() : roi.patch;
        sample.unlocalized =
            downsample(crop_centered(w.image, {nc.x + dx, nc.y + dy}, cfg.context), cfg.context / cfg.patch_size);
        sample.label = c;
        sample.wafer = k;
        sample.street = s;
        out.push_back(std::move(sample));
        ++have[static_cast<std::size_t>(c)];
      }
    }
    bool done = true;
    for (const int h : have) done = done && h >= quota;
    if (done) return out;
  }
  throw Error(ErrorCode::TooFew, "wafer budget exhausted before every class quota was filled");
}

std::vector<ResultRow> run_benchmark(const BenchmarkConfig& cfg, const ProgressFn& progress) {
  if (cfg.runs < 2) throw Error(ErrorCode::TooFew, "benchmark needs at least two runs");
  auto say = [&](const std::string& m) {
    if (progress) progress(m);
  };
  const auto samples = build_street_benchmark(cfg);
  say("benchmark: " + std::to_string(samples.size()) + " street patches");

  const std::array<const char*, 5> base_names{"RFC", "SVC-linear", "SVC-RBF", "MLP", "CNN"};
  std::vector<std::vector<double>> base_acc(base_names.size());
  std::vector<std::vector<double>> sh_acc(cfg.sh_levels.size());

  for (int r = 0; r < cfg.runs; ++r) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
    const Split split = split_dataset(samples.size(), seed);
    std::vector<int> train_labels;
    for (const auto i : split.train) train_labels.push_back(samples[i].label);
    std::vector<std::size_t> train_idx;
    for (const auto k : balance_classes(train_labels, derive_seed(seed, 1))) train_idx.push_back(split.train[k]);

    const auto tr_u = pick(samples, train_idx, false), va_u = pick(samples, split.validation, false),
               te_u = pick(samples, split.test, false);
    const auto X_tr = make_features(tr_u), X_va = make_features(va_u), X_te = make_features(te_u);

    RfcConfig rfc = cfg.rfc;
    rfc.seed = derive_seed(seed, 2);
    base_acc[0].push_back(accuracy(train_rfc(X_tr, rfc).predict(X_te), X_te.labels));
    base_acc[1].push_back(accuracy(train_svc(X_tr, cfg.svc_linear).predict(X_te), X_te.labels));
    base_acc[2].push_back(accuracy(train_svc(X_tr, cfg.svc_rbf).predict(X_te), X_te.labels));
    nn::TrainConfig mt = cfg.mlp_training;
    mt.seed = derive_seed(seed, 3);
    auto mlp = train_mlp(X_tr, cfg.mlp_hidden, mt, &X_va);
    base_acc[3].push_back(accuracy(mlp.predict(X_te), X_te.labels));
    base_acc[4].push_back(cnn_accuracy(cfg, derive_seed(seed, 4), tr_u, va_u, te_u, 0));
    say("run " + std::to_string(r) + ": baselines done");

    const auto tr_l = pick(samples, train_idx, true), va_l = pick(samples, split.validation, true),
               te_l = pick(samples, split.test, true);
    for (std::size_t k = 0; k < cfg.sh_levels.size(); ++k) {
      sh_acc[k].push_back(cnn_accuracy(cfg, derive_seed(seed, 5), tr_l, va_l, te_l, cfg.sh_levels[k]));
      say("run " + std::to_string(r) + ": SH-CNN " + std::to_string(cfg.sh_levels[k]) + "x done");
    }
  }

  std::vector<ResultRow> rows;
  for (std::size_t m = 0; m < base_names.size(); ++m) rows.push_back({base_names[m], 0, run_stats(base_acc[m])});
  for (std::size_t k = 0; k < cfg.sh_levels.size(); ++k) rows.push_back({"SH-CNN", cfg.sh_levels[k], run_stats(sh_acc[k])});
  return rows;
}

}  // namespace shcnn
