#include "shcnn/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "shcnn/error.hpp"

namespace shcnn {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::BadConfig, what); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) bad(key + ": not a number: '" + raw + "'");
  return v;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& raw) {
  std::vector<int> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, item));
  if (out.empty()) bad(key + ": empty list");
  return out;
}

Label parse_label(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  for (int i = 0; i < kNumLabels; ++i) {
    if (to_string(label_from_index(i)) == s) return label_from_index(i);
  }
  bad(key + ": expected flawless, anomaly or faulty, got '" + raw + "'");
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  bad(key + ": expected true or false, got '" + raw + "'");
}

// Looks keys up in a parsed tree and remembers which were read, so leftovers
// can be reported.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <class T>
  void num(const std::string& section, const std::string& key, T& dst) {
    if (const auto v = raw(section, key)) dst = parse_number<T>(section + "." + key, *v);
  }
  void text(const std::string& section, const std::string& key, std::string& dst) {
    if (const auto v = raw(section, key)) dst = trim(*v);
  }
  void flag(const std::string& section, const std::string& key, bool& dst) {
    if (const auto v = raw(section, key)) dst = parse_bool(section + "." + key, *v);
  }
  void label(const std::string& section, const std::string& key, Label& dst) {
    if (const auto v = raw(section, key)) dst = parse_label(section + "." + key, *v);
  }
  void ints(const std::string& section, const std::string& key, std::vector<int>& dst) {
    if (const auto v = raw(section, key)) dst = parse_int_list(section + "." + key, *v);
  }

  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty()) bad("key '" + section + "' outside any section");
      for (const auto& [key, value] : body) {
        if (!used_.count(section + "." + key)) bad("unknown key '" + key + "' in section [" + section + "]");
      }
    }
  }

 private:
  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    const auto s = tree_.get_child_optional(section);
    if (!s) return std::nullopt;
    const auto v = s->get_child_optional(key);
    if (!v) return std::nullopt;
    used_.insert(section + "." + key);
    return v->data();
  }

  const pt::ptree& tree_;
  std::set<std::string> used_;
};

void read_training(Reader& r, const std::string& s, nn::TrainConfig& t) {
  std::string opt;
  r.text(s, "optimizer", opt);
  if (opt == "adam") t.optimizer = nn::Optimizer::Adam;
  else if (opt == "sgd") t.optimizer = nn::Optimizer::Sgd;
  else if (!opt.empty()) bad(s + ".optimizer: expected adam or sgd, got '" + opt + "'");
  r.num(s, "learning_rate", t.learning_rate);
  r.num(s, "beta1", t.beta1);
  r.num(s, "beta2", t.beta2);
  r.num(s, "batch_size", t.batch_size);
  r.num(s, "epochs", t.epochs);
  r.num(s, "patience", t.patience);
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    layout.validate();
    network.validate();
    training.validate();
    benchmark.training.validate();
    benchmark.mlp_training.validate();
    AugmentationLevel{augmentation_level};
    for (const int l : benchmark.sh_levels) AugmentationLevel{l};
    stage_template(*this, TemplateLevel::Street).validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  if (n_wafers < 1) bad("dataset.n_wafers must be >= 1");
  if (patch_size % 8 != 0) bad("stages.patch_size must be a multiple of 8");
  if (benchmark.runs < 2) bad("benchmark.runs must be >= 2");
  if (benchmark.n_patches < 3 * kNumLabels) bad("benchmark.n_patches too small");
  if (benchmark.context < patch_size || benchmark.context % patch_size != 0)
    bad("benchmark.context must be a positive multiple of stages.patch_size");
  if (benchmark.mlp_hidden < 1) bad("benchmark.mlp_hidden must be >= 1");
  if (benchmark.rfc.n_trees < 1) bad("benchmark.rfc_trees must be >= 1");
  if (!(benchmark.svc_linear.C > 0.0) || !(benchmark.svc_rbf.C > 0.0)) bad("benchmark svc C must be > 0");
  if (output_dir.empty()) bad("experiment.output_dir must not be empty");
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    bad(std::string("malformed config: ") + e.what());
  }
  Reader r(tree);
  ExperimentConfig c;

  std::string out_dir = c.output_dir.string();
  r.num("experiment", "seed", c.seed);
  r.text("experiment", "output_dir", out_dir);
  c.output_dir = out_dir;

  WaferLayout& L = c.layout;
  r.num("layout", "image_width", L.image_width);
  r.num("layout", "image_height", L.image_height);
  r.num("layout", "wafer_radius_px", L.wafer_radius_px);
  r.num("layout", "chip_pitch_px", L.chip_pitch_px);
  r.num("layout", "street_width_px", L.street_width_px);
  r.num("layout", "cut_width_px", L.cut_width_px);
  r.num("layout", "chips_x", L.chips_x);
  r.num("layout", "chips_y", L.chips_y);
  r.num("layout", "origin_x", L.origin.x);
  r.num("layout", "origin_y", L.origin.y);
  r.num("layout", "cut_intensity", L.cut_intensity);
  r.num("layout", "street_intensity", L.street_intensity);
  r.num("layout", "chip_intensity", L.chip_intensity);
  r.num("layout", "background_intensity", L.background_intensity);
  r.num("layout", "noise_sigma", L.noise_sigma);

  DatasetOptions& D = c.dataset;
  r.num("dataset", "n_wafers", c.n_wafers);
  r.num("dataset", "mix_flawless", D.class_mix[0]);
  r.num("dataset", "mix_anomaly", D.class_mix[1]);
  r.num("dataset", "mix_faulty", D.class_mix[2]);
  r.num("dataset", "magnitude_min", D.magnitude_min);
  r.num("dataset", "magnitude_max", D.magnitude_max);
  r.label("dataset", "hole_class", D.class_map.label[0]);
  r.label("dataset", "broken_corner_class", D.class_map.label[1]);
  r.label("dataset", "misdirected_cut_class", D.class_map.label[2]);

  r.num("stages", "patch_size", c.patch_size);
  r.num("stages", "erosion_radius", c.erosion_radius);
  r.num("stages", "augmentation_level", c.augmentation_level);

  std::vector<int> widths(c.network.widths.begin(), c.network.widths.end());
  r.ints("network", "widths", widths);
  if (widths.size() != 3) bad("network.widths: expected three values");
  std::copy(widths.begin(), widths.end(), c.network.widths.begin());
  r.num("network", "dense_units", c.network.dense1_units);
  r.num("network", "conv_dropout", c.network.conv_dropout);
  r.num("network", "dense_dropout", c.network.dense_dropout);
  c.network.input_size = c.patch_size;

  read_training(r, "training", c.training);

  BenchmarkConfig& B = c.benchmark;
  B.training = c.training;
  r.num("benchmark", "n_patches", B.n_patches);
  r.num("benchmark", "runs", B.runs);
  r.num("benchmark", "context", B.context);
  r.ints("benchmark", "levels", B.sh_levels);
  r.num("benchmark", "rfc_trees", B.rfc.n_trees);
  r.num("benchmark", "rfc_max_features", B.rfc.max_features);
  r.num("benchmark", "rfc_min_leaf", B.rfc.min_leaf);
  r.flag("benchmark", "rfc_bootstrap", B.rfc.bootstrap);
  r.num("benchmark", "svc_c", B.svc_linear.C);
  B.svc_rbf.C = B.svc_linear.C;
  r.num("benchmark", "svc_gamma", B.svc_rbf.gamma);
  r.num("benchmark", "svc_tolerance", B.svc_linear.tolerance);
  B.svc_rbf.tolerance = B.svc_linear.tolerance;
  r.num("benchmark", "mlp_hidden", B.mlp_hidden);
  read_training(r, "benchmark_cnn", B.training);
  read_training(r, "benchmark_mlp", B.mlp_training);

  r.reject_unknown();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

BenchmarkConfig benchmark_config(const ExperimentConfig& cfg) {
  BenchmarkConfig b = cfg.benchmark;
  b.layout = cfg.layout;
  b.dataset = cfg.dataset;
  b.seed = cfg.seed;
  b.patch_size = cfg.patch_size;
  b.network = cfg.network;
  return b;
}

Template stage_template(const ExperimentConfig& cfg, TemplateLevel level) {
  Template t = Template::for_layout(cfg.layout, level, cfg.patch_size);
  t.erosion_radius = cfg.erosion_radius;
  return t;
}

}  // namespace shcnn
