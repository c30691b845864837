#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "shcnn/benchmark.hpp"
#include "shcnn/config.hpp"
#include "shcnn/error.hpp"
#include "shcnn/eval.hpp"
#include "shcnn/nn/network.hpp"
#include "shcnn/pipeline.hpp"
#include "shcnn/rng.hpp"
#include "shcnn/synthwafer.hpp"
#include "shcnn/wafermap.hpp"

namespace fs = std::filesystem;
using namespace shcnn;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Runs one step; errors leave tagged with the step name.
template <class F>
auto step(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.with_context(name);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::IoFailure, name + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

void log(const std::string& msg) { std::cerr << msg << '\n'; }

StageConfig stage_config(const ExperimentConfig& cfg, TemplateLevel level, StageMode mode) {
  StageConfig s;
  s.tmpl = stage_template(cfg, level);
  s.augmentation = AugmentationLevel(cfg.augmentation_level);
  s.network = cfg.network;
  s.training = cfg.training;
  s.training.seed = derive_seed(cfg.seed, level == TemplateLevel::Chip ? 1 : 2);
  s.mode = mode;
  return s;
}

const char* stage_file(TemplateLevel level) { return level == TemplateLevel::Chip ? "chip" : "street"; }

int cmd_synth(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.output_dir / "data";
  const auto rows = step("synth: generate", [&] {
    return generate_dataset(cfg.layout, cfg.dataset, cfg.n_wafers, cfg.seed, dir);
  });
  log("synth: " + std::to_string(cfg.n_wafers) + " wafers, " + std::to_string(rows.size()) + " manifest rows in " +
      dir.string());
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, const fs::path& data_dir) {
  const auto wafers = step("train: load data", [&] { return load_dataset(data_dir); });
  if (wafers.empty()) throw Error(ErrorCode::EmptyData, "train: load data: no wafers in " + data_dir.string());
  const std::size_t n_val = wafers.size() / 4;
  const std::span<const WaferSample> all(wafers);
  const auto train = all.first(wafers.size() - n_val), val = all.last(n_val);
  const fs::path model_dir = cfg.output_dir / "models";
  step("train: output", [&] { make_dirs(model_dir); });

  for (const auto level : {TemplateLevel::Chip, TemplateLevel::Street}) {
    const std::string name = stage_file(level);
    step("train: " + name + " stage", [&] {
      StageConfig s = stage_config(cfg, level, StageMode::Train);
      const auto result = level == TemplateLevel::Chip ? train_chip_stage(s, train, val, cfg.layout)
                                                       : train_street_stage(s, train, val, cfg.layout);
      nn::Network net = *s.model;
      nn::save_checkpoint(net, model_dir / (name + ".ckpt"));
      nn::write_history_csv(model_dir / (name + "_history.csv"), result.history);
      log("train: " + name + " stage: " + std::to_string(result.history.size()) + " epochs, best epoch " +
          std::to_string(result.best_epoch));
    });
  }
  return 0;
}

int cmd_eval(const ExperimentConfig& cfg, bool quiet) {
  const BenchmarkConfig b = benchmark_config(cfg);
  const auto rows = step("eval: benchmark", [&] {
    return run_benchmark(b, [&](const std::string& m) {
      if (!quiet) log("eval: " + m);
    });
  });
  std::string levels;
  for (const int l : b.sh_levels) levels += (levels.empty() ? "" : " ") + std::to_string(l);
  const std::vector<std::pair<std::string, std::string>> meta{
      {"seed", std::to_string(b.seed)},
      {"runs", std::to_string(b.runs)},
      {"n_patches", std::to_string(b.n_patches)},
      {"patch_size", std::to_string(b.patch_size)},
      {"levels", levels},
      {"run_seeds", "seed+r for r in 0.." + std::to_string(b.runs - 1)},
  };
  step("eval: write results", [&] {
    make_dirs(cfg.output_dir);
    write_results_csv(cfg.output_dir / "results.csv", rows, meta);
    write_text(cfg.output_dir / "results.svg", render_results_svg(rows));
  });
  std::cout << format_results_csv(rows);
  return 0;
}

int cmd_infer(const ExperimentConfig& cfg, const fs::path& model_dir, const std::vector<fs::path>& images) {
  std::vector<StageConfig> stages;
  for (const auto level : {TemplateLevel::Chip, TemplateLevel::Street}) {
    const std::string name = stage_file(level);
    StageConfig s = stage_config(cfg, level, StageMode::Infer);
    s.model = step("infer: load " + name + " model", [&] {
      return std::make_shared<const nn::Network>(nn::load_checkpoint(model_dir / (name + ".ckpt")));
    });
    stages.push_back(std::move(s));
  }
  const fs::path out_dir = cfg.output_dir / "verdicts";
  step("infer: output", [&] { make_dirs(out_dir); });
  for (const auto& img_path : images) {
    const std::string tag = "infer: " + img_path.filename().string();
    const GrayImage img = step(tag + ": read", [&] { return read_pgm(img_path); });
    const WaferVerdict v = step(tag, [&] { return run_shcnn(img, cfg.layout, stages); });
    step(tag + ": write", [&] {
      const std::string stem = img_path.stem().string();
      write_text(out_dir / (stem + ".csv"), format_verdict_csv(v));
      write_text(out_dir / (stem + ".json"), format_verdict_json(v));
    });
    log(tag + ": " + std::to_string(v.chip_labels.size()) + " inside chips");
  }
  return 0;
}

int cmd_report(const ExperimentConfig& cfg, std::vector<fs::path> verdicts, int cell_px) {
  if (verdicts.empty()) {
    const fs::path dir = cfg.output_dir / "verdicts";
    step("report: scan", [&] {
      for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".csv") verdicts.push_back(e.path());
      }
    });
    std::sort(verdicts.begin(), verdicts.end());
    if (verdicts.empty()) throw Error(ErrorCode::EmptyVerdict, "report: no verdict CSV files in " + dir.string());
  }
  const fs::path out_dir = cfg.output_dir / "reports";
  step("report: output", [&] { make_dirs(out_dir); });
  for (const auto& p : verdicts) {
    const std::string tag = "report: " + p.filename().string();
    step(tag, [&] {
      WaferMap map;
      map.verdict = import_csv(read_text(p));
      map.cell_px = cell_px;
      write_text(out_dir / (p.stem().string() + ".svg"), render_svg(map));
    });
  }
  log("report: " + std::to_string(verdicts.size()) + " wafer maps in " + out_dir.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wafer dicing inspection: synthetic data, stacked CNN stages, baselines and reports."};
  app.require_subcommand(1, 1);
  std::string config_path;

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    return sub;
  };
  auto* synth = with_config(app.add_subcommand("synth", "generate a synthetic wafer dataset"));
  auto* train = with_config(app.add_subcommand("train", "train the chip and street stage classifiers"));
  std::string data_dir;
  train->add_option("--data", data_dir, "dataset directory (default <output_dir>/data)");
  auto* eval = with_config(app.add_subcommand("eval", "run the street benchmark and write results"));
  bool quiet = false;
  eval->add_flag("-q,--quiet", quiet, "no progress messages");
  auto* infer = with_config(app.add_subcommand("infer", "classify wafer images"));
  std::string model_dir;
  std::vector<std::string> images;
  infer->add_option("--models", model_dir, "checkpoint directory (default <output_dir>/models)");
  infer->add_option("images", images, "wafer images (PGM)")->required();
  auto* report = with_config(app.add_subcommand("report", "render wafer maps from verdict CSV files"));
  std::vector<std::string> verdict_files;
  int cell_px = WaferMap{}.cell_px;
  report->add_option("verdicts", verdict_files, "verdict CSV files (default <output_dir>/verdicts/*.csv)");
  report->add_option("--cell-px", cell_px, "pixels per chip cell")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "shcnn: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  auto* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  try {
    const ExperimentConfig cfg = step(cmd + ": config", [&] { return load_config(config_path); });
    if (sub == synth) return cmd_synth(cfg);
    if (sub == train) return cmd_train(cfg, data_dir.empty() ? cfg.output_dir / "data" : fs::path(data_dir));
    if (sub == eval) return cmd_eval(cfg, quiet);
    if (sub == infer) {
      return cmd_infer(cfg, model_dir.empty() ? cfg.output_dir / "models" : fs::path(model_dir),
                       std::vector<fs::path>(images.begin(), images.end()));
    }
    return cmd_report(cfg, std::vector<fs::path>(verdict_files.begin(), verdict_files.end()), cell_px);
  } catch (const Error& e) {
    std::cerr << "shcnn: " << e.what() << '\n';
    return e.code() == ErrorCode::BadConfig ? kExitUsage : kExitData;
  }
}
