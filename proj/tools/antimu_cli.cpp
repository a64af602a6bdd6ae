// antimu: train / classify / evaluate / sweep / synth

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "antimu/antimu.hpp"

namespace fs = std::filesystem;
using namespace antimu;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;  // Key=Value
};

RunConfig resolve_config(const Globals& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw config_error("cannot open config " + g.config_path);
    cfg = parse_config(in, cfg);
  }
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw config_error("--set expects Key=Value, got '" + kv + "'");
    set_param(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

void print_config(const RunConfig& cfg) {
  std::cout << "# resolved config\n";
  write_config(std::cout, cfg);
  std::cout << std::flush;
}

std::string require_out(const Globals& g, const char* verb) {
  if (g.out.empty()) throw config_error(std::string(verb) + " needs --out");
  return g.out;
}

template <typename Fn>
void write_text(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw format_error("cannot write " + path);
  fn(out);
  if (!out) throw format_error("write failed for " + path);
}

bool looks_like_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[2] = {};
  in.read(magic, 2);
  return in && magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5');
}

// Ground truth from a bundle header (its labels entry) or a label-map PGM.
LabelMap load_truth(const std::string& path) {
  if (looks_like_pgm(path)) return io::read_label_map(path);
  auto bundle = io::load_bundle(path);
  if (!bundle.labels) throw input_error(path + " has no labels entry");
  return std::move(*bundle.labels);
}

LabelMap labels_for_training(const io::RasterBundle& bundle, const std::string& labels_path,
                             const std::string& image_path) {
  if (!labels_path.empty()) return io::read_label_map(labels_path);
  if (!bundle.labels) throw input_error(image_path + " has no labels; pass --labels");
  return *bundle.labels;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"antimu: immune/ant-colony trained RBF classifier for multispectral images"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "key = value configuration file");
  app.add_option("--seed", g.seed, "master seed (overrides Seed)");
  app.add_option("--out", g.out, "output path");
  app.add_option("--set", g.overrides, "override one parameter, Key=Value (repeatable)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic scene bundle");
  SynthParams sp;
  std::string synth_format = "bsq", synth_sample = "u16";
  synth->add_option("--classes", sp.classes, "number of classes")->capture_default_str();
  synth->add_option("--width", sp.width)->capture_default_str();
  synth->add_option("--height", sp.height)->capture_default_str();
  synth->add_option("--bands", sp.bands)->capture_default_str();
  synth->add_option("--separation", sp.separation, "min signature distance / noise stddev")
      ->capture_default_str();
  synth->add_option("--min-distance", sp.min_distance)->capture_default_str();
  synth->add_option("--format", synth_format, "bsq, pgm or csv")->capture_default_str();
  synth->add_option("--sample", synth_sample, "u8, u16 or f32")->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model on a labeled bundle");
  std::string train_image, train_labels, train_metrics;
  train_cmd->add_option("--image", train_image, "bundle header")->required();
  train_cmd->add_option("--labels", train_labels, "label-map PGM (default: bundle labels)");
  train_cmd->add_option("--metrics", train_metrics, "training-set metrics TSV");

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "label every pixel of a bundle");
  std::string cls_model, cls_image, cls_render;
  std::size_t cls_threads = 1;
  classify_cmd->add_option("--model", cls_model)->required();
  classify_cmd->add_option("--image", cls_image, "bundle header")->required();
  classify_cmd->add_option("--render", cls_render, "also write a color PPM");
  classify_cmd->add_option("--threads", cls_threads)->capture_default_str();

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score a label map against ground truth");
  std::string ev_pred, ev_truth, ev_model;
  eval_cmd->add_option("--pred", ev_pred, "predicted label-map PGM")->required();
  eval_cmd->add_option("--truth", ev_truth, "truth label-map PGM or bundle header")->required();
  eval_cmd->add_option("--model", ev_model, "model whose training pixels are excluded");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "rates over a parameter grid, API vs API_h");
  std::string sw_image, sw_labels, sw_param, sw_values, sw_runs;
  std::size_t sw_seeds = 3, sw_threads = 1;
  sweep_cmd->add_option("--image", sw_image, "bundle header")->required();
  sweep_cmd->add_option("--labels", sw_labels, "label-map PGM (default: bundle labels)");
  sweep_cmd->add_option("--param", sw_param, "config key to vary")->required();
  sweep_cmd->add_option("--values", sw_values, "comma-separated values")->required();
  sweep_cmd->add_option("--seeds", sw_seeds, "seeds per cell")->capture_default_str();
  sweep_cmd->add_option("--threads", sw_threads)->capture_default_str();
  sweep_cmd->add_option("--runs", sw_runs, "per-run TSV");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolve_config(g);
    print_config(cfg);

    if (*synth) {
      sp.seed = cfg.seed;
      const SynthScene scene = synth_scene(sp);
      io::SaveOptions opt;
      opt.format = io::parse_band_format(synth_format);
      opt.sample = io::parse_sample_type(synth_sample);
      io::save_bundle(require_out(g, "synth"), scene.bundle, opt);
      std::printf("scene %zux%zu, %zu bands, %zu classes, noise sigma %.6f\n", sp.width, sp.height,
                  sp.bands, sp.classes, scene.noise_sigma);
    } else if (*train_cmd) {
      const std::string out = require_out(g, "train");
      const auto bundle = io::load_bundle(train_image);
      const LabelMap labels = labels_for_training(bundle, train_labels, train_image);
      Rng rng(cfg.seed);
      const TrainedModel tm = train(bundle.raster, labels, cfg, rng);
      write_text(out, [&](std::ostream& os) { write_trained_model(os, tm); });
      std::printf("training rate: ridge %.2f %%, after API %.2f %%\n", tm.ridge_rate, tm.training_rate);
      if (!train_metrics.empty())
        write_text(train_metrics, [&](std::ostream& os) { write_metrics_tsv(os, tm.training_confusion); });
    } else if (*classify_cmd) {
      const std::string out = require_out(g, "classify");
      std::ifstream min(cls_model);
      if (!min) throw format_error("cannot open model " + cls_model);
      const TrainedModel tm = read_trained_model(min);
      const auto bundle = io::load_bundle(cls_image);
      const Classification c = classify_raster(tm, bundle.raster, cls_threads);
      io::write_label_map(out, c.labels);
      if (!cls_render.empty())
        io::write_rendered(cls_render, c.labels, io::default_palette(tm.model.class_count));
      std::printf("classified %zu pixels, %zu unknown\n", c.labels.size(), c.unknown);
    } else if (*eval_cmd) {
      const LabelMap pred = io::read_label_map(ev_pred);
      const LabelMap truth = load_truth(ev_truth);
      std::vector<bool> mask = labeled_mask(truth);
      std::size_t K = std::max(max_label(truth), max_label(pred));
      if (!ev_model.empty()) {
        std::ifstream min(ev_model);
        if (!min) throw format_error("cannot open model " + ev_model);
        const TrainedModel tm = read_trained_model(min);
        mask = held_out_mask(tm, truth);
        K = std::max(K, tm.model.class_count);
      }
      const ConfusionMatrix cm = confusion(pred, truth, mask, K);
      write_metrics_table(std::cout, cm);
      if (!g.out.empty()) write_text(g.out, [&](std::ostream& os) { write_metrics_tsv(os, cm); });
    } else if (*sweep_cmd) {
      const auto bundle = io::load_bundle(sw_image);
      const LabelMap labels = labels_for_training(bundle, sw_labels, sw_image);
      SweepGrid grid;
      grid.param = sw_param;
      grid.values = split_list(sw_values);
      for (std::size_t s = 0; s < sw_seeds; ++s) grid.seeds.push_back(s);
      SweepOptions opt;
      opt.threads = sw_threads;
      const SweepTable table = sweep(grid, bundle.raster, labels, cfg, opt);
      write_sweep_tsv(std::cout, table);
      if (!g.out.empty()) write_text(g.out, [&](std::ostream& os) { write_sweep_tsv(os, table); });
      if (!sw_runs.empty()) write_text(sw_runs, [&](std::ostream& os) { write_sweep_runs_tsv(os, table); });
    }
  } catch (const antimu::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
