// gaitprop: command-line driver for training runs, grid searches, alignment
// and equilibrium experiments.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gait/checkpoint.hpp"
#include "gait/config.hpp"
#include "gait/data.hpp"
#include "gait/diagnostics.hpp"
#include "gait/error.hpp"
#include "gait/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed (overrides the config file)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--set", o.sets, "override a config key, key=value (repeatable)");
}

gait::ConfigMap resolve_map(const CommonOptions& o) {
  gait::ConfigMap map = o.config_path.empty() ? gait::ConfigMap{} : gait::ConfigMap::load(o.config_path);
  for (const std::string& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw gait::InvalidArgument("--set expects key=value, got '" + kv + "'");
    }
    map.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) map.set("seed", std::to_string(*o.seed));
  if (!o.out.empty()) map.set("out", o.out);
  return map;
}

json run_summary(const gait::RunRecord& r) {
  json j = json::parse(r.to_json());
  j.erase("epochs");
  return j;
}

json alignment_json(const gait::AlignmentReport& rep) {
  json layers = json::array();
  for (std::size_t i = 0; i < rep.layers.size(); ++i) {
    const auto& l = rep.layers[i];
    layers.push_back({{"layer", i},
                      {"cosine", l.cosine ? json(*l.cosine) : json("undefined")},
                      {"norm_ratio", l.norm_ratio ? json(*l.norm_ratio) : json("undefined")}});
  }
  return layers;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GAIT-prop, target propagation and backpropagation experiments"};
  app.require_subcommand(1);

  CommonOptions train_o, grid_o, align_o, eq_o, gen_o;

  auto* train_cmd = app.add_subcommand("train", "train one network and write run.json");
  add_common(train_cmd, train_o);

  auto* grid_cmd = app.add_subcommand("gridsearch", "learning rate x regularizer grid");
  add_common(grid_cmd, grid_o);
  std::vector<double> etas = gait::kDefaultEtas;
  std::vector<double> lambdas = gait::kDefaultLambdas;
  grid_cmd->add_option("--etas", etas, "learning rates")->delimiter(',');
  grid_cmd->add_option("--lambdas", lambdas, "regularizer strengths")->delimiter(',');

  auto* align_cmd = app.add_subcommand("align", "compare TP and GAIT updates with BP on untrained nets");
  add_common(align_cmd, align_o);
  std::size_t align_samples = 100;
  align_cmd->add_option("--samples", align_samples, "number of training inputs");

  auto* eq_cmd = app.add_subcommand("equilibrium", "simulate the feedback circuit over a grid of nu");
  add_common(eq_cmd, eq_o);
  std::vector<double> nus = {0.0, 0.1, 0.25, 0.4};
  std::size_t eq_size = 4;
  double eq_dt = 0.01, eq_duration = 200.0, eq_onset = 100.0;
  eq_cmd->add_option("--nus", nus, "coupling values in [0, 0.5)")->delimiter(',');
  eq_cmd->add_option("--size", eq_size, "units per layer");
  eq_cmd->add_option("--dt", eq_dt, "Euler step (units of tau)");
  eq_cmd->add_option("--duration", eq_duration, "simulated time (units of tau)");
  eq_cmd->add_option("--onset", eq_onset, "target onset (units of tau)");

  auto* gen_cmd = app.add_subcommand("datagen", "write the synthetic teacher task as IDX files");
  add_common(gen_cmd, gen_o);
  std::size_t gen_width = 16, gen_depth = 2, gen_classes = 4, gen_train = 2000, gen_test = 1000;
  gen_cmd->add_option("--width", gen_width, "input width");
  gen_cmd->add_option("--depth", gen_depth, "teacher hidden layers");
  gen_cmd->add_option("--classes", gen_classes, "class count");
  gen_cmd->add_option("--train", gen_train, "training samples");
  gen_cmd->add_option("--test", gen_test, "test samples");

  auto* inspect_cmd = app.add_subcommand("checkpoint-inspect", "print a checkpoint summary as JSON");
  std::string ckpt_path;
  inspect_cmd->add_option("path", ckpt_path, "checkpoint file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      const auto cfg = gait::ExperimentConfig::from_map(resolve_map(train_o));
      const gait::RunRecord rec = gait::train(cfg);
      std::cout << run_summary(rec).dump(2) << '\n';
    } else if (*grid_cmd) {
      const auto cfg = gait::ExperimentConfig::from_map(resolve_map(grid_o));
      const gait::GridResult grid = gait::gridsearch(cfg, etas, lambdas);
      gait::write_grid_table(std::cout, grid);
      if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir / "runs");
        std::ofstream csv(cfg.out_dir / "grid.csv");
        gait::write_grid_csv(csv, grid);
        std::ofstream table(cfg.out_dir / "grid_table.csv");
        gait::write_grid_table(table, grid);
        for (std::size_t k = 0; k < grid.runs.size(); ++k) {
          std::ofstream(cfg.out_dir / "runs" / ("cell_" + std::to_string(k) + ".json"))
              << grid.runs[k].to_json() << '\n';
        }
      }
    } else if (*align_cmd) {
      const auto cfg = gait::ExperimentConfig::from_map(resolve_map(align_o));
      const auto runs = gait::align_experiment(cfg, align_samples);
      json out = json::object();
      for (const auto& r : runs) {
        const std::string tag = r.init == gait::InitScheme::Orthogonal ? "orthogonal" : "xavier";
        out[tag] = {{"tp_vs_bp", alignment_json(r.tp_vs_bp)},
                    {"gait_vs_bp", alignment_json(r.gait_vs_bp)},
                    {"orthogonality_errors", r.tp_vs_bp.orthogonality_errors}};
      }
      if (!cfg.out_dir.empty()) {
        gait::write_alignment_outputs(cfg.out_dir, runs);
        std::ofstream(cfg.out_dir / "align.json") << out.dump(2) << '\n';
      }
      std::cout << out.dump(2) << '\n';
    } else if (*eq_cmd) {
      const gait::ConfigMap map = resolve_map(eq_o);
      gait::CircuitConfig base = gait::random_circuit(eq_size, map.get_u64("seed").value_or(0));
      base.dt = eq_dt;
      base.duration = eq_duration;
      base.target_onset = eq_onset;
      const auto rows = gait::equilibrium_sweep(base, nus);
      gait::write_equilibrium_csv(std::cout, rows);
      if (auto out = map.get("out")) {
        fs::create_directories(*out);
        std::ofstream csv(fs::path(*out) / "equilibrium.csv");
        gait::write_equilibrium_csv(csv, rows);
      }
    } else if (*gen_cmd) {
      const gait::ConfigMap map = resolve_map(gen_o);
      const fs::path out = map.get("out").value_or("data/teacher");
      const gait::Rng rng(map.get_u64("seed").value_or(7));
      const gait::Dataset all = gait::synthetic_teacher(gen_width, gen_depth, gen_classes,
                                                        gen_train + gen_test, rng, {true});
      gait::Dataset train = all.head(gen_train);
      gait::Dataset test = all;
      test.labels.erase(test.labels.begin(), test.labels.begin() + static_cast<std::ptrdiff_t>(gen_train));
      test.values.erase(test.values.begin(),
                        test.values.begin() + static_cast<std::ptrdiff_t>(gen_train * gen_width));
      fs::create_directories(out);
      gait::write_idx(train, out / "train-images-idx3-ubyte", out / "train-labels-idx1-ubyte");
      if (!test.empty()) {
        gait::write_idx(test, out / "t10k-images-idx3-ubyte", out / "t10k-labels-idx1-ubyte");
      }
      std::cout << "wrote " << train.size() << " training and " << test.size()
                << " test samples to " << out.string() << '\n';
    } else if (*inspect_cmd) {
      const gait::Network net = gait::load_checkpoint(ckpt_path);
      json layers = json::array();
      for (std::size_t i = 0; i < net.depth(); ++i) {
        const gait::Layer& l = net.layer(i);
        layers.push_back({{"layer", i},
                          {"total_width", l.total_width()},
                          {"forward_width", l.forward_width},
                          {"activation", l.activation.kind == gait::ActivationKind::Linear ? "linear" : "leaky_relu"},
                          {"slope", l.activation.slope},
                          {"orthogonality_error", gait::orthogonality_error(l.weight)},
                          {"frobenius_norm", gait::frobenius_norm(l.weight)}});
      }
      std::cout << json{{"format_version", gait::kCheckpointVersion},
                        {"depth", net.depth()},
                        {"input_width", net.input_width()},
                        {"output_width", net.output_width()},
                        {"layers", layers}}
                       .dump(2)
                << '\n';
    }
  } catch (const gait::Error& e) {
    std::cerr << "error[" << e.kind() << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
