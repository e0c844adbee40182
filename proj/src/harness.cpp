#include "gait/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gait/checkpoint.hpp"
#include "gait/error.hpp"
#include "gait/optim.hpp"

#ifndef GAIT_VERSION
#define GAIT_VERSION "0.0.0"
#endif
#ifndef GAIT_GIT_REVISION
#define GAIT_GIT_REVISION "unknown"
#endif

namespace gait {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string init_name(InitScheme s) {
  switch (s) {
    case InitScheme::Orthogonal: return "orthogonal";
    case InitScheme::Xavier: return "xavier";
    case InitScheme::Identity: return "identity";
  }
  return "orthogonal";
}

InitScheme parse_init(const std::string& s) {
  if (s == "orthogonal") return InitScheme::Orthogonal;
  if (s == "xavier") return InitScheme::Xavier;
  if (s == "identity") return InitScheme::Identity;
  throw InvalidArgument("unknown init '" + s + "' (orthogonal, xavier, identity)");
}

InitScheme init_for_lambda(double lambda) {
  return lambda == 0.0 ? InitScheme::Xavier : InitScheme::Orthogonal;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "rule", "width", "hidden_layers", "classes", "shape", "activation", "slope", "init",
      "allow_init_mismatch", "learning_rate", "lambda", "ortho_form", "gamma", "batch_size",
      "epochs", "seed", "workers", "dataset", "train_images", "train_labels", "test_images",
      "test_labels", "train_limit", "test_limit", "teacher_depth", "teacher_train",
      "teacher_test", "teacher_seed", "normalization", "out", "verbose"};
  return keys;
}

// Column of argmax over the first `classes` rows, lowest index on ties.
std::size_t argmax_col(const Matrix& m, std::size_t col, std::size_t classes) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < classes; ++c) {
    if (m(c, col) > m(best, col)) best = c;
  }
  return best;
}

void normalize(Dataset& ds, Normalization n) {
  if (n == Normalization::Centered) {
    for (double& v : ds.values) v -= 0.5;
  }
}

template <class E>
[[noreturn]] void rethrow_with_context(const E& e, const std::string& where) {
  throw E(where + ": " + e.what());
}

}  // namespace

std::string version_string() { return std::string(GAIT_VERSION) + "+" + GAIT_GIT_REVISION; }

ExperimentConfig ExperimentConfig::defaults_for(Rule rule) {
  ExperimentConfig c;
  c.rule = rule;
  switch (rule) {
    case Rule::BP: c.learning_rate = 1e-4; c.lambda = 0.0; break;
    case Rule::TP: c.learning_rate = 1e-5; c.lambda = 1000.0; break;
    case Rule::ITP:
    case Rule::GAIT: c.learning_rate = 1e-4; c.lambda = 0.1; break;
  }
  c.init = init_for_lambda(c.lambda);
  return c;
}

ExperimentConfig ExperimentConfig::from_map(const ConfigMap& map) {
  for (const auto& [k, v] : map.values()) {
    if (!known_keys().count(k)) throw InvalidArgument("unknown config key '" + k + "'");
  }
  ExperimentConfig c = defaults_for(parse_rule(map.get("rule").value_or("gait")));
  if (auto v = map.get_u64("width")) c.width = *v;
  if (auto v = map.get_u64("hidden_layers")) c.hidden_layers = *v;
  if (auto v = map.get_u64("classes")) c.classes = *v;
  if (auto v = map.get("shape")) {
    if (*v == "fixed") c.shape = NetworkShape::Fixed;
    else if (*v == "reducing") c.shape = NetworkShape::Reducing;
    else throw InvalidArgument("unknown shape '" + *v + "' (fixed, reducing)");
  }
  const double slope = map.get_double("slope").value_or(0.01);
  const std::string act = map.get("activation").value_or("leaky_relu");
  if (act == "leaky_relu") c.activation = Activation::leaky_relu(slope);
  else if (act == "linear") c.activation = Activation::linear();
  else throw InvalidArgument("unknown activation '" + act + "' (leaky_relu, linear)");
  if (auto v = map.get_double("learning_rate")) c.learning_rate = *v;
  if (auto v = map.get_double("lambda")) c.lambda = *v;
  if (auto v = map.get_bool("allow_init_mismatch")) c.allow_init_mismatch = *v;
  const std::string init = map.get("init").value_or("auto");
  c.init = init == "auto" ? init_for_lambda(c.lambda) : parse_init(init);
  if (auto v = map.get("ortho_form")) {
    if (*v == "mask") c.ortho_form = OrthoPenaltyForm::Mask;
    else if (*v == "product") c.ortho_form = OrthoPenaltyForm::Product;
    else throw InvalidArgument("unknown ortho_form '" + *v + "' (mask, product)");
  }
  if (auto v = map.get_double("gamma")) c.gamma = *v;
  if (auto v = map.get_u64("batch_size")) c.batch_size = *v;
  if (auto v = map.get_u64("epochs")) c.epochs = *v;
  if (auto v = map.get_u64("seed")) c.seed = *v;
  if (auto v = map.get_u64("workers")) c.workers = *v;
  if (auto v = map.get_bool("verbose")) c.verbose = *v;
  if (auto v = map.get("out")) c.out_dir = *v;

  DatasetSpec& d = c.data;
  if (auto v = map.get("dataset")) {
    if (*v == "teacher") d.kind = DatasetKind::Teacher;
    else if (*v == "idx") d.kind = DatasetKind::Idx;
    else throw InvalidArgument("unknown dataset '" + *v + "' (teacher, idx)");
  }
  if (auto v = map.get("train_images")) d.train_images = *v;
  if (auto v = map.get("train_labels")) d.train_labels = *v;
  if (auto v = map.get("test_images")) d.test_images = *v;
  if (auto v = map.get("test_labels")) d.test_labels = *v;
  if (auto v = map.get_u64("train_limit")) d.train_limit = *v;
  if (auto v = map.get_u64("test_limit")) d.test_limit = *v;
  if (auto v = map.get_u64("teacher_depth")) d.teacher_depth = *v;
  if (auto v = map.get_u64("teacher_train")) d.teacher_train = *v;
  if (auto v = map.get_u64("teacher_test")) d.teacher_test = *v;
  if (auto v = map.get_u64("teacher_seed")) d.teacher_seed = *v;
  if (auto v = map.get("normalization")) {
    if (*v == "unit") d.normalization = Normalization::Unit;
    else if (*v == "centered") d.normalization = Normalization::Centered;
    else throw InvalidArgument("unknown normalization '" + *v + "' (unit, centered)");
  }
  c.validate();
  return c;
}

ConfigMap ExperimentConfig::to_map() const {
  ConfigMap m;
  m.set("rule", std::string(rule_name(rule)));
  m.set("width", std::to_string(width));
  m.set("hidden_layers", std::to_string(hidden_layers));
  m.set("classes", std::to_string(classes));
  m.set("shape", shape == NetworkShape::Fixed ? "fixed" : "reducing");
  m.set("activation", activation.kind == ActivationKind::Linear ? "linear" : "leaky_relu");
  m.set("slope", fmt(activation.kind == ActivationKind::Linear ? 0.01 : activation.slope));
  m.set("init", init_name(init));
  m.set("allow_init_mismatch", allow_init_mismatch ? "true" : "false");
  m.set("learning_rate", fmt(learning_rate));
  m.set("lambda", fmt(lambda));
  m.set("ortho_form", ortho_form == OrthoPenaltyForm::Mask ? "mask" : "product");
  m.set("gamma", fmt(gamma));
  m.set("batch_size", std::to_string(batch_size));
  m.set("epochs", std::to_string(epochs));
  m.set("seed", std::to_string(seed));
  m.set("workers", std::to_string(workers));
  m.set("verbose", verbose ? "true" : "false");
  m.set("dataset", data.kind == DatasetKind::Teacher ? "teacher" : "idx");
  m.set("train_images", data.train_images.string());
  m.set("train_labels", data.train_labels.string());
  m.set("test_images", data.test_images.string());
  m.set("test_labels", data.test_labels.string());
  m.set("train_limit", std::to_string(data.train_limit));
  m.set("test_limit", std::to_string(data.test_limit));
  m.set("teacher_depth", std::to_string(data.teacher_depth));
  m.set("teacher_train", std::to_string(data.teacher_train));
  m.set("teacher_test", std::to_string(data.teacher_test));
  m.set("teacher_seed", std::to_string(data.teacher_seed));
  m.set("normalization", data.normalization == Normalization::Unit ? "unit" : "centered");
  if (!out_dir.empty()) m.set("out", out_dir.string());
  return m;
}

Architecture ExperimentConfig::architecture() const {
  return shape == NetworkShape::Fixed
             ? Architecture::fixed_width(width, hidden_layers, classes, activation)
             : Architecture::reducing_width(width, hidden_layers, classes, activation);
}

void ExperimentConfig::validate() const {
  if (width == 0 || classes == 0 || classes > width) {
    throw InvalidArgument("need 1 <= classes <= width");
  }
  if (hidden_layers > 8) throw InvalidArgument("hidden_layers must be at most 8");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in (0, 1]");
  if (batch_size == 0) throw InvalidArgument("batch_size must be at least 1");
  if (!allow_init_mismatch && init != init_for_lambda(lambda)) {
    throw InvalidArgument("init " + init_name(init) + " with lambda " + fmt(lambda) +
                          ": xavier goes with lambda = 0 and orthogonal with lambda > 0 "
                          "(set allow_init_mismatch = true to override)");
  }
}

TrainTestData load_data(const ExperimentConfig& cfg) {
  TrainTestData out;
  const DatasetSpec& d = cfg.data;
  if (d.kind == DatasetKind::Teacher) {
    const Dataset all = synthetic_teacher(cfg.width, d.teacher_depth, cfg.classes,
                                          d.teacher_train + d.teacher_test,
                                          Rng(d.teacher_seed));
    out.train = all.head(d.teacher_train);
    out.test = all;
    out.test.labels.erase(out.test.labels.begin(),
                          out.test.labels.begin() + static_cast<std::ptrdiff_t>(d.teacher_train));
    out.test.values.erase(out.test.values.begin(),
                          out.test.values.begin() +
                              static_cast<std::ptrdiff_t>(d.teacher_train * cfg.width));
  } else {
    out.train = load_idx(d.train_images, d.train_labels, cfg.classes);
    if (d.train_limit) out.train = out.train.head(d.train_limit);
    if (!d.test_images.empty() && std::filesystem::exists(d.test_images)) {
      out.test = load_idx(d.test_images, d.test_labels, cfg.classes);
      if (d.test_limit) out.test = out.test.head(d.test_limit);
    }
  }
  normalize(out.train, d.normalization);
  normalize(out.test, d.normalization);
  if (out.train.features != cfg.width) {
    throw DimensionMismatch("dataset has " + std::to_string(out.train.features) +
                            " features but the network width is " + std::to_string(cfg.width));
  }
  return out;
}

double accuracy(const Network& net, const Dataset& ds) {
  if (ds.empty()) return 0.0;
  const std::size_t classes = std::min(ds.classes, net.output_width());
  std::size_t correct = 0;
  constexpr std::size_t kChunk = 1024;
  for (std::size_t first = 0; first < ds.size(); first += kChunk) {
    const std::size_t n = std::min(kChunk, ds.size() - first);
    Matrix x(ds.features, n);
    for (std::size_t j = 0; j < n; ++j) x.set_col(j, ds.input(first + j));
    const Matrix y = forward(net, x).output(net);
    for (std::size_t j = 0; j < n; ++j) {
      if (argmax_col(y, j, classes) == ds.labels[first + j]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

RunRecord train(const ExperimentConfig& cfg, const TrainTestData& data, Network* final_net) {
  cfg.validate();
  if (data.train.empty()) throw InvalidArgument("training set is empty");
  if (data.train.classes < cfg.classes) throw InvalidArgument("dataset has fewer classes than the network");
  const auto t0 = std::chrono::steady_clock::now();

  const Rng root(cfg.seed);
  Network net = make_network(cfg.architecture(), cfg.init, root.split(0));
  Rng shuffle = root.split(1);
  AdamState adam(net, AdamConfig{cfg.learning_rate, 0.9, 0.99, 1e-8});
  const IncrementalConfig inc{cfg.gamma, true};

  RunRecord rec;
  rec.config = cfg;
  rec.version = version_string();
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    const auto order = batch_indices(data.train.size(), cfg.batch_size, true, shuffle);
    for (std::size_t b = 0; b < order.size(); ++b) {
      const std::string where = "epoch " + std::to_string(epoch) + " batch " + std::to_string(b);
      Batch batch = make_batch(data.train, order[b]);
      Matrix t_out = batch.targets.zero_padded(net.output_width());
      try {
        const ForwardTrace trace = forward(net, batch.inputs);
        const Matrix y = trace.output(net);
        double batch_loss = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
          const double e = y.data()[k] - t_out.data()[k];
          batch_loss += 0.5 * e * e;
        }
        if (!std::isfinite(batch_loss)) throw Divergence("loss is not finite");
        loss_sum += batch_loss;
        UpdateSet up = compute_updates(cfg.rule, net, trace, t_out, inc);
        if (cfg.lambda > 0.0) {
          for (std::size_t i = 0; i < net.depth(); ++i) {
            up.deltas[i] -= ortho_reg_grad(net.layer(i).weight, cfg.lambda, cfg.ortho_form);
          }
        }
        adam.apply(net, up);
        for (const Layer& l : net.layers()) {
          if (!l.weight.all_finite()) throw Divergence("weights became non-finite");
        }
      } catch (const SingularMatrix& e) {
        rethrow_with_context(e, where);
      } catch (const Divergence& e) {
        rethrow_with_context(e, where);
      }
    }
    EpochRecord er;
    er.epoch = epoch;
    er.mean_loss = loss_sum / static_cast<double>(data.train.size());
    er.train_accuracy = accuracy(net, data.train);
    if (!data.test.empty()) er.test_accuracy = accuracy(net, data.test);
    er.orthogonality_errors = ortho_drift(net);
    if (cfg.verbose) {
      std::cerr << rule_name(cfg.rule) << " epoch " << epoch << " loss " << er.mean_loss
                << " train " << er.train_accuracy;
      if (er.test_accuracy) std::cerr << " test " << *er.test_accuracy;
      std::cerr << '\n';
    }
    rec.peak_train_accuracy = std::max(rec.peak_train_accuracy, er.train_accuracy);
    rec.final_train_accuracy = er.train_accuracy;
    if (er.test_accuracy) {
      rec.peak_test_accuracy = std::max(rec.peak_test_accuracy.value_or(0.0), *er.test_accuracy);
      rec.final_test_accuracy = er.test_accuracy;
    }
    rec.epochs.push_back(std::move(er));
  }
  rec.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (final_net) *final_net = std::move(net);
  return rec;
}

RunRecord train(const ExperimentConfig& cfg) {
  const TrainTestData data = load_data(cfg);
  Network net;
  RunRecord rec = train(cfg, data, &net);
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream(cfg.out_dir / "run.json") << rec.to_json() << '\n';
    std::ofstream(cfg.out_dir / "config.txt") << cfg.to_map().to_string();
    save_checkpoint(net, cfg.out_dir / "model.gaitnet");
  }
  return rec;
}

std::string RunRecord::to_json() const {
  using nlohmann::json;
  json j;
  j["version"] = version;
  j["config"] = config.to_map().values();
  j["status"] = ok() ? "ok" : "failed";
  if (error_kind) j["error"] = {{"kind", *error_kind}, {"message", error_message.value_or("")}};
  j["peak_train_accuracy"] = peak_train_accuracy;
  j["final_train_accuracy"] = final_train_accuracy;
  j["peak_test_accuracy"] = peak_test_accuracy ? json(*peak_test_accuracy) : json(nullptr);
  j["final_test_accuracy"] = final_test_accuracy ? json(*final_test_accuracy) : json(nullptr);
  j["wall_clock_seconds"] = wall_clock_seconds;
  json epochs_json = json::array();
  for (const EpochRecord& e : epochs) {
    epochs_json.push_back({{"epoch", e.epoch},
                           {"train_accuracy", e.train_accuracy},
                           {"test_accuracy", e.test_accuracy ? json(*e.test_accuracy) : json(nullptr)},
                           {"mean_loss", e.mean_loss},
                           {"orthogonality_errors", e.orthogonality_errors}});
  }
  j["epochs"] = std::move(epochs_json);
  return j.dump(2);
}

GridResult gridsearch(const ExperimentConfig& base, const std::vector<double>& etas,
                      const std::vector<double>& lambdas) {
  if (etas.empty() || lambdas.empty()) throw InvalidArgument("gridsearch needs nonempty grids");
  GridResult grid;
  grid.etas = etas;
  grid.lambdas = lambdas;
  const std::size_t cells = etas.size() * lambdas.size();
  grid.runs.resize(cells);
  const TrainTestData data = load_data(base);

  std::vector<ExperimentConfig> cfgs;
  for (std::size_t k = 0; k < cells; ++k) {
    ExperimentConfig c = base;
    c.learning_rate = etas[k / lambdas.size()];
    c.lambda = lambdas[k % lambdas.size()];
    if (!base.allow_init_mismatch) c.init = init_for_lambda(c.lambda);
    c.seed = base.seed + k;
    cfgs.push_back(std::move(c));
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < cells; k = next++) {
      try {
        grid.runs[k] = train(cfgs[k], data);
      } catch (const Error& e) {
        RunRecord r;
        r.config = cfgs[k];
        r.version = version_string();
        r.error_kind = e.kind();
        r.error_message = e.what();
        grid.runs[k] = std::move(r);
      }
    }
  };
  std::size_t n_workers = base.workers ? base.workers : std::thread::hardware_concurrency();
  n_workers = std::clamp<std::size_t>(n_workers, 1, cells);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  return grid;
}

void write_grid_csv(std::ostream& out, const GridResult& grid) {
  out << "eta,lambda,status,peak_train,final_train,peak_test,final_test\n" << std::setprecision(17);
  const auto opt = [&](const std::optional<double>& v) {
    if (v) out << *v;
  };
  for (std::size_t i = 0; i < grid.etas.size(); ++i) {
    for (std::size_t j = 0; j < grid.lambdas.size(); ++j) {
      const RunRecord& r = grid.at(i, j);
      out << grid.etas[i] << ',' << grid.lambdas[j] << ',' << (r.ok() ? "ok" : *r.error_kind) << ',';
      if (r.ok()) {
        out << r.peak_train_accuracy << ',' << r.final_train_accuracy << ',';
        opt(r.peak_test_accuracy);
        out << ',';
        opt(r.final_test_accuracy);
      } else {
        out << ",,,";
      }
      out << '\n';
    }
  }
}

void write_grid_table(std::ostream& out, const GridResult& grid) {
  out << "eta";
  for (double l : grid.lambdas) out << ",lambda=" << fmt(l);
  out << '\n';
  for (std::size_t i = 0; i < grid.etas.size(); ++i) {
    out << fmt(grid.etas[i]);
    for (std::size_t j = 0; j < grid.lambdas.size(); ++j) {
      const RunRecord& r = grid.at(i, j);
      out << ',';
      if (!r.ok()) {
        out << "failed";
        continue;
      }
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(2) << 100.0 * r.peak_train_accuracy << " / "
           << 100.0 * r.final_train_accuracy;
      out << cell.str();
    }
    out << '\n';
  }
}

std::vector<AlignmentRun> align_experiment(const ExperimentConfig& cfg, const Dataset& ds,
                                           std::size_t n_samples) {
  if (n_samples == 0 || n_samples > ds.size()) {
    throw InvalidArgument("align needs 1 <= n_samples <= dataset size (" +
                          std::to_string(ds.size()) + ")");
  }
  std::vector<std::size_t> idx(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) idx[i] = i;
  const Batch batch = make_batch(ds, idx);
  const IncrementalConfig inc{cfg.gamma, true};

  std::vector<AlignmentRun> runs;
  for (InitScheme init : {InitScheme::Orthogonal, InitScheme::Xavier}) {
    const Network net = make_network(cfg.architecture(), init, Rng(cfg.seed).split(0));
    const ForwardTrace trace = forward(net, batch.inputs);
    const Matrix t_out = batch.targets.zero_padded(net.output_width());
    const UpdateSet bp = bp_updates(net, trace, t_out);
    const UpdateSet tp = compute_updates(Rule::TP, net, trace, t_out, inc);
    const UpdateSet ga = compute_updates(Rule::GAIT, net, trace, t_out, inc);
    AlignmentRun run;
    run.init = init;
    run.tp_vs_bp = align(tp, bp, kDefaultScatterPoints, Rng(cfg.seed).split(2));
    run.gait_vs_bp = align(ga, bp, kDefaultScatterPoints, Rng(cfg.seed).split(2));
    run.tp_vs_bp.orthogonality_errors = ortho_drift(net);
    run.gait_vs_bp.orthogonality_errors = run.tp_vs_bp.orthogonality_errors;
    runs.push_back(std::move(run));
  }
  return runs;
}

std::vector<AlignmentRun> align_experiment(const ExperimentConfig& cfg, std::size_t n_samples) {
  return align_experiment(cfg, load_data(cfg).train, n_samples);
}

void write_alignment_outputs(const std::filesystem::path& dir, const std::vector<AlignmentRun>& runs) {
  std::filesystem::create_directories(dir);
  for (const AlignmentRun& r : runs) {
    const std::string tag = init_name(r.init);
    {
      std::ofstream f(dir / ("align_" + tag + "_tp_vs_bp.csv"));
      write_alignment_csv(f, r.tp_vs_bp);
    }
    {
      std::ofstream f(dir / ("align_" + tag + "_gait_vs_bp.csv"));
      write_alignment_csv(f, r.gait_vs_bp);
    }
    {
      std::ofstream f(dir / ("scatter_" + tag + "_tp_vs_bp.csv"));
      write_scatter_csv(f, r.tp_vs_bp);
    }
    {
      std::ofstream f(dir / ("scatter_" + tag + "_gait_vs_bp.csv"));
      write_scatter_csv(f, r.gait_vs_bp);
    }
  }
}

CircuitConfig random_circuit(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("circuit size must be positive");
  Rng rng(seed);
  CircuitConfig c;
  c.weight = Matrix::identity(n);
  const double scale = 0.5 / std::sqrt(static_cast<double>(n));
  for (double& v : c.weight.data()) v += scale * rng.normal();
  c.input.resize(n);
  c.target.resize(n);
  for (double& v : c.input) v = rng.normal();
  for (double& v : c.target) v = rng.normal();
  LuFactorization check(c.weight);  // throws if the draw is singular
  return c;
}

std::vector<EquilibriumRow> equilibrium_sweep(const CircuitConfig& base, const std::vector<double>& nus) {
  std::vector<EquilibriumRow> rows;
  for (double nu : nus) {
    EquilibriumRow row;
    row.nu = nu;
    try {
      if (!(nu >= 0.0 && nu < 0.5)) throw InvalidArgument("nu must lie in [0, 0.5)");
      CircuitConfig c = base;
      c.coupling = nu;
      const Equilibria eq = equilibria(c);
      row.gamma = eq.gamma;

      const auto trajectory_error = [](const CircuitConfig& cc, const Trajectory& t) {
        double err = 0.0;
        for (std::size_t k = 0; k < t.samples(); ++k) {
          const auto [u1, u2] = analytic_state(cc, t.times[k]);
          for (std::size_t i = 0; i < u1.size(); ++i) {
            err = std::max(err, std::abs(t.u1[k][i] - u1[i]));
            err = std::max(err, std::abs(t.u2[k][i] - u2[i]));
          }
        }
        return err;
      };

      const Trajectory traj = simulate(c);
      const auto onset = static_cast<std::size_t>(std::llround(c.target_onset / c.dt));
      double steady = 0.0;
      for (std::size_t i = 0; i < eq.y1.size(); ++i) {
        if (onset < traj.samples()) steady = std::max(steady, std::abs(traj.u1[onset][i] - eq.y1[i]));
        steady = std::max(steady, std::abs(traj.u1.back()[i] - eq.y1_shifted[i]));
      }
      row.steady_error = steady;
      row.trajectory_error = trajectory_error(c, traj);
      CircuitConfig half = c;
      half.dt = c.dt / 2.0;
      row.trajectory_error_half_dt = trajectory_error(half, simulate(half));
    } catch (const Error& e) {
      row.error = e.kind() + ": " + e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_equilibrium_csv(std::ostream& out, const std::vector<EquilibriumRow>& rows) {
  out << "nu,gamma,steady_error,trajectory_error_dt,trajectory_error_half_dt,status\n"
      << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.nu << ',' << r.gamma << ',';
    if (r.error) {
      std::string msg = *r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      out << ",,," << msg << '\n';
    } else {
      out << r.steady_error << ',' << r.trajectory_error << ',' << r.trajectory_error_half_dt
          << ",ok\n";
    }
  }
}

}  // namespace gait
