#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gait/config.hpp"
#include "gait/data.hpp"
#include "gait/diagnostics.hpp"
#include "gait/dynamics.hpp"
#include "gait/network.hpp"
#include "gait/rules.hpp"

namespace gait {

enum class NetworkShape { Fixed, Reducing };
enum class DatasetKind { Teacher, Idx };
enum class Normalization { Unit, Centered };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::Idx;
  std::filesystem::path train_images = "data/mnist/train-images-idx3-ubyte";
  std::filesystem::path train_labels = "data/mnist/train-labels-idx1-ubyte";
  std::filesystem::path test_images = "data/mnist/t10k-images-idx3-ubyte";
  std::filesystem::path test_labels = "data/mnist/t10k-labels-idx1-ubyte";
  std::size_t train_limit = 0;  // 0 keeps every sample
  std::size_t test_limit = 0;
  // Teacher task: input width is the network width, classes the network's
  // class outputs.
  std::size_t teacher_depth = 2;
  std::size_t teacher_train = 2000;
  std::size_t teacher_test = 1000;
  std::uint64_t teacher_seed = 7;
  // Unit: pixels / 255. Centered: pixels / 255 - 0.5.
  Normalization normalization = Normalization::Unit;
};

struct ExperimentConfig {
  Rule rule = Rule::GAIT;
  std::size_t width = 784;
  std::size_t hidden_layers = 4;
  std::size_t classes = 10;
  NetworkShape shape = NetworkShape::Fixed;
  Activation activation = Activation::leaky_relu(0.01);
  InitScheme init = InitScheme::Orthogonal;
  // Unless set, xavier init is only accepted with lambda = 0 and orthogonal
  // init only with lambda > 0.
  bool allow_init_mismatch = false;
  double learning_rate = 1e-4;
  double lambda = 0.1;
  OrthoPenaltyForm ortho_form = OrthoPenaltyForm::Mask;
  double gamma = 1e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  std::size_t workers = 0;  // 0: one per hardware thread
  DatasetSpec data;
  std::filesystem::path out_dir;
  bool verbose = false;

  // Chosen cells of the grid search for each rule; init follows lambda.
  static ExperimentConfig defaults_for(Rule rule);
  // Starts from defaults_for(rule in map, default GAIT) and applies every
  // key in the map. Unknown keys are an error.
  static ExperimentConfig from_map(const ConfigMap& map);
  ConfigMap to_map() const;

  Architecture architecture() const;
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
  double mean_loss = 0.0;
  std::vector<double> orthogonality_errors;
};

struct RunRecord {
  ExperimentConfig config;
  std::vector<EpochRecord> epochs;
  double peak_train_accuracy = 0.0;
  double final_train_accuracy = 0.0;
  std::optional<double> peak_test_accuracy;
  std::optional<double> final_test_accuracy;
  double wall_clock_seconds = 0.0;
  std::string version;
  // Filled when a run inside a sweep fails.
  std::optional<std::string> error_kind;
  std::optional<std::string> error_message;

  bool ok() const noexcept { return !error_kind.has_value(); }
  // JSON document with every numeric field and the resolved config.
  std::string to_json() const;
};

std::string version_string();

struct TrainTestData {
  Dataset train;
  Dataset test;  // may be empty
};
TrainTestData load_data(const ExperimentConfig& cfg);

// Fraction of samples whose argmax over the class outputs equals the label;
// ties go to the lowest index.
double accuracy(const Network& net, const Dataset& ds);

// Trains one network. Inversion failure or a non-finite loss aborts with
// SingularMatrix / Divergence naming the epoch and batch. When out_dir is set
// the record, resolved config and final checkpoint are written there.
RunRecord train(const ExperimentConfig& cfg);
RunRecord train(const ExperimentConfig& cfg, const TrainTestData& data, Network* final_net = nullptr);

struct GridResult {
  std::vector<double> etas;
  std::vector<double> lambdas;
  std::vector<RunRecord> runs;  // row-major: runs[i * lambdas.size() + j]

  const RunRecord& at(std::size_t eta, std::size_t lambda) const {
    return runs.at(eta * lambdas.size() + lambda);
  }
};

inline const std::vector<double> kDefaultEtas = {1e-3, 1e-4, 1e-5};
inline const std::vector<double> kDefaultLambdas = {0.0, 0.1, 10.0, 1000.0};

// Cell k (row-major) runs with seed base.seed + k, so a 1 x 1 grid equals
// train(base). Failed cells carry their error instead of aborting the sweep.
GridResult gridsearch(const ExperimentConfig& base, const std::vector<double>& etas,
                      const std::vector<double>& lambdas);
// columns: eta,lambda,status,peak_train,final_train,peak_test,final_test
void write_grid_csv(std::ostream& out, const GridResult& grid);
// eta by lambda table of "peak / final" train accuracy in percent.
void write_grid_table(std::ostream& out, const GridResult& grid);

struct AlignmentRun {
  InitScheme init = InitScheme::Orthogonal;
  AlignmentReport tp_vs_bp;
  AlignmentReport gait_vs_bp;
};

// Untrained networks for both init schemes; BP, TP and GAIT updates of the
// first n_samples training inputs, compared layer by layer.
std::vector<AlignmentRun> align_experiment(const ExperimentConfig& cfg, std::size_t n_samples);
std::vector<AlignmentRun> align_experiment(const ExperimentConfig& cfg, const Dataset& ds,
                                           std::size_t n_samples);
void write_alignment_outputs(const std::filesystem::path& dir, const std::vector<AlignmentRun>& runs);

struct EquilibriumRow {
  double nu = 0.0;
  double gamma = 0.0;
  // max |u1 - y1| just before target onset and max |u1 - y1_shifted| at the end
  double steady_error = 0.0;
  // max over the trajectory of |simulated - exact| at dt and at dt / 2
  double trajectory_error = 0.0;
  double trajectory_error_half_dt = 0.0;
  std::optional<std::string> error;
};

// Random invertible W and random x, t2 of size n drawn from `seed`.
CircuitConfig random_circuit(std::size_t n, std::uint64_t seed);
std::vector<EquilibriumRow> equilibrium_sweep(const CircuitConfig& base,
                                              const std::vector<double>& nus);
// columns: nu,gamma,steady_error,trajectory_error_dt,trajectory_error_half_dt,status
void write_equilibrium_csv(std::ostream& out, const std::vector<EquilibriumRow>& rows);

}  // namespace gait
