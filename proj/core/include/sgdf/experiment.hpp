#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sgdf/baselines.hpp"
#include "sgdf/objectives.hpp"
#include "sgdf/optimizer.hpp"

namespace sgdf {

enum class ExperimentKind {
  race,
  regret,
  nonconvex_rate,
  fpss,
  spectrum,
  estimator_variance,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

using OptimizerParams = std::variant<SgdfHyperparams, SgdHyperparams,
                                     AdamHyperparams, WienerAdamHyperparams>;

std::string optimizer_type(const OptimizerParams& params);

struct OptimizerSpec {
  std::string label;
  OptimizerParams params;
};

/// Uniform stepping facade over the four optimizers; owns the state.
class AnyOptimizer {
 public:
  AnyOptimizer(const OptimizerParams& params, std::size_t dim);
  StepOutput step(const ParamVector& params, const ParamVector& grad);

 private:
  OptimizerParams params_;
  std::variant<FilterState, SgdState, AdamState, WienerAdamState> state_;
};

struct ObjectiveSpec {
  std::string type = "noisy_quadratic";
  // noisy_quadratic: explicit eigenvalues win; otherwise dim values
  // log-spaced over [eigen_min, eigen_max]
  std::size_t dim = 2;
  std::vector<double> eigenvalues;
  double eigen_min = 1.0;
  double eigen_max = 1.0;
  double noise_std = 0.0;  // also noisy_rosenbrock
  LogisticConfig logistic{};
  MlpConfig mlp{};
};

std::unique_ptr<StochasticObjective> build_objective(const ObjectiveSpec& spec);

struct StreamSpec {
  std::size_t dim = 4;
  DriftKind drift = DriftKind::random_walk;
  double radius = 1.0;
  double drift_step = 0.05;
};

struct FpssSpec {
  std::string potential = "double_well";  // or "quadratic_well"
  double domain_lo = -3.0;
  double domain_hi = 3.0;
  double diffusion = 0.5;
  double variance_floor = 0.25;
  double dt = 1e-3;
  std::int64_t samples = 100000;
  std::int64_t burn_in = 100000;
  std::int64_t thin = 1;
  int bins = 60;
};

struct SpectrumSpec {
  std::size_t top_k = 5;
  std::int64_t probes = 1000;
  int max_iters = 10000;
  double tol = 1e-9;
  std::string point = "initial";  // or "optimum"
};

struct EstimatorVarianceSpec {
  double mu = 0.7;
  double sigma = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t window_start = 500;  // MSE window is [window_start, horizon]
};

struct ExperimentConfig {
  int version = 1;
  ExperimentKind kind = ExperimentKind::race;
  std::vector<OptimizerSpec> optimizers;
  ObjectiveSpec objective;
  StreamSpec stream;
  FpssSpec fpss;
  SpectrumSpec spectrum;
  EstimatorVarianceSpec estvar;
  std::vector<std::uint64_t> seeds;
  std::int64_t horizon = 1000;
  std::int64_t record_every = 1;
  double projection_radius = 0.0;  // > 0 projects iterates onto this ball
  std::string out_dir = "out";
};

/// Parses and validates. Violations raise ConfigError naming the field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form; parse(serialize(parse(x))) == parse(x).
std::string serialize_config(const ExperimentConfig& cfg);

struct RunOptions {
  std::optional<std::string> out_dir_override;
  int jobs = 1;
};

struct ExperimentSummary {
  std::filesystem::path out_dir;
  std::filesystem::path summary_path;
  std::vector<std::string> csv_files;  // relative to out_dir
  std::string json_text;
};

/// Executes each (optimizer, seed) pair independently, writes one CSV per
/// pair plus summary.json. Trace CSVs share the fixed header
///   seed,t,alpha,loss,grad_norm_sq,mean_gain,est_mse,regret
/// with empty cells for inapplicable columns, and identical configs
/// reproduce byte-identical files regardless of the jobs count.
ExperimentSummary run_experiment(const ExperimentConfig& cfg,
                                 const RunOptions& opts = {});

/// Writes plot_traces.py next to the summary: a standalone matplotlib
/// script over exactly the CSVs the summary lists. A listed CSV that does
/// not exist raises IoError naming the path.
std::filesystem::path emit_plot_script(
    const std::filesystem::path& summary_path);

/// Shortest round-trip decimal form of a 64-bit float (CSV cell format).
std::string format_double(double x);

}  // namespace sgdf
