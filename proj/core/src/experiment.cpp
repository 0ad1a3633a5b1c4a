#include "sgdf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sgdf/diagnostics.hpp"
#include "sgdf/errors.hpp"
#include "sgdf/langevin.hpp"

namespace sgdf {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::race:
      return "race";
    case ExperimentKind::regret:
      return "regret";
    case ExperimentKind::nonconvex_rate:
      return "nonconvex_rate";
    case ExperimentKind::fpss:
      return "fpss";
    case ExperimentKind::spectrum:
      return "spectrum";
    case ExperimentKind::estimator_variance:
      return "estimator_variance";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "race") return ExperimentKind::race;
  if (s == "regret") return ExperimentKind::regret;
  if (s == "nonconvex_rate") return ExperimentKind::nonconvex_rate;
  if (s == "fpss") return ExperimentKind::fpss;
  if (s == "spectrum") return ExperimentKind::spectrum;
  if (s == "estimator_variance") return ExperimentKind::estimator_variance;
  throw ConfigError("kind: unknown experiment kind '" + s + "'");
}

std::string optimizer_type(const OptimizerParams& params) {
  struct Visitor {
    std::string operator()(const SgdfHyperparams&) const { return "sgdf"; }
    std::string operator()(const SgdHyperparams&) const { return "sgd"; }
    std::string operator()(const AdamHyperparams&) const { return "adam"; }
    std::string operator()(const WienerAdamHyperparams&) const {
      return "wiener_adam";
    }
  };
  return std::visit(Visitor{}, params);
}

AnyOptimizer::AnyOptimizer(const OptimizerParams& params, std::size_t dim)
    : params_(params), state_(FilterState(dim)) {
  if (std::holds_alternative<SgdHyperparams>(params_)) {
    state_.emplace<SgdState>(dim);
  } else if (std::holds_alternative<AdamHyperparams>(params_)) {
    state_.emplace<AdamState>(dim);
  } else if (std::holds_alternative<WienerAdamHyperparams>(params_)) {
    state_.emplace<WienerAdamState>(dim);
  }
}

StepOutput AnyOptimizer::step(const ParamVector& params,
                              const ParamVector& grad) {
  if (auto* hp = std::get_if<SgdfHyperparams>(&params_)) {
    return sgdf_step(params, grad, std::get<FilterState>(state_), *hp);
  }
  if (auto* hp = std::get_if<SgdHyperparams>(&params_)) {
    return sgd_step(params, grad, std::get<SgdState>(state_), *hp);
  }
  if (auto* hp = std::get_if<AdamHyperparams>(&params_)) {
    return adam_step(params, grad, std::get<AdamState>(state_), *hp);
  }
  auto& hp = std::get<WienerAdamHyperparams>(params_);
  return wiener_adam_step(params, grad, std::get<WienerAdamState>(state_), hp);
}

std::unique_ptr<StochasticObjective> build_objective(
    const ObjectiveSpec& spec) {
  if (spec.type == "noisy_quadratic") {
    std::vector<double> eig = spec.eigenvalues;
    if (eig.empty()) {
      eig = log_spaced_eigenvalues(spec.dim, spec.eigen_min, spec.eigen_max);
    }
    return noisy_quadratic(std::move(eig), spec.noise_std);
  }
  if (spec.type == "noisy_rosenbrock") return noisy_rosenbrock(spec.noise_std);
  if (spec.type == "synthetic_logistic") return synthetic_logistic(spec.logistic);
  if (spec.type == "tiny_mlp") return tiny_mlp(spec.mlp);
  throw ConfigError("objective.type: unknown objective '" + spec.type + "'");
}

// ----------------------------------------------------------- json i/o ----

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& msg) {
  throw ConfigError(field + ": " + msg);
}

const json& require(const json& j, const std::string& field) {
  auto it = j.find(field);
  if (it == j.end()) field_error(field, "missing required field");
  return *it;
}

double num_field(const json& j, const std::string& field, double fallback) {
  auto it = j.find(field);
  if (it == j.end()) return fallback;
  if (!it->is_number()) field_error(field, "expected a number");
  return it->get<double>();
}

double req_num(const json& j, const std::string& field) {
  const json& v = require(j, field);
  if (!v.is_number()) field_error(field, "expected a number");
  return v.get<double>();
}

std::int64_t int_field(const json& j, const std::string& field,
                       std::int64_t fallback) {
  auto it = j.find(field);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) field_error(field, "expected an integer");
  return it->get<std::int64_t>();
}

std::string str_field(const json& j, const std::string& field,
                      const std::string& fallback) {
  auto it = j.find(field);
  if (it == j.end()) return fallback;
  if (!it->is_string()) field_error(field, "expected a string");
  return it->get<std::string>();
}

json schedule_to_json(const ScheduleSpec& s) {
  json j;
  switch (s.kind) {
    case ScheduleKind::constant:
      j["kind"] = "constant";
      break;
    case ScheduleKind::inv_sqrt:
      j["kind"] = "inv_sqrt";
      break;
    case ScheduleKind::step_decay:
      j["kind"] = "step_decay";
      j["decay_factor"] = s.decay_factor;
      j["milestones"] = s.milestones;
      break;
    case ScheduleKind::cosine:
      j["kind"] = "cosine";
      j["total_steps"] = s.total_steps;
      break;
  }
  return j;
}

ScheduleSpec schedule_from_json(const json& j, const std::string& ctx) {
  ScheduleSpec s;
  const std::string kind = str_field(j, "kind", "constant");
  if (kind == "constant") {
    s.kind = ScheduleKind::constant;
  } else if (kind == "inv_sqrt") {
    s.kind = ScheduleKind::inv_sqrt;
  } else if (kind == "step_decay") {
    s.kind = ScheduleKind::step_decay;
    s.decay_factor = num_field(j, "decay_factor", 0.1);
    if (auto it = j.find("milestones"); it != j.end()) {
      if (!it->is_array()) field_error(ctx + ".schedule.milestones", "array");
      s.milestones = it->get<std::vector<std::int64_t>>();
    }
    if (!(s.decay_factor > 0.0)) {
      field_error(ctx + ".schedule.decay_factor", "must be > 0");
    }
  } else if (kind == "cosine") {
    s.kind = ScheduleKind::cosine;
    s.total_steps = int_field(j, "total_steps", 0);
    if (s.total_steps < 1) {
      field_error(ctx + ".schedule.total_steps", "must be >= 1");
    }
  } else {
    field_error(ctx + ".schedule.kind", "unknown schedule '" + kind + "'");
  }
  return s;
}

OptimizerSpec optimizer_from_json(const json& j, std::size_t index) {
  const std::string ctx = "optimizers[" + std::to_string(index) + "]";
  if (!j.is_object()) field_error(ctx, "expected an object");
  const std::string type = str_field(j, "type", "");
  if (type.empty()) field_error(ctx + ".type", "missing required field");
  OptimizerSpec spec;
  spec.label = str_field(j, "label", type);
  ScheduleSpec schedule;
  if (auto it = j.find("schedule"); it != j.end()) {
    schedule = schedule_from_json(*it, ctx);
  }
  try {
    if (type == "sgdf") {
      SgdfHyperparams hp;
      hp.alpha = req_num(j, "alpha");
      hp.beta1 = num_field(j, "beta1", hp.beta1);
      hp.beta2 = num_field(j, "beta2", hp.beta2);
      hp.epsilon = num_field(j, "epsilon", hp.epsilon);
      hp.weight_decay = num_field(j, "weight_decay", 0.0);
      hp.schedule = schedule;
      validate(hp);
      spec.params = hp;
    } else if (type == "sgd") {
      SgdHyperparams hp;
      hp.alpha = req_num(j, "alpha");
      hp.momentum = num_field(j, "momentum", 0.0);
      hp.weight_decay = num_field(j, "weight_decay", 0.0);
      hp.schedule = schedule;
      validate(hp);
      spec.params = hp;
    } else if (type == "adam" || type == "wiener_adam") {
      double alpha = req_num(j, "alpha");
      double beta1 = num_field(j, "beta1", 0.9);
      double beta2 = num_field(j, "beta2", 0.999);
      double epsilon = num_field(j, "epsilon", 1e-8);
      double weight_decay = num_field(j, "weight_decay", 0.0);
      if (type == "adam") {
        AdamHyperparams hp;
        hp.alpha = alpha;
        hp.beta1 = beta1;
        hp.beta2 = beta2;
        hp.epsilon = epsilon;
        hp.weight_decay = weight_decay;
        hp.schedule = schedule;
        validate(hp);
        spec.params = hp;
      } else {
        WienerAdamHyperparams hp;
        hp.alpha = alpha;
        hp.beta1 = beta1;
        hp.beta2 = beta2;
        hp.epsilon = epsilon;
        hp.weight_decay = weight_decay;
        hp.schedule = schedule;
        if (auto it = j.find("gain_override"); it != j.end()) {
          if (!it->is_number()) field_error(ctx + ".gain_override", "number");
          hp.gain_override = it->get<double>();
        }
        validate(hp);
        spec.params = hp;
      }
    } else {
      field_error(ctx + ".type", "unknown optimizer '" + type + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    field_error(ctx, e.what());
  }
  return spec;
}

json optimizer_to_json(const OptimizerSpec& spec) {
  json j;
  j["type"] = optimizer_type(spec.params);
  j["label"] = spec.label;
  std::visit(
      [&](const auto& hp) {
        using T = std::decay_t<decltype(hp)>;
        j["alpha"] = hp.alpha;
        j["weight_decay"] = hp.weight_decay;
        j["schedule"] = schedule_to_json(hp.schedule);
        if constexpr (std::is_same_v<T, SgdHyperparams>) {
          j["momentum"] = hp.momentum;
        } else {
          j["beta1"] = hp.beta1;
          j["beta2"] = hp.beta2;
          j["epsilon"] = hp.epsilon;
        }
        if constexpr (std::is_same_v<T, WienerAdamHyperparams>) {
          if (hp.gain_override) j["gain_override"] = *hp.gain_override;
        }
      },
      spec.params);
  return j;
}

ObjectiveSpec objective_from_json(const json& j) {
  if (!j.is_object()) field_error("objective", "expected an object");
  ObjectiveSpec spec;
  spec.type = str_field(j, "type", "");
  if (spec.type.empty()) field_error("objective.type", "missing");
  if (spec.type == "noisy_quadratic") {
    spec.noise_std = num_field(j, "noise_std", 0.0);
    if (auto it = j.find("eigenvalues"); it != j.end()) {
      if (!it->is_array()) field_error("objective.eigenvalues", "array");
      spec.eigenvalues = it->get<std::vector<double>>();
      spec.dim = spec.eigenvalues.size();
    } else {
      spec.dim = static_cast<std::size_t>(int_field(j, "dim", 2));
      spec.eigen_min = num_field(j, "eigen_min", 1.0);
      spec.eigen_max = num_field(j, "eigen_max", 1.0);
    }
  } else if (spec.type == "noisy_rosenbrock") {
    spec.noise_std = num_field(j, "noise_std", 0.0);
    spec.dim = 2;
  } else if (spec.type == "synthetic_logistic") {
    spec.logistic.dim = static_cast<std::size_t>(int_field(j, "dim", 10));
    spec.logistic.n_samples =
        static_cast<std::size_t>(int_field(j, "n_samples", 200));
    spec.logistic.l2 = num_field(j, "l2", 0.05);
    spec.logistic.batch = static_cast<std::size_t>(int_field(j, "batch", 10));
    spec.logistic.data_seed =
        static_cast<std::uint64_t>(int_field(j, "data_seed", 1));
    spec.dim = spec.logistic.dim;
  } else if (spec.type == "tiny_mlp") {
    if (auto it = j.find("layer_sizes"); it != j.end()) {
      if (!it->is_array()) field_error("objective.layer_sizes", "array");
      spec.mlp.layer_sizes = it->get<std::vector<std::size_t>>();
    }
    spec.mlp.n_samples =
        static_cast<std::size_t>(int_field(j, "n_samples", 200));
    spec.mlp.batch = static_cast<std::size_t>(int_field(j, "batch", 16));
    spec.mlp.data_seed =
        static_cast<std::uint64_t>(int_field(j, "data_seed", 1));
    spec.mlp.data_noise = num_field(j, "data_noise", 0.15);
  } else {
    field_error("objective.type", "unknown objective '" + spec.type + "'");
  }
  // construction performs the deep validation (eigenvalues, sizes, ...)
  try {
    build_objective(spec);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    field_error("objective", e.what());
  }
  return spec;
}

json objective_to_json(const ObjectiveSpec& spec) {
  json j;
  j["type"] = spec.type;
  if (spec.type == "noisy_quadratic") {
    j["noise_std"] = spec.noise_std;
    if (!spec.eigenvalues.empty()) {
      j["eigenvalues"] = spec.eigenvalues;
    } else {
      j["dim"] = spec.dim;
      j["eigen_min"] = spec.eigen_min;
      j["eigen_max"] = spec.eigen_max;
    }
  } else if (spec.type == "noisy_rosenbrock") {
    j["noise_std"] = spec.noise_std;
  } else if (spec.type == "synthetic_logistic") {
    j["dim"] = spec.logistic.dim;
    j["n_samples"] = spec.logistic.n_samples;
    j["l2"] = spec.logistic.l2;
    j["batch"] = spec.logistic.batch;
    j["data_seed"] = spec.logistic.data_seed;
  } else if (spec.type == "tiny_mlp") {
    j["layer_sizes"] = spec.mlp.layer_sizes;
    j["n_samples"] = spec.mlp.n_samples;
    j["batch"] = spec.mlp.batch;
    j["data_seed"] = spec.mlp.data_seed;
    j["data_noise"] = spec.mlp.data_noise;
  }
  return j;
}

DriftKind drift_from_string(const std::string& s) {
  if (s == "constant") return DriftKind::constant;
  if (s == "alternating") return DriftKind::alternating;
  if (s == "random_walk") return DriftKind::random_walk;
  field_error("stream.drift", "unknown drift '" + s + "'");
}

std::string drift_to_string(DriftKind k) {
  switch (k) {
    case DriftKind::constant:
      return "constant";
    case DriftKind::alternating:
      return "alternating";
    case DriftKind::random_walk:
      return "random_walk";
  }
  return "unknown";
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");

  ExperimentConfig cfg;
  cfg.version = static_cast<int>(int_field(j, "version", 0));
  if (cfg.version != 1) field_error("version", "must be 1");
  cfg.kind = experiment_kind_from_string(
      str_field(j, "kind", ""));

  const json& seeds = require(j, "seeds");
  if (!seeds.is_array() || seeds.empty()) {
    field_error("seeds", "need at least one seed");
  }
  cfg.seeds = seeds.get<std::vector<std::uint64_t>>();

  cfg.horizon = int_field(j, "horizon", 1000);
  if (cfg.horizon < 1) field_error("horizon", "must be >= 1");
  cfg.record_every = int_field(j, "record_every", 1);
  if (cfg.record_every < 1) field_error("record_every", "must be >= 1");
  cfg.projection_radius = num_field(j, "projection_radius", 0.0);
  if (cfg.projection_radius < 0.0) {
    field_error("projection_radius", "must be >= 0");
  }
  cfg.out_dir = str_field(j, "out_dir", "out");

  const bool needs_optimizers = cfg.kind == ExperimentKind::race ||
                                cfg.kind == ExperimentKind::regret ||
                                cfg.kind == ExperimentKind::nonconvex_rate;
  if (needs_optimizers) {
    const json& opts = require(j, "optimizers");
    if (!opts.is_array() || opts.empty()) {
      field_error("optimizers", "need at least one optimizer");
    }
    for (std::size_t i = 0; i < opts.size(); ++i) {
      cfg.optimizers.push_back(optimizer_from_json(opts[i], i));
    }
    for (std::size_t i = 0; i < cfg.optimizers.size(); ++i) {
      for (std::size_t k = i + 1; k < cfg.optimizers.size(); ++k) {
        if (cfg.optimizers[i].label == cfg.optimizers[k].label) {
          field_error("optimizers[" + std::to_string(k) + "].label",
                      "duplicate label '" + cfg.optimizers[k].label + "'");
        }
      }
    }
  }

  switch (cfg.kind) {
    case ExperimentKind::race:
      cfg.objective = objective_from_json(require(j, "objective"));
      break;
    case ExperimentKind::nonconvex_rate:
      cfg.objective = objective_from_json(require(j, "objective"));
      break;
    case ExperimentKind::spectrum: {
      cfg.objective = objective_from_json(require(j, "objective"));
      const json& sj = require(j, "spectrum");
      cfg.spectrum.top_k =
          static_cast<std::size_t>(int_field(sj, "top_k", 5));
      cfg.spectrum.probes = int_field(sj, "probes", 1000);
      cfg.spectrum.max_iters =
          static_cast<int>(int_field(sj, "max_iters", 10000));
      cfg.spectrum.tol = num_field(sj, "tol", 1e-9);
      cfg.spectrum.point = str_field(sj, "point", "initial");
      if (cfg.spectrum.point != "initial" && cfg.spectrum.point != "optimum") {
        field_error("spectrum.point", "must be 'initial' or 'optimum'");
      }
      break;
    }
    case ExperimentKind::regret: {
      const json& sj = require(j, "stream");
      cfg.stream.dim = static_cast<std::size_t>(int_field(sj, "dim", 4));
      cfg.stream.drift =
          drift_from_string(str_field(sj, "drift", "random_walk"));
      cfg.stream.radius = num_field(sj, "radius", 1.0);
      cfg.stream.drift_step = num_field(sj, "drift_step", 0.05);
      if (cfg.stream.dim < 1) field_error("stream.dim", "must be >= 1");
      break;
    }
    case ExperimentKind::fpss: {
      const json& fj = require(j, "fpss");
      cfg.fpss.potential = str_field(fj, "potential", "double_well");
      if (cfg.fpss.potential != "double_well" &&
          cfg.fpss.potential != "quadratic_well") {
        field_error("fpss.potential", "unknown potential");
      }
      cfg.fpss.domain_lo = num_field(fj, "domain_lo",
                                     cfg.fpss.potential == "double_well"
                                         ? -3.0
                                         : -6.0);
      cfg.fpss.domain_hi = num_field(fj, "domain_hi",
                                     cfg.fpss.potential == "double_well"
                                         ? 3.0
                                         : 6.0);
      cfg.fpss.diffusion = req_num(fj, "diffusion");
      cfg.fpss.variance_floor = num_field(fj, "variance_floor", 0.25);
      cfg.fpss.dt = num_field(fj, "dt", 1e-3);
      cfg.fpss.samples = int_field(fj, "samples", 100000);
      cfg.fpss.burn_in = int_field(fj, "burn_in", 100000);
      cfg.fpss.thin = int_field(fj, "thin", 1);
      cfg.fpss.bins = static_cast<int>(int_field(fj, "bins", 60));
      if (!(cfg.fpss.variance_floor > 0.0)) {
        field_error("fpss.variance_floor", "must be > 0");
      }
      if (!(cfg.fpss.diffusion >= cfg.fpss.variance_floor)) {
        field_error("fpss.diffusion", "must be >= variance_floor");
      }
      if (!(cfg.fpss.dt > 0.0)) field_error("fpss.dt", "must be > 0");
      if (cfg.fpss.bins < 10) field_error("fpss.bins", "must be >= 10");
      break;
    }
    case ExperimentKind::estimator_variance: {
      const json& ej = require(j, "estimator_variance");
      cfg.estvar.mu = num_field(ej, "mu", 0.7);
      cfg.estvar.sigma = num_field(ej, "sigma", 1.0);
      cfg.estvar.beta1 = num_field(ej, "beta1", 0.9);
      cfg.estvar.beta2 = num_field(ej, "beta2", 0.999);
      cfg.estvar.epsilon = num_field(ej, "epsilon", 1e-8);
      cfg.estvar.window_start = int_field(ej, "window_start", 500);
      if (!(cfg.estvar.sigma >= 0.0)) field_error("estimator_variance.sigma",
                                                  "must be >= 0");
      if (!(cfg.estvar.beta1 >= 0.0 && cfg.estvar.beta1 < 1.0)) {
        field_error("estimator_variance.beta1", "must be in [0,1)");
      }
      if (!(cfg.estvar.beta2 >= 0.0 && cfg.estvar.beta2 < 1.0)) {
        field_error("estimator_variance.beta2", "must be in [0,1)");
      }
      if (cfg.estvar.window_start < 1 || cfg.estvar.window_start > cfg.horizon) {
        field_error("estimator_variance.window_start", "must be in [1, horizon]");
      }
      break;
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json j;
  j["version"] = cfg.version;
  j["kind"] = to_string(cfg.kind);
  j["seeds"] = cfg.seeds;
  j["horizon"] = cfg.horizon;
  j["record_every"] = cfg.record_every;
  j["projection_radius"] = cfg.projection_radius;
  j["out_dir"] = cfg.out_dir;
  if (!cfg.optimizers.empty()) {
    json arr = json::array();
    for (const auto& o : cfg.optimizers) arr.push_back(optimizer_to_json(o));
    j["optimizers"] = arr;
  }
  switch (cfg.kind) {
    case ExperimentKind::race:
    case ExperimentKind::nonconvex_rate:
      j["objective"] = objective_to_json(cfg.objective);
      break;
    case ExperimentKind::spectrum:
      j["objective"] = objective_to_json(cfg.objective);
      j["spectrum"] = {{"top_k", cfg.spectrum.top_k},
                       {"probes", cfg.spectrum.probes},
                       {"max_iters", cfg.spectrum.max_iters},
                       {"tol", cfg.spectrum.tol},
                       {"point", cfg.spectrum.point}};
      break;
    case ExperimentKind::regret:
      j["stream"] = {{"dim", cfg.stream.dim},
                     {"drift", drift_to_string(cfg.stream.drift)},
                     {"radius", cfg.stream.radius},
                     {"drift_step", cfg.stream.drift_step}};
      break;
    case ExperimentKind::fpss:
      j["fpss"] = {{"potential", cfg.fpss.potential},
                   {"domain_lo", cfg.fpss.domain_lo},
                   {"domain_hi", cfg.fpss.domain_hi},
                   {"diffusion", cfg.fpss.diffusion},
                   {"variance_floor", cfg.fpss.variance_floor},
                   {"dt", cfg.fpss.dt},
                   {"samples", cfg.fpss.samples},
                   {"burn_in", cfg.fpss.burn_in},
                   {"thin", cfg.fpss.thin},
                   {"bins", cfg.fpss.bins}};
      break;
    case ExperimentKind::estimator_variance:
      j["estimator_variance"] = {{"mu", cfg.estvar.mu},
                                 {"sigma", cfg.estvar.sigma},
                                 {"beta1", cfg.estvar.beta1},
                                 {"beta2", cfg.estvar.beta2},
                                 {"epsilon", cfg.estvar.epsilon},
                                 {"window_start", cfg.estvar.window_start}};
      break;
  }
  return j.dump(2) + "\n";
}

// ------------------------------------------------------------- runner ----

std::string format_double(double x) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, p);
}

namespace {

struct Cell {
  std::optional<double> value;
};

std::string csv_row(std::uint64_t seed, std::int64_t t, Cell alpha, Cell loss,
                    Cell grad_norm_sq, Cell mean_gain, Cell est_mse,
                    Cell regret) {
  std::string row = std::to_string(seed) + "," + std::to_string(t);
  for (const Cell& c : {alpha, loss, grad_norm_sq, mean_gain, est_mse, regret}) {
    row.push_back(',');
    if (c.value) row += format_double(*c.value);
  }
  row.push_back('\n');
  return row;
}

constexpr const char* kTraceHeader =
    "seed,t,alpha,loss,grad_norm_sq,mean_gain,est_mse,regret\n";

std::string sanitize_label(const std::string& label) {
  std::string out;
  for (char c : label) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  }
  return out.empty() ? "opt" : out;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct RunArtifact {
  std::string filename;  // relative; empty when the run emits no file
  std::string content;
  json stats;
};

void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn) {
  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

bool should_record(std::int64_t t, std::int64_t horizon,
                   std::int64_t record_every) {
  return (t - 1) % record_every == 0 || t == horizon;
}

// One (optimizer, seed) pair on a stochastic objective.
RunArtifact run_objective_trace(const StochasticObjective& obj,
                                const OptimizerSpec& spec, std::uint64_t seed,
                                const ExperimentConfig& cfg) {
  const std::size_t d = obj.dim();
  ParamVector theta = obj.initial_point();
  AnyOptimizer opt(spec.params, d);
  RngStream noise(seed, /*stream_id=*/0);

  std::string csv = kTraceHeader;
  ConvergenceLedger ledger;
  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    const bool rec = should_record(t, cfg.horizon, cfg.record_every);
    double loss = 0.0, gns = 0.0;
    ParamVector tg;
    if (rec) {
      loss = obj.loss(theta);
      tg = obj.true_grad(theta);
      gns = norm2_sq(tg);
      ledger.record_step(t, loss, gns);
    }
    const ParamVector g = obj.noisy_grad(theta, noise);
    const StepOutput out = opt.step(theta, g);
    if (rec) {
      Cell gain_cell, mse_cell;
      if (!out.gain.empty()) gain_cell.value = mean(out.gain);
      mse_cell.value =
          norm2_sq(sub(out.filtered_grad, tg)) / static_cast<double>(d);
      csv += csv_row(seed, t, {out.alpha_t}, {loss}, {gns}, gain_cell,
                     mse_cell, {});
    }
    theta = out.new_params;
    if (cfg.projection_radius > 0.0) {
      theta = project_to_ball(theta, cfg.projection_radius);
    }
  }

  RunArtifact art;
  art.filename =
      sanitize_label(spec.label) + "__seed" + std::to_string(seed) + ".csv";
  art.content = std::move(csv);
  art.stats["final_loss"] = obj.loss(theta);
  art.stats["final_grad_norm_sq"] = norm2_sq(obj.true_grad(theta));
  art.stats["running_min_grad_norm_sq"] = ledger.latest().running_min;
  return art;
}

RunArtifact run_regret_trace(const OptimizerSpec& spec, std::uint64_t seed,
                             const ExperimentConfig& cfg) {
  const OnlineConvexStream stream =
      convex_stream(cfg.stream.drift, cfg.stream.dim, cfg.horizon,
                    cfg.stream.radius, cfg.stream.drift_step, seed);
  const std::size_t d = stream.dim();
  ParamVector theta = zeros(d);
  AnyOptimizer opt(spec.params, d);

  std::string csv = kTraceHeader;
  ConvergenceLedger ledger;
  json regret_series = json::array();
  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    const double loss = stream.loss(t, theta);
    const ParamVector g = stream.grad(t, theta);
    ledger.record_step(t, loss, norm2_sq(g), stream.comparator_loss(t));
    const StepOutput out = opt.step(theta, g);
    if (should_record(t, cfg.horizon, cfg.record_every)) {
      Cell gain_cell;
      if (!out.gain.empty()) gain_cell.value = mean(out.gain);
      csv += csv_row(seed, t, {out.alpha_t}, {loss}, {norm2_sq(g)}, gain_cell,
                     {}, {ledger.latest().regret});
    }
    theta = out.new_params;
    if (cfg.projection_radius > 0.0) {
      theta = project_to_ball(theta, cfg.projection_radius);
    }
  }

  RunArtifact art;
  art.filename =
      sanitize_label(spec.label) + "__seed" + std::to_string(seed) + ".csv";
  art.content = std::move(csv);
  art.stats["final_regret"] = ledger.latest().regret;
  // mean-over-seeds fitting happens at summary time; keep the series
  for (const auto& [t, r] : ledger.regret_series()) {
    if (t >= 10 && (t % 10 == 0 || t == cfg.horizon)) {
      regret_series.push_back({t, r});
    }
  }
  art.stats["regret_series"] = std::move(regret_series);
  return art;
}

RunArtifact run_fpss(std::uint64_t seed, const ExperimentConfig& cfg) {
  Potential1D pot = cfg.fpss.potential == "double_well"
                        ? double_well(cfg.fpss.domain_lo, cfg.fpss.domain_hi)
                        : quadratic_well(cfg.fpss.domain_lo,
                                         cfg.fpss.domain_hi);
  RngStream rng(seed, /*stream_id=*/0);
  const std::vector<double> samples = langevin_sample(
      pot, cfg.fpss.diffusion, cfg.fpss.variance_floor, cfg.fpss.dt,
      cfg.fpss.samples, cfg.fpss.burn_in, rng, cfg.fpss.thin);
  const std::vector<double> analytic =
      analytic_stationary(pot, cfg.fpss.diffusion, cfg.fpss.bins);
  const StationaryCheck check =
      stationarity_report(samples, pot, analytic, cfg.fpss.burn_in);

  std::string csv = "bin_lo,bin_hi,empirical_p,analytic_p\n";
  const double width = (pot.hi - pot.lo) / static_cast<double>(cfg.fpss.bins);
  const double inv_n = 1.0 / static_cast<double>(check.samples);
  for (int b = 0; b < cfg.fpss.bins; ++b) {
    const double lo = pot.lo + width * b;
    csv += format_double(lo) + "," + format_double(lo + width) + "," +
           format_double(static_cast<double>(check.empirical_hist[b]) * inv_n) +
           "," + format_double(check.analytic_density[b]) + "\n";
  }

  RunArtifact art;
  art.filename = "hist__seed" + std::to_string(seed) + ".csv";
  art.content = std::move(csv);
  art.stats["tv_distance"] = check.tv_distance;
  art.stats["mode_crossings"] = count_mode_crossings(samples);
  return art;
}

RunArtifact run_spectrum(const StochasticObjective& obj, std::uint64_t seed,
                         const ExperimentConfig& cfg) {
  if (!obj.has_hvp()) {
    throw ConfigError("objective: spectrum experiments need an hvp");
  }
  ParamVector theta = obj.initial_point();
  if (cfg.spectrum.point == "optimum") {
    auto opt = obj.optimum();
    if (!opt) throw ConfigError("spectrum.point: objective has no optimum");
    theta = *opt;
  }
  LinearOperator op = [&](const ParamVector& v) { return obj.hvp(theta, v); };
  PowerIterationOptions popts;
  popts.max_iters = cfg.spectrum.max_iters;
  popts.tol = cfg.spectrum.tol;
  RngStream rng(seed, /*stream_id=*/0);
  const SpectrumReport report = spectrum_report(
      op, obj.dim(), cfg.spectrum.top_k, cfg.spectrum.probes, popts, rng);

  RunArtifact art;
  art.stats["top_eigenvalues"] = report.top_eigenvalues;
  art.stats["converged"] = report.converged;
  art.stats["trace_estimate"] = report.trace_estimate;
  art.stats["iterations_used"] = report.iterations_used;
  return art;
}

RunArtifact run_estimator_variance(std::uint64_t seed,
                                   const ExperimentConfig& cfg) {
  const auto& ev = cfg.estvar;
  RngStream rng(seed, /*stream_id=*/0);
  FilterState state(1);
  std::string csv = kTraceHeader;
  double mse_raw = 0.0, mse_ghat = 0.0, mse_mhat = 0.0;
  std::int64_t count = 0;
  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    const ParamVector g = {ev.mu + ev.sigma * rng.normal()};
    const FilterOutput f =
        filter_update(g, state, ev.beta1, ev.beta2, ev.epsilon);
    const double err_raw = g[0] - ev.mu;
    const double err_ghat = f.g_hat[0] - ev.mu;
    const double err_mhat = f.m_hat[0] - ev.mu;
    if (t >= ev.window_start) {
      mse_raw += err_raw * err_raw;
      mse_ghat += err_ghat * err_ghat;
      mse_mhat += err_mhat * err_mhat;
      ++count;
    }
    if (should_record(t, cfg.horizon, cfg.record_every)) {
      csv += csv_row(seed, t, {}, {}, {}, {f.gain[0]},
                     {err_ghat * err_ghat}, {});
    }
  }
  const double inv = count > 0 ? 1.0 / static_cast<double>(count) : 0.0;

  RunArtifact art;
  art.filename = "filter__seed" + std::to_string(seed) + ".csv";
  art.content = std::move(csv);
  art.stats["mse_raw"] = mse_raw * inv;
  art.stats["mse_filtered"] = mse_ghat * inv;
  art.stats["mse_momentum"] = mse_mhat * inv;
  return art;
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& cfg,
                                 const RunOptions& opts) {
  namespace fs = std::filesystem;
  const fs::path out_dir = opts.out_dir_override.value_or(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir.string());

  const bool per_optimizer = cfg.kind == ExperimentKind::race ||
                             cfg.kind == ExperimentKind::regret ||
                             cfg.kind == ExperimentKind::nonconvex_rate;

  // task grid in deterministic order: optimizer-major, then seed
  struct Task {
    std::size_t opt_index;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  if (per_optimizer) {
    for (std::size_t o = 0; o < cfg.optimizers.size(); ++o) {
      for (std::uint64_t s : cfg.seeds) tasks.push_back({o, s});
    }
  } else {
    for (std::uint64_t s : cfg.seeds) tasks.push_back({0, s});
  }

  std::unique_ptr<StochasticObjective> objective;
  if (cfg.kind == ExperimentKind::race ||
      cfg.kind == ExperimentKind::nonconvex_rate ||
      cfg.kind == ExperimentKind::spectrum) {
    objective = build_objective(cfg.objective);
  }

  std::vector<RunArtifact> artifacts(tasks.size());
  parallel_for(tasks.size(), opts.jobs, [&](std::size_t i) {
    const Task& task = tasks[i];
    switch (cfg.kind) {
      case ExperimentKind::race:
      case ExperimentKind::nonconvex_rate:
        artifacts[i] = run_objective_trace(
            *objective, cfg.optimizers[task.opt_index], task.seed, cfg);
        break;
      case ExperimentKind::regret:
        artifacts[i] =
            run_regret_trace(cfg.optimizers[task.opt_index], task.seed, cfg);
        break;
      case ExperimentKind::fpss:
        artifacts[i] = run_fpss(task.seed, cfg);
        break;
      case ExperimentKind::spectrum:
        artifacts[i] = run_spectrum(*objective, task.seed, cfg);
        break;
      case ExperimentKind::estimator_variance:
        artifacts[i] = run_estimator_variance(task.seed, cfg);
        break;
    }
  });

  // single writer, deterministic order
  ExperimentSummary summary;
  summary.out_dir = out_dir;
  for (const auto& art : artifacts) {
    if (art.filename.empty()) continue;
    const fs::path path = out_dir / art.filename;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << art.content;
    summary.csv_files.push_back(art.filename);
  }

  json doc;
  doc["kind"] = to_string(cfg.kind);
  doc["horizon"] = cfg.horizon;
  doc["seeds"] = cfg.seeds;
  doc["csv_files"] = summary.csv_files;

  if (per_optimizer) {
    json per_opt = json::object();
    for (std::size_t o = 0; o < cfg.optimizers.size(); ++o) {
      json entry;
      std::vector<double> finals;
      std::vector<double> regrets;
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].opt_index != o) continue;
        const json& st = artifacts[i].stats;
        if (st.contains("final_loss")) {
          finals.push_back(st["final_loss"].get<double>());
        }
        if (st.contains("final_regret")) {
          regrets.push_back(st["final_regret"].get<double>());
        }
      }
      if (!finals.empty()) entry["median_final_loss"] = median(finals);
      if (!regrets.empty()) entry["median_final_regret"] = median(regrets);

      if (cfg.kind == ExperimentKind::regret) {
        // mean regret over seeds on the shared recording grid, then the
        // sqrt-T envelope fit
        std::vector<std::pair<std::int64_t, double>> mean_series;
        bool first = true;
        std::size_t runs = 0;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
          if (tasks[i].opt_index != o) continue;
          const json& series = artifacts[i].stats["regret_series"];
          if (first) {
            for (const auto& p : series) {
              mean_series.emplace_back(p[0].get<std::int64_t>(),
                                       p[1].get<double>());
            }
            first = false;
          } else {
            for (std::size_t k = 0; k < mean_series.size(); ++k) {
              mean_series[k].second += series[k][1].get<double>();
            }
          }
          ++runs;
        }
        for (auto& [t, r] : mean_series) {
          r /= static_cast<double>(runs);
        }
        if (!mean_series.empty() &&
            mean_series.back().first >= 100 * mean_series.front().first) {
          const RateFitResult fit = rate_fit(mean_series, RateModel::sqrt_t);
          entry["rate_fit"] = {{"model", "c*sqrt(T)"},
                               {"c_hat", fit.c_hat},
                               {"max_violation_ratio",
                                fit.max_violation_ratio}};
        }
      }
      per_opt[cfg.optimizers[o].label] = entry;
    }
    doc["optimizers"] = per_opt;
  } else {
    json runs = json::array();
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      json entry = artifacts[i].stats;
      entry["seed"] = tasks[i].seed;
      runs.push_back(entry);
    }
    doc["runs"] = runs;
    if (cfg.kind == ExperimentKind::fpss) {
      std::vector<double> tvs;
      for (const auto& art : artifacts) {
        tvs.push_back(art.stats["tv_distance"].get<double>());
      }
      doc["median_tv_distance"] = median(tvs);
    }
    if (cfg.kind == ExperimentKind::estimator_variance) {
      std::vector<double> ratios;
      for (const auto& art : artifacts) {
        ratios.push_back(art.stats["mse_filtered"].get<double>() /
                         art.stats["mse_raw"].get<double>());
      }
      doc["median_mse_ratio_filtered_vs_raw"] = median(ratios);
    }
  }

  summary.json_text = doc.dump(2) + "\n";
  summary.summary_path = out_dir / "summary.json";
  std::ofstream out(summary.summary_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + summary.summary_path.string());
  out << summary.json_text;
  return summary;
}

std::filesystem::path emit_plot_script(
    const std::filesystem::path& summary_path) {
  namespace fs = std::filesystem;
  std::ifstream in(summary_path);
  if (!in) throw IoError("cannot open summary: " + summary_path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("summary is not valid JSON: " + std::string(e.what()));
  }
  const fs::path dir = summary_path.parent_path();
  std::vector<std::string> files;
  if (doc.contains("csv_files")) {
    files = doc["csv_files"].get<std::vector<std::string>>();
  }
  for (const auto& f : files) {
    if (!fs::exists(dir / f)) {
      throw IoError("summary references missing CSV: " + (dir / f).string());
    }
  }

  std::ostringstream py;
  py << "#!/usr/bin/env python3\n"
     << "# Generated by sgdf_bench plot. Renders the traces listed in the\n"
     << "# experiment summary; run from this directory.\n"
     << "import csv\n"
     << "import collections\n"
     << "import matplotlib\n"
     << "matplotlib.use('Agg')\n"
     << "import matplotlib.pyplot as plt\n\n"
     << "FILES = [\n";
  for (const auto& f : files) py << "    " << json(f).dump() << ",\n";
  py << "]\n\n";
  if (files.empty()) {
    py << "# warning: the experiment produced no trace files; nothing to "
          "plot\n";
  }
  py << R"PY(
def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))

trace_groups = collections.defaultdict(list)
hist_files = []
for path in FILES:
    with open(path) as fh:
        header = fh.readline()
    if header.startswith('bin_lo'):
        hist_files.append(path)
    else:
        trace_groups[path.split('__seed')[0]].append(path)

if trace_groups:
    fig, ax = plt.subplots(figsize=(7, 5))
    for label, paths in sorted(trace_groups.items()):
        series = collections.defaultdict(list)
        for path in paths:
            for row in read_rows(path):
                if row['loss']:
                    series[int(row['t'])].append(float(row['loss']))
        ts = sorted(series)
        med = [sorted(series[t])[len(series[t]) // 2] for t in ts]
        ax.plot(ts, med, label=label)
    ax.set_xlabel('step')
    ax.set_ylabel('median loss')
    ax.set_yscale('log')
    ax.legend()
    fig.tight_layout()
    fig.savefig('plot_traces.png', dpi=150)
    print('wrote plot_traces.png')

if hist_files:
    fig, ax = plt.subplots(figsize=(7, 5))
    rows = read_rows(hist_files[0])
    mids = [(float(r['bin_lo']) + float(r['bin_hi'])) / 2 for r in rows]
    ax.plot(mids, [float(r['analytic_p']) for r in rows], label='analytic')
    ax.plot(mids, [float(r['empirical_p']) for r in rows], 'o', ms=2,
            label='empirical')
    ax.set_xlabel('theta')
    ax.set_ylabel('bin probability')
    ax.legend()
    fig.tight_layout()
    fig.savefig('plot_stationary.png', dpi=150)
    print('wrote plot_stationary.png')

if not trace_groups and not hist_files:
    print('nothing to plot')
)PY";

  const fs::path script = dir / "plot_traces.py";
  std::ofstream out(script, std::ios::binary);
  if (!out) throw IoError("cannot write " + script.string());
  out << py.str();
  return script;
}

}  // namespace sgdf
