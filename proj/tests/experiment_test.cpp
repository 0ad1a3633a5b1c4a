#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sgdf/acceptance.hpp"
#include "sgdf/errors.hpp"
#include "sgdf/experiment.hpp"

using namespace sgdf;
namespace fs = std::filesystem;

namespace {

const char* kRaceConfig = R"({
  "version": 1,
  "kind": "race",
  "seeds": [1, 2, 3],
  "horizon": 50,
  "record_every": 1,
  "out_dir": "race_out",
  "objective": {"type": "noisy_quadratic", "dim": 6,
                "eigen_min": 0.2, "eigen_max": 5.0, "noise_std": 0.4},
  "optimizers": [
    {"type": "sgdf", "label": "sgdf", "alpha": 0.05},
    {"type": "sgd", "label": "sgd", "alpha": 0.05}
  ]
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sgdf_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("config round-trip is the identity") {
  const ExperimentConfig first = parse_config(kRaceConfig);
  const std::string canon = serialize_config(first);
  const ExperimentConfig second = parse_config(canon);
  CHECK(serialize_config(second) == canon);

  const char* regret_cfg = R"({
    "version": 1, "kind": "regret", "seeds": [7],
    "horizon": 2000, "projection_radius": 2.0, "out_dir": "r",
    "stream": {"dim": 4, "drift": "random_walk", "radius": 1.0,
               "drift_step": 0.05},
    "optimizers": [{"type": "sgdf", "label": "f", "alpha": 0.5,
                    "schedule": {"kind": "inv_sqrt"}}]
  })";
  const std::string canon2 = serialize_config(parse_config(regret_cfg));
  CHECK(serialize_config(parse_config(canon2)) == canon2);

  const char* fpss_cfg = R"({
    "version": 1, "kind": "fpss", "seeds": [1],
    "out_dir": "f",
    "fpss": {"potential": "double_well", "diffusion": 0.5,
             "variance_floor": 0.25, "dt": 0.001, "samples": 1000,
             "burn_in": 100, "thin": 2, "bins": 20}
  })";
  const std::string canon3 = serialize_config(parse_config(fpss_cfg));
  CHECK(serialize_config(parse_config(canon3)) == canon3);
}

TEST_CASE("config violations name the offending field") {
  const char* bad_beta = R"({
    "version": 1, "kind": "race", "seeds": [1], "horizon": 10,
    "objective": {"type": "noisy_rosenbrock", "noise_std": 0.1},
    "optimizers": [{"type": "sgdf", "label": "x", "alpha": 0.1,
                    "beta1": 1.0}]
  })";
  try {
    (void)parse_config(bad_beta);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("beta1") != std::string::npos);
  }

  CHECK_THROWS_AS((void)parse_config("{\"version\": 1}"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("not json"), ConfigError);

  const char* no_seeds = R"({
    "version": 1, "kind": "race", "seeds": [], "horizon": 10,
    "objective": {"type": "noisy_rosenbrock"},
    "optimizers": [{"type": "sgd", "label": "x", "alpha": 0.1}]
  })";
  CHECK_THROWS_AS((void)parse_config(no_seeds), ConfigError);

  const char* dup_labels = R"({
    "version": 1, "kind": "race", "seeds": [1], "horizon": 10,
    "objective": {"type": "noisy_rosenbrock"},
    "optimizers": [{"type": "sgd", "label": "x", "alpha": 0.1},
                   {"type": "sgdf", "label": "x", "alpha": 0.1}]
  })";
  CHECK_THROWS_AS((void)parse_config(dup_labels), ConfigError);
}

TEST_CASE("race experiment writes one csv per (optimizer, seed)") {
  const fs::path dir = fresh_dir("race");
  ExperimentConfig cfg = parse_config(kRaceConfig);
  RunOptions opts;
  opts.out_dir_override = dir.string();
  const ExperimentSummary summary = run_experiment(cfg, opts);

  CHECK(summary.csv_files.size() == 6);  // 2 optimizers x 3 seeds
  for (const auto& f : summary.csv_files) {
    CHECK(fs::exists(dir / f));
    const std::string text = slurp(dir / f);
    CHECK(text.rfind("seed,t,alpha,loss,grad_norm_sq,mean_gain,est_mse,regret\n",
                     0) == 0);
  }
  CHECK(fs::exists(summary.summary_path));
}

TEST_CASE("identical configs reproduce byte-identical outputs") {
  ExperimentConfig cfg = parse_config(kRaceConfig);
  const fs::path d1 = fresh_dir("det1");
  const fs::path d2 = fresh_dir("det2");
  RunOptions o1, o2;
  o1.out_dir_override = d1.string();
  o2.out_dir_override = d2.string();
  o2.jobs = 3;  // parallel run must merge into the same bytes
  const ExperimentSummary s1 = run_experiment(cfg, o1);
  const ExperimentSummary s2 = run_experiment(cfg, o2);
  REQUIRE(s1.csv_files == s2.csv_files);
  for (const auto& f : s1.csv_files) {
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  CHECK(slurp(s1.summary_path) == slurp(s2.summary_path));
}

TEST_CASE("estimator variance experiment reports the filter advantage") {
  const char* cfg_text = R"({
    "version": 1, "kind": "estimator_variance", "seeds": [1,2,3,4,5],
    "horizon": 3000, "record_every": 100, "out_dir": "ev",
    "estimator_variance": {"mu": 0.7, "sigma": 1.0, "window_start": 500}
  })";
  const fs::path dir = fresh_dir("estvar");
  RunOptions opts;
  opts.out_dir_override = dir.string();
  const ExperimentSummary summary =
      run_experiment(parse_config(cfg_text), opts);
  const std::string text = slurp(summary.summary_path);
  CHECK(text.find("median_mse_ratio_filtered_vs_raw") != std::string::npos);
}

TEST_CASE("spectrum experiment recovers planted quadratic eigenvalues") {
  const char* cfg_text = R"({
    "version": 1, "kind": "spectrum", "seeds": [1],
    "horizon": 1, "out_dir": "sp",
    "objective": {"type": "noisy_quadratic",
                  "eigenvalues": [9.0, 4.0, 1.0], "noise_std": 0.0},
    "spectrum": {"top_k": 2, "probes": 2000, "tol": 1e-10,
                 "max_iters": 5000, "point": "optimum"}
  })";
  const fs::path dir = fresh_dir("spectrum");
  RunOptions opts;
  opts.out_dir_override = dir.string();
  const ExperimentSummary summary =
      run_experiment(parse_config(cfg_text), opts);
  const std::string text = slurp(summary.summary_path);
  CHECK(text.find("9.0") != std::string::npos);
  CHECK(summary.csv_files.empty());

  // an empty csv list still yields a valid plot script
  const fs::path script = emit_plot_script(summary.summary_path);
  CHECK(fs::exists(script));
  CHECK(slurp(script).find("nothing to plot") != std::string::npos);
}

TEST_CASE("plot script flags a missing csv") {
  const fs::path dir = fresh_dir("plot_missing");
  {
    std::ofstream out(dir / "summary.json");
    out << R"({"csv_files": ["gone__seed1.csv"]})";
  }
  try {
    (void)emit_plot_script(dir / "summary.json");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("gone__seed1.csv") != std::string::npos);
  }
}

TEST_CASE("plot script renders the traces it was given") {
  const fs::path dir = fresh_dir("plot_ok");
  ExperimentConfig cfg = parse_config(kRaceConfig);
  RunOptions opts;
  opts.out_dir_override = dir.string();
  const ExperimentSummary summary = run_experiment(cfg, opts);
  const fs::path script = emit_plot_script(summary.summary_path);
  const std::string body = slurp(script);
  for (const auto& f : summary.csv_files) {
    CHECK(body.find(f) != std::string::npos);
  }
}

TEST_CASE("unknown acceptance suite raises") {
  CHECK_THROWS_AS(
      (void)run_acceptance_suite("no-such-suite", fresh_dir("accept")),
      UnknownSuite);
}

TEST_CASE("fpss experiment records the tv distance") {
  const char* cfg_text = R"({
    "version": 1, "kind": "fpss", "seeds": [1, 2],
    "out_dir": "fp",
    "fpss": {"potential": "quadratic_well", "domain_lo": -6.0,
             "domain_hi": 6.0, "diffusion": 1.0, "variance_floor": 0.25,
             "dt": 0.01, "samples": 20000, "burn_in": 2000, "thin": 5,
             "bins": 30}
  })";
  const fs::path dir = fresh_dir("fpss");
  RunOptions opts;
  opts.out_dir_override = dir.string();
  const ExperimentSummary summary =
      run_experiment(parse_config(cfg_text), opts);
  CHECK(summary.csv_files.size() == 2);
  const std::string text = slurp(summary.summary_path);
  CHECK(text.find("median_tv_distance") != std::string::npos);
  for (const auto& f : summary.csv_files) {
    CHECK(slurp(dir / f).rfind("bin_lo,bin_hi,empirical_p,analytic_p\n", 0) ==
          0);
  }
}

TEST_CASE("format_double round-trips") {
  RngStream rng(8, 0);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.normal() * std::pow(10.0, rng.uniform(-12.0, 12.0));
    const std::string s = format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
}

TEST_SUITE_END();
