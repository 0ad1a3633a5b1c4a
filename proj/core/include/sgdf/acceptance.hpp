#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sgdf {

/// Outcome of one acceptance suite. `measured` compared against
/// `threshold` with the given comparator decides `pass`; details carries
/// the remaining sub-measurements as text.
struct SuiteVerdict {
  std::string suite;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string comparator = "<=";
  std::string details;
};

/// Suites, in report order:
///   algo1-oracle            10-step trace vs arbitrary-precision replay
///   gain-bounds             fuzzed K in [0,1], g^ between m^ and g
///   variance-factor         EMA variance vs the correction-factor formula
///   fusion-variance         fused variance < min; filter MSE <= raw MSE
///   race-quadratic          filtered SGD vs vanilla SGD on a noisy quadratic
///   regret-trend            mean regret under the sqrt-T envelope
///   nonconvex-rate          running-min grad norm under (log T + 1)/sqrt(T)
///   fpss-gaussian           Langevin stationary law, quadratic control
///   fpss-doublewell         Langevin stationary law, double well
///   hessian-diagnostics     planted spectrum and Hutchinson trace
///   wiener-adam-reduction   gain hook 0 reproduces Adam bit-for-bit
///   determinism             rerun and parallel runs are byte-identical
const std::vector<std::string>& acceptance_suite_ids();

/// Runs one suite, writes <suite>.json under out_dir, returns the verdict.
/// Throws UnknownSuite for an unrecognized id.
SuiteVerdict run_acceptance_suite(const std::string& id,
                                  const std::filesystem::path& out_dir);

void write_verdict(const SuiteVerdict& verdict,
                   const std::filesystem::path& out_dir);

}  // namespace sgdf
