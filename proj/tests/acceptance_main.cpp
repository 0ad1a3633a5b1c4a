// Acceptance gate: runs every suite and prints one verdict line per
// criterion. Exits nonzero if any suite fails. Verdict JSON files land in
// the directory given as argv[1] (default: ./acceptance_out).

#include <chrono>
#include <cstdio>
#include <string>

#include "sgdf/acceptance.hpp"

int main(int argc, char** argv) {
  const std::string out_dir = argc > 1 ? argv[1] : "acceptance_out";
  const auto& ids = sgdf::acceptance_suite_ids();
  int failures = 0;
  int index = 0;
  for (const auto& id : ids) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    sgdf::SuiteVerdict v;
    try {
      v = sgdf::run_acceptance_suite(id, out_dir);
    } catch (const std::exception& e) {
      std::printf("[%2d/%zu] %-24s FAIL (exception: %s)\n", index, ids.size(),
                  id.c_str(), e.what());
      ++failures;
      continue;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%2d/%zu] %-24s %s  measured=%.6g %s threshold=%.6g  (%.1fs)\n",
                index, ids.size(), v.suite.c_str(),
                v.pass ? "PASS" : "FAIL", v.measured, v.comparator.c_str(),
                v.threshold, secs);
    if (!v.pass) {
      std::printf("        %s\n", v.details.c_str());
      ++failures;
    }
  }
  if (failures == 0) {
    std::printf("all %zu acceptance suites passed\n", ids.size());
  } else {
    std::printf("%d acceptance suite(s) FAILED\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
