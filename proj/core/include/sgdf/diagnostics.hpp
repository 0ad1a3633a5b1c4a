#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "sgdf/rng.hpp"
#include "sgdf/vec.hpp"

namespace sgdf {

/// Matrix-free symmetric operator v -> H v.
using LinearOperator = std::function<ParamVector(const ParamVector&)>;

struct SpectrumReport {
  std::vector<double> top_eigenvalues;  // descending
  std::vector<bool> converged;          // per eigenvalue
  double trace_estimate = 0.0;
  std::int64_t probes_used = 0;
  std::int64_t iterations_used = 0;
};

struct PowerIterationOptions {
  int max_iters = 10000;
  double tol = 1e-9;  // relative Rayleigh residual
};

/// Top-k eigenvalues (by magnitude; equals the largest values for SPD
/// operators) via deflated power iteration. Eigenvalues whose residual is
/// still above tol at max_iters are reported with converged = false rather
/// than raising. Optional outputs: the eigenvector estimates, and the
/// Rayleigh-quotient trace of the first (undeflated) eigenvalue sweep.
SpectrumReport power_iteration_topk(
    const LinearOperator& op, std::size_t dim, std::size_t k,
    const PowerIterationOptions& opts, RngStream& rng,
    std::vector<ParamVector>* eigenvectors = nullptr,
    std::vector<double>* rayleigh_trace = nullptr);

/// Hutchinson trace estimate (1/n) sum z^T H z with Rademacher probes.
double hutchinson_trace(const LinearOperator& op, std::size_t dim,
                        std::int64_t n_probes, RngStream& rng);

/// power_iteration_topk plus hutchinson_trace in one report.
SpectrumReport spectrum_report(const LinearOperator& op, std::size_t dim,
                               std::size_t k, std::int64_t n_probes,
                               const PowerIterationOptions& opts,
                               RngStream& rng);

// ---------------------------------------------------------------------
// Convergence accounting.

class ConvergenceLedger {
 public:
  struct Row {
    std::int64_t t;
    double loss;
    double grad_norm_sq;
    std::optional<double> comparator_loss;
    double running_min;  // of grad_norm_sq
    double regret;       // running sum of loss - comparator_loss
  };

  /// Appends one step. t must be strictly increasing (OutOfOrderStep).
  /// The running regret advances only on rows that carry a comparator.
  void record_step(std::int64_t t, double loss, double grad_norm_sq,
                   std::optional<double> comparator_loss = std::nullopt);

  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }
  const std::vector<Row>& rows() const { return rows_; }
  const Row& latest() const;  // throws EmptyLedger

  std::vector<std::pair<std::int64_t, double>> regret_series() const;
  std::vector<std::pair<std::int64_t, double>> running_min_series() const;

 private:
  std::vector<Row> rows_;
};

enum class RateModel { sqrt_t, log_over_sqrt_t };

struct RateFitResult {
  double c_hat;
  double max_violation_ratio;
};

/// Fits c as the largest statistic/model ratio over the first decade of t
/// (t <= 10 * t_min) and reports the worst observed ratio
/// statistic / (c * model(t)) over all later t. The series must span at
/// least two decades (t_max >= 100 * t_min), else InsufficientSpan.
RateFitResult rate_fit(
    const std::vector<std::pair<std::int64_t, double>>& series,
    RateModel model);

/// Convenience: sqrt_t fits the ledger's regret, log_over_sqrt_t fits the
/// running minimum of the squared gradient norm.
RateFitResult rate_fit(const ConvergenceLedger& ledger, RateModel model);

}  // namespace sgdf
