#include "sgdf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sgdf/errors.hpp"

namespace sgdf {

namespace {

void orthogonalize_against(ParamVector& v,
                           const std::vector<ParamVector>& basis) {
  // two passes of modified Gram-Schmidt
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) {
      const double c = dot(v, b);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
    }
  }
}

bool normalize(ParamVector& v) {
  const double n = norm2(v);
  if (n < 1e-300) return false;
  for (double& x : v) x /= n;
  return true;
}

}  // namespace

SpectrumReport power_iteration_topk(const LinearOperator& op, std::size_t dim,
                                    std::size_t k,
                                    const PowerIterationOptions& opts,
                                    RngStream& rng,
                                    std::vector<ParamVector>* eigenvectors,
                                    std::vector<double>* rayleigh_trace) {
  if (k > dim) throw InvalidConfig("power_iteration_topk: k > dim");
  if (!(opts.tol > 0.0)) throw InvalidConfig("power_iteration_topk: tol <= 0");
  if (opts.max_iters < 1) {
    throw InvalidConfig("power_iteration_topk: max_iters < 1");
  }

  SpectrumReport report;
  report.trace_estimate = std::numeric_limits<double>::quiet_NaN();
  std::vector<ParamVector> vecs;
  std::vector<double> vals;

  auto apply_deflated = [&](const ParamVector& x) {
    ParamVector y = op(x);
    ensure_same_dim(y, x, "power iteration operator");
    for (std::size_t j = 0; j < vecs.size(); ++j) {
      const double c = vals[j] * dot(vecs[j], x);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] -= c * vecs[j][i];
    }
    return y;
  };

  // Each pair is driven well below the caller's tolerance so that the
  // deflation error it leaves behind cannot dominate later residuals.
  const double inner_tol = std::max(opts.tol * 1e-2, 1e-14);

  for (std::size_t j = 0; j < k; ++j) {
    ParamVector v = gaussian_vector(rng, dim, 0.0, 1.0);
    orthogonalize_against(v, vecs);
    if (!normalize(v)) v.assign(dim, 1.0 / std::sqrt(double(dim)));

    double best_resid = std::numeric_limits<double>::infinity();
    double best_lambda = 0.0;
    ParamVector best_v = v;
    for (int it = 0; it < opts.max_iters; ++it) {
      ParamVector w = apply_deflated(v);
      const double lambda = dot(v, w);
      if (rayleigh_trace && j == 0) rayleigh_trace->push_back(lambda);
      ++report.iterations_used;

      double resid = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double r = w[i] - lambda * v[i];
        resid += r * r;
      }
      resid = std::sqrt(resid) / std::max(std::abs(lambda), 1e-300);
      if (resid < best_resid) {
        best_resid = resid;
        best_lambda = lambda;
        best_v = v;
      }
      if (resid <= inner_tol) break;

      orthogonalize_against(w, vecs);
      if (!normalize(w)) {
        // deflated operator annihilates the subspace; remaining mass is 0
        best_lambda = 0.0;
        best_resid = 0.0;
        best_v = v;
        break;
      }
      v = std::move(w);
    }
    vals.push_back(best_lambda);
    vecs.push_back(best_v);
    report.converged.push_back(best_resid <= opts.tol);
  }

  // sort descending by value, keeping flags and vectors aligned
  std::vector<std::size_t> order(vals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return vals[a] > vals[b];
                   });
  for (std::size_t idx : order) {
    report.top_eigenvalues.push_back(vals[idx]);
  }
  std::vector<bool> flags;
  for (std::size_t idx : order) flags.push_back(report.converged[idx]);
  report.converged = std::move(flags);
  if (eigenvectors) {
    eigenvectors->clear();
    for (std::size_t idx : order) eigenvectors->push_back(vecs[idx]);
  }
  return report;
}

double hutchinson_trace(const LinearOperator& op, std::size_t dim,
                        std::int64_t n_probes, RngStream& rng) {
  if (n_probes < 1) throw InvalidConfig("hutchinson_trace: n_probes < 1");
  double acc = 0.0;
  ParamVector z(dim);
  for (std::int64_t p = 0; p < n_probes; ++p) {
    for (double& x : z) x = rng.rademacher();
    const ParamVector hz = op(z);
    ensure_same_dim(hz, z, "hutchinson operator");
    acc += dot(z, hz);
  }
  return acc / static_cast<double>(n_probes);
}

SpectrumReport spectrum_report(const LinearOperator& op, std::size_t dim,
                               std::size_t k, std::int64_t n_probes,
                               const PowerIterationOptions& opts,
                               RngStream& rng) {
  SpectrumReport report = power_iteration_topk(op, dim, k, opts, rng);
  report.trace_estimate = hutchinson_trace(op, dim, n_probes, rng);
  report.probes_used = n_probes;
  return report;
}

// ------------------------------------------------------------- ledger ----

void ConvergenceLedger::record_step(std::int64_t t, double loss,
                                    double grad_norm_sq,
                                    std::optional<double> comparator_loss) {
  if (!rows_.empty() && t <= rows_.back().t) {
    throw OutOfOrderStep("record_step: t must be strictly increasing");
  }
  Row row;
  row.t = t;
  row.loss = loss;
  row.grad_norm_sq = grad_norm_sq;
  row.comparator_loss = comparator_loss;
  row.running_min = rows_.empty()
                        ? grad_norm_sq
                        : std::min(rows_.back().running_min, grad_norm_sq);
  row.regret = rows_.empty() ? 0.0 : rows_.back().regret;
  if (comparator_loss) row.regret += loss - *comparator_loss;
  rows_.push_back(row);
}

const ConvergenceLedger::Row& ConvergenceLedger::latest() const {
  if (rows_.empty()) throw EmptyLedger("ledger has no rows");
  return rows_.back();
}

std::vector<std::pair<std::int64_t, double>>
ConvergenceLedger::regret_series() const {
  std::vector<std::pair<std::int64_t, double>> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.emplace_back(r.t, r.regret);
  return out;
}

std::vector<std::pair<std::int64_t, double>>
ConvergenceLedger::running_min_series() const {
  std::vector<std::pair<std::int64_t, double>> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.emplace_back(r.t, r.running_min);
  return out;
}

// ----------------------------------------------------------- rate fit ----

namespace {

double model_value(RateModel m, std::int64_t t) {
  const double td = static_cast<double>(t);
  switch (m) {
    case RateModel::sqrt_t:
      return std::sqrt(td);
    case RateModel::log_over_sqrt_t:
      return (std::log(td) + 1.0) / std::sqrt(td);
  }
  return 0.0;
}

}  // namespace

RateFitResult rate_fit(
    const std::vector<std::pair<std::int64_t, double>>& series,
    RateModel model) {
  if (series.size() < 2) throw InsufficientSpan("rate_fit: too few points");
  const std::int64_t t_min = series.front().first;
  const std::int64_t t_max = series.back().first;
  if (t_min < 1 || t_max < 100 * t_min) {
    throw InsufficientSpan("rate_fit: series must span >= 2 decades of t");
  }

  const std::int64_t first_decade_end = 10 * t_min;
  double c_hat = -std::numeric_limits<double>::infinity();
  for (const auto& [t, y] : series) {
    if (t > first_decade_end) break;
    c_hat = std::max(c_hat, y / model_value(model, t));
  }
  RateFitResult out{c_hat, 0.0};
  if (!(c_hat > 0.0)) {
    out.max_violation_ratio = std::numeric_limits<double>::infinity();
    return out;
  }
  for (const auto& [t, y] : series) {
    if (t <= first_decade_end) continue;
    out.max_violation_ratio = std::max(
        out.max_violation_ratio, y / (c_hat * model_value(model, t)));
  }
  return out;
}

RateFitResult rate_fit(const ConvergenceLedger& ledger, RateModel model) {
  return rate_fit(model == RateModel::sqrt_t ? ledger.regret_series()
                                             : ledger.running_min_series(),
                  model);
}

}  // namespace sgdf
