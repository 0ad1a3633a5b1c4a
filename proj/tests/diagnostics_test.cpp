#include <doctest.h>

#include <cmath>

#include "sgdf/diagnostics.hpp"
#include "sgdf/errors.hpp"

using namespace sgdf;

namespace {

// Q diag(lambda) Q^T with a deterministic random orthogonal Q.
struct PlantedMatrix {
  std::vector<ParamVector> q;
  std::vector<double> lambda;

  PlantedMatrix(std::vector<double> eigenvalues, std::uint64_t seed)
      : lambda(std::move(eigenvalues)) {
    const std::size_t n = lambda.size();
    RngStream rng(seed, 0);
    q.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      q[i] = gaussian_vector(rng, n, 0.0, 1.0);
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < i; ++j) {
          const double c = dot(q[i], q[j]);
          for (std::size_t x = 0; x < n; ++x) q[i][x] -= c * q[j][x];
        }
      }
      const double nn = norm2(q[i]);
      for (double& x : q[i]) x /= nn;
    }
  }

  LinearOperator op() const {
    return [this](const ParamVector& x) {
      ParamVector y(x.size(), 0.0);
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double c = lambda[i] * dot(q[i], x);
        for (std::size_t j = 0; j < x.size(); ++j) y[j] += c * q[i][j];
      }
      return y;
    };
  }

  double trace() const {
    double t = 0.0;
    for (double l : lambda) t += l;
    return t;
  }
};

LinearOperator diag_op(std::vector<double> d) {
  return [d = std::move(d)](const ParamVector& x) {
    ParamVector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = d[i] * x[i];
    return y;
  };
}

}  // namespace

TEST_SUITE_BEGIN("diagnostics");

TEST_CASE("power iteration on a diagonal operator") {
  RngStream rng(1, 0);
  PowerIterationOptions opts;
  opts.tol = 1e-10;
  const SpectrumReport top1 =
      power_iteration_topk(diag_op({3.0, 1.0}), 2, 1, opts, rng);
  CHECK(top1.top_eigenvalues.size() == 1);
  CHECK(std::abs(top1.top_eigenvalues[0] - 3.0) <= 1e-8);
  CHECK(top1.converged[0]);

  const SpectrumReport top2 =
      power_iteration_topk(diag_op({3.0, 1.0}), 2, 2, opts, rng);
  CHECK(top2.top_eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(top2.top_eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("planted 50x50 spectrum is recovered") {
  std::vector<double> lambda(50);
  for (std::size_t i = 0; i < 50; ++i) {
    lambda[i] = 100.0 * std::pow(0.8, static_cast<double>(i));
  }
  const PlantedMatrix planted(lambda, 404);
  RngStream rng(2, 0);
  PowerIterationOptions opts;
  opts.max_iters = 20000;
  // deflating with finitely-accurate leading pairs leaves a residual floor
  // around 2e-10 for the trailing eigenvalues
  opts.tol = 1e-9;
  std::vector<ParamVector> vecs;
  const SpectrumReport report =
      power_iteration_topk(planted.op(), 50, 5, opts, rng, &vecs);
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(report.top_eigenvalues[i] - lambda[i]) /
              lambda[i] <=
          1e-6);
    CHECK(report.converged[i]);
  }
  // deflation orthogonality
  for (std::size_t a = 0; a < vecs.size(); ++a) {
    for (std::size_t b = a + 1; b < vecs.size(); ++b) {
      CHECK(std::abs(dot(vecs[a], vecs[b])) <= 1e-6);
    }
  }
}

TEST_CASE("rayleigh quotient is non-decreasing for an SPD operator") {
  std::vector<double> lambda(30);
  for (std::size_t i = 0; i < 30; ++i) {
    lambda[i] = 20.0 * std::pow(0.9, static_cast<double>(i)) + 1.0;
  }
  const PlantedMatrix planted(lambda, 405);
  RngStream rng(3, 0);
  PowerIterationOptions opts;
  opts.tol = 1e-12;
  opts.max_iters = 5000;
  std::vector<double> rq;
  (void)power_iteration_topk(planted.op(), 30, 1, opts, rng, nullptr, &rq);
  REQUIRE(rq.size() >= 2);
  for (std::size_t i = 1; i < rq.size(); ++i) {
    CHECK(rq[i] >= rq[i - 1] - 1e-12 * std::abs(rq[i - 1]));
  }
}

TEST_CASE("hutchinson trace on a diagonal operator is exact per probe") {
  RngStream rng(4, 0);
  for (int probes : {1, 3, 17}) {
    CHECK(hutchinson_trace(diag_op({3.0, 1.0}), 2, probes, rng) == 4.0);
  }
  CHECK(hutchinson_trace(diag_op({0.0, 0.0}), 2, 5, rng) == 0.0);
}

TEST_CASE("hutchinson estimator is unbiased within 3 standard errors") {
  std::vector<double> lambda(40);
  for (std::size_t i = 0; i < 40; ++i) {
    lambda[i] = 5.0 + static_cast<double>(i % 7);
  }
  const PlantedMatrix planted(lambda, 406);
  RngStream rng(5, 0);
  const int batches = 30, per_batch = 200;
  std::vector<double> estimates;
  for (int b = 0; b < batches; ++b) {
    estimates.push_back(
        hutchinson_trace(planted.op(), 40, per_batch, rng));
  }
  double m = 0.0;
  for (double e : estimates) m += e;
  m /= batches;
  double var = 0.0;
  for (double e : estimates) var += (e - m) * (e - m);
  var /= (batches - 1);
  const double se = std::sqrt(var / batches);
  CHECK(std::abs(m - planted.trace()) <= 3.0 * se);
}

TEST_CASE("ledger running statistics") {
  ConvergenceLedger ledger;
  ledger.record_step(1, 1.0, 4.0, 0.0);
  ledger.record_step(2, 0.5, 1.0, 0.0);
  ledger.record_step(3, 0.7, 2.0, 0.0);
  const auto& rows = ledger.rows();
  CHECK(rows[0].running_min == 4.0);
  CHECK(rows[1].running_min == 1.0);
  CHECK(rows[2].running_min == 1.0);
  CHECK(rows[0].regret == doctest::Approx(1.0));
  CHECK(rows[1].regret == doctest::Approx(1.5));
  CHECK(rows[2].regret == doctest::Approx(2.2));

  CHECK_THROWS_AS(ledger.record_step(3, 0.0, 0.0), OutOfOrderStep);
  ConvergenceLedger empty;
  CHECK_THROWS_AS((void)empty.latest(), EmptyLedger);
}

TEST_CASE("ledger running min is non-increasing under fuzz") {
  RngStream rng(6, 0);
  ConvergenceLedger ledger;
  for (std::int64_t t = 1; t <= 2000; ++t) {
    ledger.record_step(t, rng.uniform01(), rng.uniform(0.0, 10.0));
  }
  const auto series = ledger.running_min_series();
  for (std::size_t i = 1; i < series.size(); ++i) {
    CHECK(series[i].second <= series[i - 1].second);
  }
}

TEST_CASE("rate fit on exact and perturbed series") {
  std::vector<std::pair<std::int64_t, double>> exact;
  for (std::int64_t t = 1; t <= 10000; ++t) {
    exact.emplace_back(t, 2.0 * std::sqrt(static_cast<double>(t)));
  }
  const RateFitResult fit = rate_fit(exact, RateModel::sqrt_t);
  CHECK(fit.c_hat == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.max_violation_ratio == doctest::Approx(1.0).epsilon(1e-12));

  // +-1% multiplicative perturbation
  RngStream rng(7, 0);
  std::vector<std::pair<std::int64_t, double>> noisy;
  for (std::int64_t t = 1; t <= 10000; ++t) {
    noisy.emplace_back(t, std::sqrt(static_cast<double>(t)) *
                              (1.0 + rng.uniform(-0.01, 0.01)));
  }
  const RateFitResult nfit = rate_fit(noisy, RateModel::sqrt_t);
  CHECK(nfit.max_violation_ratio <= 1.05);

  // linear growth violates the sqrt envelope
  std::vector<std::pair<std::int64_t, double>> linear;
  for (std::int64_t t = 1; t <= 10000; ++t) {
    linear.emplace_back(t, static_cast<double>(t));
  }
  const RateFitResult lfit = rate_fit(linear, RateModel::sqrt_t);
  CHECK(lfit.max_violation_ratio > 2.0);
}

TEST_CASE("rate fit span validation") {
  std::vector<std::pair<std::int64_t, double>> shortspan;
  for (std::int64_t t = 10; t <= 500; ++t) {
    shortspan.emplace_back(t, std::sqrt(static_cast<double>(t)));
  }
  CHECK_THROWS_AS((void)rate_fit(shortspan, RateModel::sqrt_t),
                  InsufficientSpan);
}

TEST_CASE("rate fit against the log model") {
  std::vector<std::pair<std::int64_t, double>> series;
  for (std::int64_t t = 100; t <= 10000; t += 10) {
    const double td = static_cast<double>(t);
    series.emplace_back(t, 3.0 * (std::log(td) + 1.0) / std::sqrt(td));
  }
  const RateFitResult fit = rate_fit(series, RateModel::log_over_sqrt_t);
  CHECK(fit.c_hat == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.max_violation_ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_SUITE_END();
