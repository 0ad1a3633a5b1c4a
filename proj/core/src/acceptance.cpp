#include "sgdf/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "sgdf/baselines.hpp"
#include "sgdf/diagnostics.hpp"
#include "sgdf/errors.hpp"
#include "sgdf/experiment.hpp"
#include "sgdf/fusion.hpp"
#include "sgdf/langevin.hpp"
#include "sgdf/objectives.hpp"
#include "sgdf/optimizer.hpp"

namespace sgdf {

namespace {

// Ten-step scalar trace of the filtered update, beta1=0.9, beta2=0.999,
// eps=1e-8, alpha=0.1 constant, theta0=0.5, fixed gradient sequence below.
// Recomputed at 60 decimal digits by tests/oracles/filter_trace_oracle.py;
// columns m, s, m_hat, s_hat, K, g_hat, theta.
constexpr double kOracleGrads[10] = {1.0, 0.5, -0.2, 0.3,  -0.7,
                                     0.1, 0.05, -0.4, 0.6, -0.1};
constexpr double kOracleTrace[10][7] = {
    {0.099999999999999978, 0.00081000000000000076, 1.0000000000000000,
     0.0080999999999999968, 0.99999876543362292, 1.0000000000000000,
     0.39999999999999999},
    {0.13999999999999997, 0.00093879000000000089, 0.73684210526315790,
     0.0085002996498249094, 0.13159480513101063, 0.70567491457423433,
     0.32943250854257656},
    {0.10599999999999998, 0.0010314872100000010, 0.39114391143911440,
     0.0084876535195717289, 0.023712583868435447, 0.37712636186079942,
     0.29171987235649661},
    {0.12539999999999998, 0.0010609408827900010, 0.36464088397790055,
     0.0079624702317160057, 0.65583724578962817, 0.32224698466442734,
     0.25949517389005388},
    {0.042860000000000002, 0.0016117209215072114, 0.10466166882371617,
     0.011072107183533552, 0.016812793016818005, 0.091133058737215676,
     0.25038186801633231},
    {0.048574000000000001, 0.0016127538340617042, 0.10366677408821516,
     0.010176851355981423, 0.99867960476973354, 0.10000484159101655,
     0.24038138385723065},
    {0.048716600000000001, 0.0016111427273432025, 0.093379931995803761,
     0.0093706587747857374, 0.83276333009645752, 0.057254715367620357,
     0.23465591232046862},
    {0.0038449400000000089, 0.0017726223201794631, 0.0067510423763309738,
     0.0095343022532954332, 0.054487729303426497, -0.015411898314557109,
     0.23619710215192433},
    {0.063460445999999993, 0.0020587243908658028, 0.10359544330237973,
     0.010273283382953714, 0.040022019845390378, 0.12346255632187410,
     0.22385084651973692},
    {0.047114401399999996, 0.0020783083135742173, 0.072336621878805401,
     0.0096519208738665623, 0.24527240289772149, 0.030067204523314758,
     0.22084412606740544},
};

double rel_err(double got, double want) {
  const double denom = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / denom;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double x) { return format_double(x); }

// --------------------------------------------------------- suite bodies --

SuiteVerdict suite_algo1_oracle() {
  SuiteVerdict v{.suite = "algo1-oracle", .threshold = 1e-12};
  SgdfHyperparams hp;
  hp.alpha = 0.1;
  hp.beta1 = 0.9;
  hp.beta2 = 0.999;
  hp.epsilon = 1e-8;
  FilterState state(1);
  ParamVector theta = {0.5};
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const StepOutput out = sgdf_step(theta, {kOracleGrads[t]}, state, hp);
    theta = out.new_params;
    const double got[7] = {state.m[0],     state.s[0],  out.m_hat[0],
                           out.s_hat[0],   out.gain[0], out.filtered_grad[0],
                           out.new_params[0]};
    for (int c = 0; c < 7; ++c) {
      worst = std::max(worst, rel_err(got[c], kOracleTrace[t][c]));
    }
  }
  v.measured = worst;
  v.pass = worst <= v.threshold;
  v.details = "max relative error over 10 steps x 7 quantities";
  return v;
}

SuiteVerdict suite_gain_bounds() {
  SuiteVerdict v{.suite = "gain-bounds", .threshold = 0.0};
  RngStream rng(20240601, 1);
  std::int64_t violations = 0;
  std::int64_t cases = 0;
  while (cases < 100000) {
    const std::size_t dim = 1 + static_cast<std::size_t>(rng.uniform01() * 6);
    const double beta1 = rng.uniform(0.0, 0.999);
    const double beta2 = rng.uniform(0.0, 0.9999);
    const double eps = std::pow(10.0, rng.uniform(-12.0, -2.0));
    const double gscale = std::pow(10.0, rng.uniform(-3.0, 3.0));
    const int steps = 1 + static_cast<int>(rng.uniform01() * 12);
    FilterState state(dim);
    for (int t = 0; t < steps && cases < 100000; ++t) {
      const ParamVector g = gaussian_vector(rng, dim, 0.0, gscale);
      const FilterOutput out = filter_update(g, state, beta1, beta2, eps);
      for (std::size_t i = 0; i < dim; ++i) {
        ++cases;
        const double k = out.gain[i];
        const double lo = std::min(out.m_hat[i], g[i]);
        const double hi = std::max(out.m_hat[i], g[i]);
        const double slack =
            1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
        if (!(k >= 0.0 && k <= 1.0) ||
            !(out.g_hat[i] >= lo - slack && out.g_hat[i] <= hi + slack)) {
          ++violations;
        }
      }
    }
  }
  v.measured = static_cast<double>(violations);
  v.pass = violations == 0;
  v.details = std::to_string(cases) + " fuzzed (state, gradient, hp) cases";
  return v;
}

SuiteVerdict suite_variance_factor() {
  SuiteVerdict v{.suite = "variance-factor", .threshold = 0.10};
  const double beta1 = 0.9;
  const std::size_t streams = 25000;
  const std::int64_t horizon = 5000;
  const std::vector<std::int64_t> checkpoints = {500, 1500, 3000, 5000};
  RngStream rng(7171, 3);
  ParamVector m(streams, 0.0);
  double worst = 0.0;
  std::ostringstream detail;
  std::size_t next_cp = 0;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    for (std::size_t i = 0; i < streams; ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * rng.normal();
    }
    if (next_cp < checkpoints.size() && t == checkpoints[next_cp]) {
      const double mu = mean(m);
      double var = 0.0;
      for (double x : m) var += (x - mu) * (x - mu);
      var /= static_cast<double>(streams - 1);
      const double predicted = momentum_variance_factor(beta1, t);
      const double dev = std::abs(var / predicted - 1.0);
      worst = std::max(worst, dev);
      detail << "t=" << t << " var=" << fmt(var) << " predicted="
             << fmt(predicted) << "; ";
      ++next_cp;
    }
  }
  v.measured = worst;
  v.pass = worst <= v.threshold;
  v.details = detail.str() + std::to_string(streams * checkpoints.size()) +
              " samples";
  return v;
}

SuiteVerdict suite_fusion_variance() {
  SuiteVerdict v{.suite = "fusion-variance", .threshold = 1.0,
                 .comparator = "<="};
  // part 1: fused variance strictly below both inputs
  RngStream rng(5150, 2);
  std::int64_t violations = 0;
  for (int i = 0; i < 100000; ++i) {
    const double a = std::pow(10.0, rng.uniform(-3.0, 3.0));
    const double b = std::pow(10.0, rng.uniform(-3.0, 3.0));
    const GaussianBelief fused =
        fuse({rng.normal(), a}, {rng.normal(), b});
    if (!(fused.variance < std::min(a, b))) ++violations;
  }
  // part 2: stationary-stream MSE of the fused estimate vs the raw gradient
  const double mu = 0.7, sigma = 1.0;
  std::vector<double> ratio_vs_raw, ratio_vs_momentum;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    RngStream noise(seed, 0);
    FilterState state(1);
    double mse_raw = 0.0, mse_ghat = 0.0, mse_mhat = 0.0;
    std::int64_t n = 0;
    for (std::int64_t t = 1; t <= 5000; ++t) {
      const ParamVector g = {mu + sigma * noise.normal()};
      const FilterOutput f = filter_update(g, state, 0.9, 0.999, 1e-8);
      if (t >= 500) {
        mse_raw += (g[0] - mu) * (g[0] - mu);
        mse_ghat += (f.g_hat[0] - mu) * (f.g_hat[0] - mu);
        mse_mhat += (f.m_hat[0] - mu) * (f.m_hat[0] - mu);
        ++n;
      }
    }
    ratio_vs_raw.push_back(mse_ghat / mse_raw);
    ratio_vs_momentum.push_back(mse_ghat / mse_mhat);
    (void)n;
  }
  const double med_raw = median(ratio_vs_raw);
  const double med_mom = median(ratio_vs_momentum);
  v.measured = med_raw;
  v.pass = violations == 0 && med_raw <= 1.0;
  v.details = "fuzz violations=" + std::to_string(violations) +
              "; median MSE(g^)/MSE(g)=" + fmt(med_raw) +
              "; median MSE(g^)/MSE(m^)=" + fmt(med_mom);
  return v;
}

struct RaceCurves {
  std::vector<double> median_loss_after;  // index t-1
};

RaceCurves run_race_arm(const StochasticObjective& obj,
                        const OptimizerParams& params, std::int64_t horizon,
                        const std::vector<std::uint64_t>& seeds) {
  std::vector<std::vector<double>> curves(
      seeds.size(), std::vector<double>(static_cast<std::size_t>(horizon)));
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    ParamVector theta = obj.initial_point();
    AnyOptimizer opt(params, obj.dim());
    RngStream noise(seeds[s], 0);
    for (std::int64_t t = 1; t <= horizon; ++t) {
      const ParamVector g = obj.noisy_grad(theta, noise);
      theta = opt.step(theta, g).new_params;
      curves[s][static_cast<std::size_t>(t - 1)] = obj.loss(theta);
    }
  }
  RaceCurves out;
  out.median_loss_after.resize(static_cast<std::size_t>(horizon));
  std::vector<double> column(seeds.size());
  for (std::int64_t t = 0; t < horizon; ++t) {
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      column[s] = curves[s][static_cast<std::size_t>(t)];
    }
    out.median_loss_after[static_cast<std::size_t>(t)] = median(column);
  }
  return out;
}

SuiteVerdict suite_race_quadratic() {
  SuiteVerdict v{.suite = "race-quadratic", .threshold = 0.70};
  const std::int64_t horizon = 500;
  // the spectrum is chosen so every mode reaches its noise floor well
  // inside the horizon; the race then compares floors, not transients
  const auto obj =
      noisy_quadratic(log_spaced_eigenvalues(50, 1.0, 10.0), 0.5);
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 20; ++s) seeds.push_back(s);
  const std::vector<double> grid = {0.02, 0.06, 0.18};

  auto tune = [&](auto make_params) {
    RaceCurves best;
    double best_final = std::numeric_limits<double>::infinity();
    double best_alpha = 0.0;
    for (double alpha : grid) {
      RaceCurves c = run_race_arm(*obj, make_params(alpha), horizon, seeds);
      if (c.median_loss_after.back() < best_final) {
        best_final = c.median_loss_after.back();
        best = std::move(c);
        best_alpha = alpha;
      }
    }
    return std::pair<RaceCurves, double>(std::move(best), best_alpha);
  };

  auto [sgdf_curve, sgdf_alpha] = tune([](double a) {
    SgdfHyperparams hp;
    hp.alpha = a;
    return OptimizerParams(hp);
  });
  auto [sgd_curve, sgd_alpha] = tune([](double a) {
    SgdHyperparams hp;
    hp.alpha = a;
    return OptimizerParams(hp);
  });

  const double sgdf_final = sgdf_curve.median_loss_after.back();
  const double sgd_final = sgd_curve.median_loss_after.back();
  std::int64_t crossing = horizon + 1;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    if (sgdf_curve.median_loss_after[static_cast<std::size_t>(t - 1)] <=
        sgd_final) {
      crossing = t;
      break;
    }
  }
  const double frac = static_cast<double>(crossing) /
                      static_cast<double>(horizon);
  v.measured = frac;
  v.pass = sgdf_final <= sgd_final && frac <= 0.70;
  v.details = "median final loss: filtered=" + fmt(sgdf_final) +
              " (alpha=" + fmt(sgdf_alpha) + "), sgd=" + fmt(sgd_final) +
              " (alpha=" + fmt(sgd_alpha) + "); crossing step " +
              std::to_string(crossing) + "/" + std::to_string(horizon);
  return v;
}

SuiteVerdict suite_regret_trend() {
  SuiteVerdict v{.suite = "regret-trend", .threshold = 2.0};
  const std::int64_t horizon = 10000;
  const std::size_t dim = 4;
  const double proj_radius = 2.0;
  std::vector<std::pair<std::int64_t, double>> mean_series;
  const int n_seeds = 20;
  for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
    // fast-mixing centers: no tracker can beat the fixed comparator, so
    // the regret is positive and the sqrt-T envelope is informative
    const OnlineConvexStream stream = convex_stream(
        DriftKind::random_walk, dim, horizon, 1.0, 0.5, seed);
    ParamVector theta = zeros(dim);
    SgdfHyperparams hp;
    hp.alpha = 0.5;
    hp.schedule.kind = ScheduleKind::inv_sqrt;
    FilterState state(dim);
    double regret = 0.0;
    std::size_t k = 0;
    for (std::int64_t t = 1; t <= horizon; ++t) {
      regret += stream.loss(t, theta) - stream.comparator_loss(t);
      const StepOutput out = sgdf_step(theta, stream.grad(t, theta), state, hp);
      theta = project_to_ball(out.new_params, proj_radius);
      if (t >= 10 && t % 10 == 0) {
        if (seed == 1) {
          mean_series.emplace_back(t, regret);
        } else {
          mean_series[k].second += regret;
          ++k;
        }
      }
    }
  }
  for (auto& [t, r] : mean_series) r /= static_cast<double>(n_seeds);
  const RateFitResult fit = rate_fit(mean_series, RateModel::sqrt_t);
  v.measured = fit.max_violation_ratio;
  v.pass = fit.max_violation_ratio <= v.threshold;
  v.details = "c fit on T<=100: " + fmt(fit.c_hat) + "; mean R(T) at T=10^4: " +
              fmt(mean_series.back().second);
  return v;
}

SuiteVerdict suite_nonconvex_rate() {
  SuiteVerdict v{.suite = "nonconvex-rate", .threshold = 2.0};
  const std::int64_t horizon = 10000;
  const auto obj = noisy_rosenbrock(0.3);
  const int n_seeds = 20;
  std::vector<double> mean_gns(static_cast<std::size_t>(horizon), 0.0);
  for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
    // (0,0) keeps the first steps inside the stability region of the
    // decaying step size while leaving the full valley traversal to do
    ParamVector theta = {0.0, 0.0};
    SgdfHyperparams hp;
    hp.alpha = 0.01;
    hp.schedule.kind = ScheduleKind::inv_sqrt;
    FilterState state(2);
    RngStream noise(seed, 0);
    for (std::int64_t t = 1; t <= horizon; ++t) {
      mean_gns[static_cast<std::size_t>(t - 1)] +=
          norm2_sq(obj->true_grad(theta));
      const StepOutput out =
          sgdf_step(theta, obj->noisy_grad(theta, noise), state, hp);
      theta = out.new_params;
    }
  }
  std::vector<std::pair<std::int64_t, double>> runmin_series;
  double running = std::numeric_limits<double>::infinity();
  double at_100 = 0.0, at_end = 0.0;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    running = std::min(running,
                       mean_gns[static_cast<std::size_t>(t - 1)] / n_seeds);
    if (t == 100) at_100 = running;
    if (t == horizon) at_end = running;
    if (t >= 100 && t % 10 == 0) runmin_series.emplace_back(t, running);
  }
  const RateFitResult fit =
      rate_fit(runmin_series, RateModel::log_over_sqrt_t);
  const double drop = at_end / at_100;
  v.measured = fit.max_violation_ratio;
  v.pass = drop <= 0.25 && fit.max_violation_ratio <= v.threshold;
  v.details = "runmin at T=10^2: " + fmt(at_100) + ", at T=10^4: " +
              fmt(at_end) + " (ratio " + fmt(drop) +
              ", required <= 0.25); c_hat=" + fmt(fit.c_hat);
  return v;
}

SuiteVerdict run_fpss_case(const std::string& suite, const Potential1D& pot,
                           double diffusion, double threshold,
                           std::int64_t thin) {
  SuiteVerdict v{.suite = suite, .threshold = threshold};
  RngStream rng(99, 0);
  const std::vector<double> samples =
      langevin_sample(pot, diffusion, /*floor_c=*/0.25, /*dt=*/1e-3,
                      /*n_samples=*/1000000, /*burn_in=*/200000, rng, thin);
  const std::vector<double> analytic = analytic_stationary(pot, diffusion, 60);
  const StationaryCheck check =
      stationarity_report(samples, pot, analytic, 200000);
  v.measured = check.tv_distance;
  v.pass = check.tv_distance <= threshold;
  v.details = pot.name + ", D=" + fmt(diffusion) +
              ", dt=1e-3, 10^6 retained samples (thin " +
              std::to_string(thin) + "), mode crossings " +
              std::to_string(count_mode_crossings(samples));
  return v;
}

SuiteVerdict suite_fpss_gaussian() {
  return run_fpss_case("fpss-gaussian", quadratic_well(-6.0, 6.0), 1.0, 0.02,
                       100);
}

SuiteVerdict suite_fpss_doublewell() {
  return run_fpss_case("fpss-doublewell", double_well(-3.0, 3.0), 0.5, 0.05,
                       100);
}

SuiteVerdict suite_hessian_diagnostics() {
  SuiteVerdict v{.suite = "hessian-diagnostics", .threshold = 1e-6};
  const std::size_t n = 50;
  // planted SPD operator Q diag(lambda) Q^T with a random orthogonal Q
  std::vector<double> lambda(n);
  double planted_trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lambda[i] = 100.0 * std::pow(0.85, static_cast<double>(i));
    planted_trace += lambda[i];
  }
  RngStream qrng(4242, 0);
  std::vector<ParamVector> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = gaussian_vector(qrng, n, 0.0, 1.0);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        const double c = dot(q[i], q[j]);
        for (std::size_t x = 0; x < n; ++x) q[i][x] -= c * q[j][x];
      }
    }
    const double nn = norm2(q[i]);
    for (double& x : q[i]) x /= nn;
  }
  LinearOperator op = [&](const ParamVector& x) {
    ParamVector y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = lambda[i] * dot(q[i], x);
      for (std::size_t j = 0; j < n; ++j) y[j] += c * q[i][j];
    }
    return y;
  };

  PowerIterationOptions popts;
  popts.max_iters = 20000;
  popts.tol = 1e-9;
  RngStream rng(17, 0);
  const SpectrumReport report = power_iteration_topk(op, n, 5, popts, rng);
  double worst_eig = 0.0;
  for (int i = 0; i < 5; ++i) {
    worst_eig = std::max(
        worst_eig,
        rel_err(report.top_eigenvalues[static_cast<std::size_t>(i)],
                lambda[static_cast<std::size_t>(i)]));
  }
  const double trace = hutchinson_trace(op, n, 10000, rng);
  const double trace_err = rel_err(trace, planted_trace);

  // diagonal case: every Rademacher probe hits the trace exactly
  LinearOperator diag_op = [](const ParamVector& x) {
    return ParamVector{3.0 * x[0], 1.0 * x[1]};
  };
  const double diag = hutchinson_trace(diag_op, 2, 7, rng);
  const bool diag_exact = diag == 4.0;

  v.measured = worst_eig;
  v.pass = worst_eig <= 1e-6 && trace_err <= 0.02 && diag_exact;
  v.details = "top-5 worst rel err " + fmt(worst_eig) +
              "; hutchinson rel err " + fmt(trace_err) +
              " (10^4 probes, required <= 0.02); diag probe exact: " +
              (diag_exact ? "yes" : "no");
  return v;
}

SuiteVerdict suite_wiener_adam_reduction() {
  SuiteVerdict v{.suite = "wiener-adam-reduction", .threshold = 0.0};
  const std::size_t dim = 20;
  const std::int64_t horizon = 1000;

  AdamHyperparams adam_hp;
  WienerAdamHyperparams wa_hp;
  wa_hp.gain_override = 0.0;

  AdamState adam_state(dim);
  WienerAdamState wa_state(dim);
  RngStream g_adam(31337, 0), g_wa(31337, 0), g_first(31337, 0);
  ParamVector theta_adam(dim, 0.5), theta_wa(dim, 0.5);
  std::int64_t mismatches = 0;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    const ParamVector g = gaussian_vector(g_adam, dim, 0.1, 1.0);
    const ParamVector g2 = gaussian_vector(g_wa, dim, 0.1, 1.0);
    theta_adam = adam_step(theta_adam, g, adam_state, adam_hp).new_params;
    theta_wa = wiener_adam_step(theta_wa, g2, wa_state, wa_hp).new_params;
    for (std::size_t i = 0; i < dim; ++i) {
      if (theta_adam[i] != theta_wa[i]) ++mismatches;
    }
  }

  // hook off: the first step still coincides exactly (innovation is zero)
  WienerAdamHyperparams wa_free;
  AdamState a2(dim);
  WienerAdamState w2(dim);
  const ParamVector g1 = gaussian_vector(g_first, dim, 0.1, 1.0);
  const ParamVector t_adam =
      adam_step(ParamVector(dim, 0.5), g1, a2, adam_hp).new_params;
  const ParamVector t_wa =
      wiener_adam_step(ParamVector(dim, 0.5), g1, w2, wa_free).new_params;
  std::int64_t first_mismatch = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    if (t_adam[i] != t_wa[i]) ++first_mismatch;
  }

  v.measured = static_cast<double>(mismatches + first_mismatch);
  v.pass = mismatches == 0 && first_mismatch == 0;
  v.details = "bit mismatches over " + std::to_string(horizon) +
              " hooked steps: " + std::to_string(mismatches) +
              "; first-step (hook off) mismatches: " +
              std::to_string(first_mismatch);
  return v;
}

SuiteVerdict suite_determinism(const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  SuiteVerdict v{.suite = "determinism", .threshold = 0.0};
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::race;
  cfg.seeds = {1, 2, 3};
  cfg.horizon = 200;
  cfg.objective.type = "noisy_quadratic";
  cfg.objective.dim = 10;
  cfg.objective.eigen_min = 0.1;
  cfg.objective.eigen_max = 10.0;
  cfg.objective.noise_std = 0.5;
  {
    SgdfHyperparams hp;
    hp.alpha = 0.05;
    cfg.optimizers.push_back({"sgdf", hp});
    SgdHyperparams sg;
    sg.alpha = 0.05;
    cfg.optimizers.push_back({"sgd", sg});
  }

  RunOptions serial;
  serial.out_dir_override = (out_dir / "determinism_run1").string();
  serial.jobs = 1;
  RunOptions parallel;
  parallel.out_dir_override = (out_dir / "determinism_run2").string();
  parallel.jobs = 4;
  const ExperimentSummary s1 = run_experiment(cfg, serial);
  const ExperimentSummary s2 = run_experiment(cfg, parallel);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  std::int64_t differing = 0;
  if (s1.csv_files != s2.csv_files) ++differing;
  for (const auto& f : s1.csv_files) {
    if (slurp(s1.out_dir / f) != slurp(s2.out_dir / f)) ++differing;
  }
  if (slurp(s1.summary_path) != slurp(s2.summary_path)) ++differing;

  v.measured = static_cast<double>(differing);
  v.pass = differing == 0;
  v.details = std::to_string(s1.csv_files.size()) +
              " trace files compared byte-for-byte between a serial and a "
              "4-worker run";
  return v;
}

}  // namespace

const std::vector<std::string>& acceptance_suite_ids() {
  static const std::vector<std::string> ids = {
      "algo1-oracle",       "gain-bounds",        "variance-factor",
      "fusion-variance",    "race-quadratic",     "regret-trend",
      "nonconvex-rate",     "fpss-gaussian",      "fpss-doublewell",
      "hessian-diagnostics", "wiener-adam-reduction", "determinism",
  };
  return ids;
}

void write_verdict(const SuiteVerdict& verdict,
                   const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  nlohmann::json doc;
  doc["suite"] = verdict.suite;
  doc["pass"] = verdict.pass;
  doc["measured"] = verdict.measured;
  doc["threshold"] = verdict.threshold;
  doc["comparator"] = verdict.comparator;
  doc["details"] = verdict.details;
  const auto path = out_dir / (verdict.suite + ".json");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

SuiteVerdict run_acceptance_suite(const std::string& id,
                                  const std::filesystem::path& out_dir) {
  using Body = std::function<SuiteVerdict()>;
  const std::map<std::string, Body> suites = {
      {"algo1-oracle", suite_algo1_oracle},
      {"gain-bounds", suite_gain_bounds},
      {"variance-factor", suite_variance_factor},
      {"fusion-variance", suite_fusion_variance},
      {"race-quadratic", suite_race_quadratic},
      {"regret-trend", suite_regret_trend},
      {"nonconvex-rate", suite_nonconvex_rate},
      {"fpss-gaussian", suite_fpss_gaussian},
      {"fpss-doublewell", suite_fpss_doublewell},
      {"hessian-diagnostics", suite_hessian_diagnostics},
      {"wiener-adam-reduction", suite_wiener_adam_reduction},
      {"determinism", [&] { return suite_determinism(out_dir); }},
  };
  const auto it = suites.find(id);
  if (it == suites.end()) {
    throw UnknownSuite("unknown acceptance suite '" + id + "'");
  }
  SuiteVerdict verdict = it->second();
  write_verdict(verdict, out_dir);
  return verdict;
}

}  // namespace sgdf
