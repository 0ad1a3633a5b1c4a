#include "sgdf/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "sgdf/errors.hpp"

namespace sgdf {

ParamVector StochasticObjective::hvp(const ParamVector&,
                                     const ParamVector&) const {
  throw InvalidConfig(name() + ": no Hessian-vector product");
}

namespace {

class NoisyQuadratic final : public StochasticObjective {
 public:
  NoisyQuadratic(std::vector<double> eigenvalues, double noise_std)
      : lambda_(std::move(eigenvalues)), sigma_(noise_std) {
    if (lambda_.empty()) throw InvalidEigenvalue("empty eigenvalue list");
    for (double l : lambda_) {
      if (!(l > 0.0) || !std::isfinite(l)) {
        throw InvalidEigenvalue("eigenvalues must be finite and > 0");
      }
    }
    if (sigma_ < 0.0) throw InvalidStd("noise_std < 0");
  }

  std::size_t dim() const override { return lambda_.size(); }
  std::string name() const override { return "noisy_quadratic"; }

  double loss(const ParamVector& theta) const override {
    ensure_same_dim(theta, lambda_, "quadratic loss");
    double acc = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      acc += lambda_[i] * theta[i] * theta[i];
    }
    return 0.5 * acc;
  }

  ParamVector true_grad(const ParamVector& theta) const override {
    return mul(lambda_, theta);
  }

  ParamVector noisy_grad(const ParamVector& theta,
                         RngStream& rng) const override {
    ParamVector g = true_grad(theta);
    if (sigma_ > 0.0) {
      for (double& x : g) x += sigma_ * rng.normal();
    }
    return g;
  }

  bool has_hvp() const override { return true; }
  ParamVector hvp(const ParamVector&, const ParamVector& v) const override {
    return mul(lambda_, v);
  }

  std::optional<ParamVector> optimum() const override {
    return zeros(dim());
  }
  std::optional<double> optimum_value() const override { return 0.0; }
  double declared_noise_std() const override { return sigma_; }
  ParamVector initial_point() const override {
    return ParamVector(dim(), 1.0);
  }

 private:
  std::vector<double> lambda_;
  double sigma_;
};

class NoisyRosenbrock final : public StochasticObjective {
 public:
  explicit NoisyRosenbrock(double noise_std) : sigma_(noise_std) {
    if (sigma_ < 0.0) throw InvalidStd("noise_std < 0");
  }

  std::size_t dim() const override { return 2; }
  std::string name() const override { return "noisy_rosenbrock"; }

  double loss(const ParamVector& theta) const override {
    check(theta);
    const double x = theta[0], y = theta[1];
    const double a = 1.0 - x;
    const double b = y - x * x;
    return a * a + 100.0 * b * b;
  }

  ParamVector true_grad(const ParamVector& theta) const override {
    check(theta);
    const double x = theta[0], y = theta[1];
    const double b = y - x * x;
    return {-2.0 * (1.0 - x) - 400.0 * x * b, 200.0 * b};
  }

  ParamVector noisy_grad(const ParamVector& theta,
                         RngStream& rng) const override {
    ParamVector g = true_grad(theta);
    if (sigma_ > 0.0) {
      g[0] += sigma_ * rng.normal();
      g[1] += sigma_ * rng.normal();
    }
    return g;
  }

  bool has_hvp() const override { return true; }
  ParamVector hvp(const ParamVector& theta,
                  const ParamVector& v) const override {
    check(theta);
    ensure_same_dim(theta, v, "rosenbrock hvp");
    const double x = theta[0], y = theta[1];
    const double hxx = 2.0 - 400.0 * y + 1200.0 * x * x;
    const double hxy = -400.0 * x;
    return {hxx * v[0] + hxy * v[1], hxy * v[0] + 200.0 * v[1]};
  }

  std::optional<ParamVector> optimum() const override {
    return ParamVector{1.0, 1.0};
  }
  std::optional<double> optimum_value() const override { return 0.0; }
  double declared_noise_std() const override { return sigma_; }
  ParamVector initial_point() const override { return {-1.2, 1.0}; }

 private:
  static void check(const ParamVector& theta) {
    if (theta.size() != 2) {
      throw DimensionMismatch("rosenbrock is two-dimensional");
    }
  }
  double sigma_;
};

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// -log p(y | z) for a Bernoulli with logit z, stable in both tails.
double bce_from_logit(double z, double y) {
  if (z > 0.0) return (1.0 - y) * z + std::log1p(std::exp(-z));
  return -y * z + std::log1p(std::exp(z));
}

class SyntheticLogistic final : public StochasticObjective {
 public:
  explicit SyntheticLogistic(const LogisticConfig& cfg) : cfg_(cfg) {
    if (cfg_.n_samples < cfg_.dim) {
      throw InvalidConfig("synthetic_logistic: n_samples < dim");
    }
    if (!(cfg_.l2 > 0.0)) throw InvalidConfig("synthetic_logistic: l2 <= 0");
    if (cfg_.batch < 1 || cfg_.batch > cfg_.n_samples) {
      throw InvalidConfig("synthetic_logistic: bad batch size");
    }
    RngStream rng(cfg_.data_seed, /*stream_id=*/17);
    x_.resize(cfg_.n_samples);
    y_.resize(cfg_.n_samples);
    ParamVector planted = gaussian_vector(rng, cfg_.dim, 0.0, 1.0);
    max_row_norm_ = 0.0;
    for (std::size_t i = 0; i < cfg_.n_samples; ++i) {
      x_[i] = gaussian_vector(rng, cfg_.dim, 0.0, 1.0);
      max_row_norm_ = std::max(max_row_norm_, norm2(x_[i]));
      y_[i] = rng.uniform01() < sigmoid(dot(x_[i], planted)) ? 1.0 : 0.0;
    }
    solve_optimum();
  }

  std::size_t dim() const override { return cfg_.dim; }
  std::string name() const override { return "synthetic_logistic"; }

  double loss(const ParamVector& theta) const override {
    ensure_same_dim(theta, x_[0], "logistic loss");
    double acc = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      acc += bce_from_logit(dot(x_[i], theta), y_[i]);
    }
    return acc / static_cast<double>(x_.size()) +
           0.5 * cfg_.l2 * norm2_sq(theta);
  }

  ParamVector true_grad(const ParamVector& theta) const override {
    ensure_same_dim(theta, x_[0], "logistic grad");
    ParamVector g(cfg_.dim, 0.0);
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double r = sigmoid(dot(x_[i], theta)) - y_[i];
      for (std::size_t j = 0; j < cfg_.dim; ++j) g[j] += r * x_[i][j];
    }
    const double inv_n = 1.0 / static_cast<double>(x_.size());
    for (std::size_t j = 0; j < cfg_.dim; ++j) {
      g[j] = g[j] * inv_n + cfg_.l2 * theta[j];
    }
    return g;
  }

  ParamVector noisy_grad(const ParamVector& theta,
                         RngStream& rng) const override {
    ensure_same_dim(theta, x_[0], "logistic noisy grad");
    // full-dataset batch degenerates to the deterministic gradient
    if (cfg_.batch == x_.size()) return true_grad(theta);
    ParamVector g(cfg_.dim, 0.0);
    for (std::size_t b = 0; b < cfg_.batch; ++b) {
      const auto i = static_cast<std::size_t>(
          rng.uniform01() * static_cast<double>(x_.size()));
      const std::size_t idx = std::min(i, x_.size() - 1);
      const double r = sigmoid(dot(x_[idx], theta)) - y_[idx];
      for (std::size_t j = 0; j < cfg_.dim; ++j) g[j] += r * x_[idx][j];
    }
    const double inv_b = 1.0 / static_cast<double>(cfg_.batch);
    for (std::size_t j = 0; j < cfg_.dim; ++j) {
      g[j] = g[j] * inv_b + cfg_.l2 * theta[j];
    }
    return g;
  }

  std::optional<ParamVector> optimum() const override { return theta_star_; }
  std::optional<double> optimum_value() const override { return f_star_; }

  double declared_noise_std() const override {
    // Per-sample gradient entries are bounded by max_i |x_i| on any
    // bounded iterate region; the minibatch mean divides the std by
    // sqrt(batch).
    return max_row_norm_ / std::sqrt(static_cast<double>(cfg_.batch));
  }

 private:
  // Full-batch Newton with a dense Cholesky solve; dim is small by
  // construction. Runs to machine-precision gradient norm.
  void solve_optimum() {
    const std::size_t d = cfg_.dim;
    ParamVector theta(d, 0.0);
    for (int iter = 0; iter < 60; ++iter) {
      ParamVector g = true_grad(theta);
      if (norm2(g) < 1e-12) break;
      // Hessian = (1/n) X^T diag(p(1-p)) X + l2 I
      std::vector<double> h(d * d, 0.0);
      for (std::size_t i = 0; i < x_.size(); ++i) {
        const double p = sigmoid(dot(x_[i], theta));
        const double w = p * (1.0 - p) / static_cast<double>(x_.size());
        for (std::size_t r = 0; r < d; ++r) {
          for (std::size_t c = 0; c <= r; ++c) {
            h[r * d + c] += w * x_[i][r] * x_[i][c];
          }
        }
      }
      for (std::size_t r = 0; r < d; ++r) {
        h[r * d + r] += cfg_.l2;
        for (std::size_t c = r + 1; c < d; ++c) h[r * d + c] = h[c * d + r];
      }
      ParamVector step = cholesky_solve(h, g, d);
      for (std::size_t j = 0; j < d; ++j) theta[j] -= step[j];
    }
    if (norm2(true_grad(theta)) > 1e-8) {
      throw InvalidConfig("synthetic_logistic: Newton solve did not converge");
    }
    theta_star_ = theta;
    f_star_ = loss(theta);
  }

  static ParamVector cholesky_solve(std::vector<double> a, ParamVector b,
                                    std::size_t d) {
    // a <- L with a = L L^T (lower triangle)
    for (std::size_t j = 0; j < d; ++j) {
      double diag = a[j * d + j];
      for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
      if (!(diag > 0.0)) {
        throw InvalidConfig("cholesky: matrix not positive definite");
      }
      a[j * d + j] = std::sqrt(diag);
      for (std::size_t i = j + 1; i < d; ++i) {
        double v = a[i * d + j];
        for (std::size_t k = 0; k < j; ++k) v -= a[i * d + k] * a[j * d + k];
        a[i * d + j] = v / a[j * d + j];
      }
    }
    // forward then back substitution
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k < i; ++k) b[i] -= a[i * d + k] * b[k];
      b[i] /= a[i * d + i];
    }
    for (std::size_t ii = d; ii-- > 0;) {
      for (std::size_t k = ii + 1; k < d; ++k) b[ii] -= a[k * d + ii] * b[k];
      b[ii] /= a[ii * d + ii];
    }
    return b;
  }

  LogisticConfig cfg_;
  std::vector<ParamVector> x_;
  std::vector<double> y_;
  ParamVector theta_star_;
  double f_star_ = 0.0;
  double max_row_norm_ = 0.0;
};

}  // namespace

std::unique_ptr<StochasticObjective> noisy_quadratic(
    std::vector<double> eigenvalues, double noise_std) {
  return std::make_unique<NoisyQuadratic>(std::move(eigenvalues), noise_std);
}

std::vector<double> log_spaced_eigenvalues(std::size_t dim, double lo,
                                           double hi) {
  if (dim == 0 || !(lo > 0.0) || !(hi >= lo)) {
    throw InvalidEigenvalue("log_spaced_eigenvalues: need dim>=1, 0<lo<=hi");
  }
  std::vector<double> out(dim);
  if (dim == 1) {
    out[0] = lo;
    return out;
  }
  const double step = std::log(hi / lo) / static_cast<double>(dim - 1);
  for (std::size_t i = 0; i < dim; ++i) {
    out[i] = lo * std::exp(step * static_cast<double>(i));
  }
  return out;
}

std::unique_ptr<StochasticObjective> noisy_rosenbrock(double noise_std) {
  return std::make_unique<NoisyRosenbrock>(noise_std);
}

std::unique_ptr<StochasticObjective> synthetic_logistic(
    const LogisticConfig& cfg) {
  return std::make_unique<SyntheticLogistic>(cfg);
}

// ------------------------------------------------------------- stream ----

OnlineConvexStream::OnlineConvexStream(std::vector<ParamVector> centers)
    : centers_(std::move(centers)) {
  if (centers_.empty()) throw InvalidConfig("convex stream: empty horizon");
  comparator_ = zeros(centers_[0].size());
  for (const auto& c : centers_) {
    ensure_same_dim(c, comparator_, "convex stream centers");
    for (std::size_t j = 0; j < c.size(); ++j) comparator_[j] += c[j];
    max_center_norm_ = std::max(max_center_norm_, norm2(c));
  }
  for (double& x : comparator_) {
    x /= static_cast<double>(centers_.size());
  }
}

const ParamVector& OnlineConvexStream::center(std::int64_t t) const {
  if (t < 1 || t > horizon()) throw OutOfOrderStep("stream round out of range");
  return centers_[static_cast<std::size_t>(t - 1)];
}

double OnlineConvexStream::loss(std::int64_t t,
                                const ParamVector& theta) const {
  const ParamVector& c = center(t);
  ensure_same_dim(theta, c, "stream loss");
  double acc = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double d = theta[j] - c[j];
    acc += d * d;
  }
  return 0.5 * acc;
}

ParamVector OnlineConvexStream::grad(std::int64_t t,
                                     const ParamVector& theta) const {
  return sub(theta, center(t));
}

double OnlineConvexStream::comparator_loss(std::int64_t t) const {
  return loss(t, comparator_);
}

OnlineConvexStream convex_stream(DriftKind kind, std::size_t dim,
                                 std::int64_t horizon, double radius,
                                 double drift_step, std::uint64_t seed) {
  if (horizon < 1) throw InvalidConfig("convex_stream: horizon < 1");
  if (dim < 1) throw InvalidConfig("convex_stream: dim < 1");
  std::vector<ParamVector> centers;
  centers.reserve(static_cast<std::size_t>(horizon));
  switch (kind) {
    case DriftKind::constant: {
      ParamVector c = zeros(dim);
      c[0] = radius;
      centers.assign(static_cast<std::size_t>(horizon), c);
      break;
    }
    case DriftKind::alternating: {
      for (std::int64_t t = 0; t < horizon; ++t) {
        ParamVector c = zeros(dim);
        c[0] = (t % 2 == 0) ? radius : -radius;
        centers.push_back(std::move(c));
      }
      break;
    }
    case DriftKind::random_walk: {
      RngStream rng(seed, /*stream_id=*/29);
      ParamVector c = zeros(dim);
      for (std::int64_t t = 0; t < horizon; ++t) {
        for (double& x : c) x += drift_step * rng.normal();
        c = project_to_ball(c, radius);
        centers.push_back(c);
      }
      break;
    }
  }
  return OnlineConvexStream(std::move(centers));
}

ParamVector project_to_ball(const ParamVector& theta, double radius) {
  const double n = norm2(theta);
  if (n <= radius || n == 0.0) return theta;
  return scale(theta, radius / n);
}

}  // namespace sgdf
