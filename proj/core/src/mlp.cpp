// Tiny feed-forward network with hand-written backpropagation, used as the
// desk-scale non-convex objective. tanh hidden units, sigmoid/cross-entropy
// head, generated two-moons data.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sgdf/errors.hpp"
#include "sgdf/objectives.hpp"

namespace sgdf {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_from_logit(double z, double y) {
  if (z > 0.0) return (1.0 - y) * z + std::log1p(std::exp(-z));
  return -y * z + std::log1p(std::exp(z));
}

class TinyMlp final : public StochasticObjective {
 public:
  explicit TinyMlp(const MlpConfig& cfg) : cfg_(cfg) {
    const auto& ls = cfg_.layer_sizes;
    if (ls.size() < 2 || ls.size() > 5) {
      throw InvalidConfig("tiny_mlp: need 0..3 hidden layers");
    }
    if (ls.front() != 2 || ls.back() != 1) {
      throw InvalidConfig("tiny_mlp: input width must be 2, output 1");
    }
    n_params_ = 0;
    for (std::size_t l = 0; l + 1 < ls.size(); ++l) {
      if (ls[l] == 0 || ls[l + 1] == 0) {
        throw InvalidConfig("tiny_mlp: zero-width layer");
      }
      n_params_ += ls[l + 1] * ls[l] + ls[l + 1];
    }
    if (n_params_ > 10000) {
      throw InvalidConfig("tiny_mlp: more than 10^4 parameters");
    }
    if (cfg_.n_samples < 2) throw InvalidConfig("tiny_mlp: n_samples < 2");
    if (cfg_.batch < 1 || cfg_.batch > cfg_.n_samples) {
      throw InvalidConfig("tiny_mlp: bad batch size");
    }
    generate_data();
    draw_initial_point();
  }

  std::size_t dim() const override { return n_params_; }
  std::string name() const override { return "tiny_mlp"; }

  double loss(const ParamVector& theta) const override {
    check_theta(theta);
    double acc = 0.0;
    Workspace ws(cfg_.layer_sizes);
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      acc += bce_from_logit(forward(theta, xs_[i], ws), ys_[i]);
    }
    return acc / static_cast<double>(xs_.size());
  }

  ParamVector true_grad(const ParamVector& theta) const override {
    check_theta(theta);
    ParamVector g(n_params_, 0.0);
    Workspace ws(cfg_.layer_sizes);
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      accumulate_sample_grad(theta, xs_[i], ys_[i], ws, g);
    }
    const double inv_n = 1.0 / static_cast<double>(xs_.size());
    for (double& x : g) x *= inv_n;
    return g;
  }

  ParamVector noisy_grad(const ParamVector& theta,
                         RngStream& rng) const override {
    check_theta(theta);
    // full-dataset batch degenerates to the deterministic gradient
    if (cfg_.batch == xs_.size()) return true_grad(theta);
    ParamVector g(n_params_, 0.0);
    Workspace ws(cfg_.layer_sizes);
    for (std::size_t b = 0; b < cfg_.batch; ++b) {
      auto i = static_cast<std::size_t>(rng.uniform01() *
                                        static_cast<double>(xs_.size()));
      i = std::min(i, xs_.size() - 1);
      accumulate_sample_grad(theta, xs_[i], ys_[i], ws, g);
    }
    const double inv_b = 1.0 / static_cast<double>(cfg_.batch);
    for (double& x : g) x *= inv_b;
    return g;
  }

  bool has_hvp() const override { return true; }

  // Central finite difference of the analytic gradient along v.
  ParamVector hvp(const ParamVector& theta,
                  const ParamVector& v) const override {
    check_theta(theta);
    ensure_same_dim(theta, v, "mlp hvp");
    const double vn = norm2(v);
    if (vn == 0.0) return zeros(n_params_);
    const double h = 1e-5;
    ParamVector lo(theta), hi(theta);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double step = h * v[i] / vn;
      hi[i] += step;
      lo[i] -= step;
    }
    ParamVector ghi = true_grad(hi);
    const ParamVector glo = true_grad(lo);
    const double coeff = vn / (2.0 * h);
    for (std::size_t i = 0; i < ghi.size(); ++i) {
      ghi[i] = (ghi[i] - glo[i]) * coeff;
    }
    return ghi;
  }

  double declared_noise_std() const override { return declared_noise_std_; }
  ParamVector initial_point() const override { return theta0_; }

 private:
  struct Workspace {
    // activations per layer plus the deltas reused during backprop
    std::vector<ParamVector> a;
    std::vector<ParamVector> delta;
    explicit Workspace(const std::vector<std::size_t>& ls) {
      a.reserve(ls.size());
      delta.reserve(ls.size());
      for (std::size_t s : ls) {
        a.emplace_back(s, 0.0);
        delta.emplace_back(s, 0.0);
      }
    }
  };

  void check_theta(const ParamVector& theta) const {
    if (theta.size() != n_params_) {
      throw DimensionMismatch("tiny_mlp: parameter vector size mismatch");
    }
  }

  // Returns the output logit; fills ws.a with activations.
  double forward(const ParamVector& theta, const std::array<double, 2>& x,
                 Workspace& ws) const {
    const auto& ls = cfg_.layer_sizes;
    ws.a[0][0] = x[0];
    ws.a[0][1] = x[1];
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < ls.size(); ++l) {
      const std::size_t in = ls[l], out = ls[l + 1];
      const bool last = (l + 2 == ls.size());
      for (std::size_t r = 0; r < out; ++r) {
        double z = theta[off + in * out + r];  // bias
        const double* w = &theta[off + r * in];
        for (std::size_t c = 0; c < in; ++c) z += w[c] * ws.a[l][c];
        ws.a[l + 1][r] = last ? z : std::tanh(z);
      }
      off += in * out + out;
    }
    return ws.a.back()[0];
  }

  void accumulate_sample_grad(const ParamVector& theta,
                              const std::array<double, 2>& x, double y,
                              Workspace& ws, ParamVector& g) const {
    const auto& ls = cfg_.layer_sizes;
    const double logit = forward(theta, x, ws);
    ws.delta.back()[0] = sigmoid(logit) - y;  // d loss / d logit
    // offsets of each layer's block
    std::size_t off_end = n_params_;
    for (std::size_t l = ls.size() - 1; l-- > 0;) {
      const std::size_t in = ls[l], out = ls[l + 1];
      const std::size_t off = off_end - (in * out + out);
      for (std::size_t r = 0; r < out; ++r) {
        const double d = ws.delta[l + 1][r];
        double* gw = &g[off + r * in];
        for (std::size_t c = 0; c < in; ++c) gw[c] += d * ws.a[l][c];
        g[off + in * out + r] += d;
      }
      if (l > 0) {
        for (std::size_t c = 0; c < in; ++c) {
          double acc = 0.0;
          for (std::size_t r = 0; r < out; ++r) {
            acc += theta[off + r * in + c] * ws.delta[l + 1][r];
          }
          const double a = ws.a[l][c];
          ws.delta[l][c] = acc * (1.0 - a * a);  // tanh'
        }
      }
      off_end = off;
    }
  }

  void generate_data() {
    RngStream rng(cfg_.data_seed, /*stream_id=*/18);
    xs_.resize(cfg_.n_samples);
    ys_.resize(cfg_.n_samples);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < cfg_.n_samples; ++i) {
      const double t = rng.uniform01() * std::numbers::pi;
      const bool second = (i % 2 == 1);
      double px, py;
      if (!second) {
        px = std::cos(t);
        py = std::sin(t);
      } else {
        px = 1.0 - std::cos(t);
        py = 0.5 - std::sin(t);
      }
      px += cfg_.data_noise * rng.normal();
      py += cfg_.data_noise * rng.normal();
      xs_[i] = {px, py};
      ys_[i] = second ? 1.0 : 0.0;
      mx += px;
      my += py;
    }
    mx /= static_cast<double>(cfg_.n_samples);
    my /= static_cast<double>(cfg_.n_samples);
    for (auto& p : xs_) {
      p[0] -= mx;
      p[1] -= my;
    }
  }

  void draw_initial_point() {
    RngStream rng(cfg_.data_seed, /*stream_id=*/19);
    theta0_.assign(n_params_, 0.0);
    const auto& ls = cfg_.layer_sizes;
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < ls.size(); ++l) {
      const std::size_t in = ls[l], out = ls[l + 1];
      const double s = 1.0 / std::sqrt(static_cast<double>(in));
      for (std::size_t i = 0; i < in * out; ++i) {
        theta0_[off + i] = s * rng.normal();
      }
      off += in * out + out;  // biases stay zero
    }
    // Conservative minibatch-noise bound measured at the starting point.
    const ParamVector full = true_grad(theta0_);
    double worst = 0.0;
    Workspace ws(ls);
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      ParamVector gi(n_params_, 0.0);
      accumulate_sample_grad(theta0_, xs_[i], ys_[i], ws, gi);
      for (std::size_t j = 0; j < n_params_; ++j) {
        worst = std::max(worst, std::abs(gi[j] - full[j]));
      }
    }
    declared_noise_std_ =
        4.0 * worst / std::sqrt(static_cast<double>(cfg_.batch));
  }

  MlpConfig cfg_;
  std::size_t n_params_ = 0;
  std::vector<std::array<double, 2>> xs_;
  std::vector<double> ys_;
  ParamVector theta0_;
  double declared_noise_std_ = 0.0;
};

}  // namespace

std::unique_ptr<StochasticObjective> tiny_mlp(const MlpConfig& cfg) {
  return std::make_unique<TinyMlp>(cfg);
}

}  // namespace sgdf
