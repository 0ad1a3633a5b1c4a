#include "sgdf/optimizer.hpp"

#include <cmath>

#include "sgdf/errors.hpp"

namespace sgdf {

void validate(const SgdfHyperparams& hp) {
  if (!(hp.alpha > 0.0)) throw InvalidConfig("alpha must be > 0");
  if (!(hp.beta1 >= 0.0 && hp.beta1 < 1.0)) {
    throw InvalidBeta("beta1 must be in [0,1)");
  }
  if (!(hp.beta2 >= 0.0 && hp.beta2 < 1.0)) {
    throw InvalidBeta("beta2 must be in [0,1)");
  }
  if (!(hp.epsilon > 0.0)) throw InvalidConfig("epsilon must be > 0");
  if (hp.weight_decay < 0.0) throw InvalidConfig("weight_decay must be >= 0");
}

FilterOutput filter_update(const ParamVector& grad, FilterState& state,
                           double beta1, double beta2, double epsilon,
                           std::optional<double> gain_override) {
  ensure_same_dim(grad, state.m, "filter_update");
  if (!all_finite(grad)) {
    throw NonFiniteGradient("filter_update: gradient has NaN/Inf entries");
  }

  state.t += 1;
  state.beta1_pow *= beta1;
  state.beta1_sq_pow *= beta1 * beta1;
  state.beta2_pow *= beta2;

  const double m_corr = 1.0 - state.beta1_pow;
  const double s_num = (1.0 - beta1) * (1.0 - state.beta1_sq_pow);
  const double s_den = (1.0 + beta1) * (1.0 - state.beta2_pow);

  const std::size_t d = grad.size();
  FilterOutput out;
  out.g_hat.resize(d);
  out.gain.resize(d);
  out.m_hat.resize(d);
  out.s_hat.resize(d);

  for (std::size_t i = 0; i < d; ++i) {
    const double g = grad[i];
    const double m = beta1 * state.m[i] + (1.0 - beta1) * g;
    state.m[i] = m;
    const double dev = g - m;
    const double s = beta2 * state.s[i] + (1.0 - beta2) * dev * dev;
    state.s[i] = s;

    const double m_hat = m / m_corr;
    const double s_hat = s_num * s / s_den;
    const double inno = g - m_hat;
    double k;
    if (gain_override) {
      k = *gain_override;
    } else {
      const double denom = s_hat + (inno * inno + epsilon);
      k = denom == 0.0 ? 0.0 : s_hat / denom;
    }
    out.m_hat[i] = m_hat;
    out.s_hat[i] = s_hat;
    out.gain[i] = k;
    out.g_hat[i] = m_hat + k * (g - m_hat);
  }
  return out;
}

StepOutput sgdf_step(const ParamVector& params, const ParamVector& grad,
                     FilterState& state, const SgdfHyperparams& hp) {
  ensure_same_dim(params, grad, "sgdf_step");
  FilterOutput f =
      filter_update(grad, state, hp.beta1, hp.beta2, hp.epsilon);
  const double alpha_t = schedule_alpha(hp.schedule, hp.alpha, state.t);

  StepOutput out;
  out.new_params.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    double theta = params[i];
    if (hp.weight_decay != 0.0) theta *= 1.0 - alpha_t * hp.weight_decay;
    out.new_params[i] = theta - alpha_t * f.g_hat[i];
  }
  ensure_finite(out.new_params, "sgdf_step");
  out.filtered_grad = std::move(f.g_hat);
  out.gain = std::move(f.gain);
  out.m_hat = std::move(f.m_hat);
  out.s_hat = std::move(f.s_hat);
  out.alpha_t = alpha_t;
  return out;
}

}  // namespace sgdf
