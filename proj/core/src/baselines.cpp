#include "sgdf/baselines.hpp"

#include <cmath>

#include "sgdf/errors.hpp"

namespace sgdf {

namespace {

// Shared final update for Adam and Wiener-Adam. Keeping one expression tree
// here is what makes the gain_override == 0 reduction bit-exact.
void apply_adam_update(const ParamVector& params, const ParamVector& numerator,
                       const ParamVector& v, double v_corr, double alpha_t,
                       double epsilon, double weight_decay,
                       ParamVector& out_params) {
  out_params.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    double theta = params[i];
    if (weight_decay != 0.0) theta *= 1.0 - alpha_t * weight_decay;
    const double denom = std::sqrt(v[i] / v_corr) + epsilon;
    out_params[i] = theta - alpha_t * numerator[i] / denom;
  }
  ensure_finite(out_params, "adam update");
}

void update_second_moment(ParamVector& v, const ParamVector& grad,
                          double beta2) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
  }
}

}  // namespace

void validate(const SgdHyperparams& hp) {
  if (!(hp.alpha > 0.0)) throw InvalidConfig("alpha must be > 0");
  if (!(hp.momentum >= 0.0 && hp.momentum < 1.0)) {
    throw InvalidBeta("momentum must be in [0,1)");
  }
  if (hp.weight_decay < 0.0) throw InvalidConfig("weight_decay must be >= 0");
}

StepOutput sgd_step(const ParamVector& params, const ParamVector& grad,
                    SgdState& state, const SgdHyperparams& hp) {
  ensure_same_dim(params, grad, "sgd_step");
  ensure_same_dim(params, state.velocity, "sgd_step");
  if (!all_finite(grad)) {
    throw NonFiniteGradient("sgd_step: gradient has NaN/Inf entries");
  }
  state.t += 1;
  const double alpha_t = schedule_alpha(hp.schedule, hp.alpha, state.t);

  StepOutput out;
  out.new_params.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    double theta = params[i];
    if (hp.weight_decay != 0.0) theta *= 1.0 - alpha_t * hp.weight_decay;
    if (hp.momentum == 0.0) {
      out.new_params[i] = theta - alpha_t * grad[i];
    } else {
      state.velocity[i] = hp.momentum * state.velocity[i] + alpha_t * grad[i];
      out.new_params[i] = theta - state.velocity[i];
    }
  }
  ensure_finite(out.new_params, "sgd_step");
  out.filtered_grad = grad;
  out.alpha_t = alpha_t;
  return out;
}

void validate(const AdamHyperparams& hp) {
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

StepOutput adam_step(const ParamVector& params, const ParamVector& grad,
                     AdamState& state, const AdamHyperparams& hp) {
  ensure_same_dim(params, grad, "adam_step");
  ensure_same_dim(params, state.m, "adam_step");
  if (!all_finite(grad)) {
    throw NonFiniteGradient("adam_step: gradient has NaN/Inf entries");
  }
  state.t += 1;
  state.beta1_pow *= hp.beta1;
  state.beta2_pow *= hp.beta2;
  const double alpha_t = schedule_alpha(hp.schedule, hp.alpha, state.t);
  const double m_corr = 1.0 - state.beta1_pow;
  const double v_corr = 1.0 - state.beta2_pow;

  ParamVector m_hat(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double m = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * grad[i];
    state.m[i] = m;
    m_hat[i] = m / m_corr;
  }
  update_second_moment(state.v, grad, hp.beta2);

  StepOutput out;
  apply_adam_update(params, m_hat, state.v, v_corr, alpha_t, hp.epsilon,
                    hp.weight_decay, out.new_params);
  out.filtered_grad = std::move(m_hat);
  out.alpha_t = alpha_t;
  return out;
}

void validate(const WienerAdamHyperparams& hp) {
  AdamHyperparams base;
  base.alpha = hp.alpha;
  base.beta1 = hp.beta1;
  base.beta2 = hp.beta2;
  base.epsilon = hp.epsilon;
  base.weight_decay = hp.weight_decay;
  validate(base);
  if (hp.gain_override &&
      !(*hp.gain_override >= 0.0 && *hp.gain_override <= 1.0)) {
    throw InvalidConfig("gain_override must be in [0,1]");
  }
}

StepOutput wiener_adam_step(const ParamVector& params, const ParamVector& grad,
                            WienerAdamState& state,
                            const WienerAdamHyperparams& hp) {
  ensure_same_dim(params, grad, "wiener_adam_step");
  ensure_same_dim(params, state.filter.m, "wiener_adam_step");
  FilterOutput f = filter_update(grad, state.filter, hp.beta1, hp.beta2,
                                 hp.epsilon, hp.gain_override);
  const double alpha_t =
      schedule_alpha(hp.schedule, hp.alpha, state.filter.t);
  const double v_corr = 1.0 - state.filter.beta2_pow;
  update_second_moment(state.v, grad, hp.beta2);

  StepOutput out;
  apply_adam_update(params, f.g_hat, state.v, v_corr, alpha_t, hp.epsilon,
                    hp.weight_decay, out.new_params);
  out.filtered_grad = std::move(f.g_hat);
  out.gain = std::move(f.gain);
  out.m_hat = std::move(f.m_hat);
  out.s_hat = std::move(f.s_hat);
  out.alpha_t = alpha_t;
  return out;
}

}  // namespace sgdf
