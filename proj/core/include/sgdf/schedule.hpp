#pragma once

#include <cstdint>
#include <vector>

namespace sgdf {

enum class ScheduleKind { constant, inv_sqrt, step_decay, cosine };

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::constant;
  double decay_factor = 0.1;            // step_decay multiplier per milestone
  std::vector<std::int64_t> milestones;  // step_decay: last steps at old rate
  std::int64_t total_steps = 0;          // cosine horizon

  bool operator==(const ScheduleSpec&) const = default;
};

/// Step size at 1-based step t:
///   constant   : base_alpha
///   inv_sqrt   : base_alpha / sqrt(t)
///   step_decay : base_alpha * decay_factor^(#milestones m with m < t)
///   cosine     : base_alpha * 0.5 * (1 + cos(pi * (t-1) / total_steps)),
///                valid for t in [1, total_steps]
/// Throws InvalidSchedule for t < 1, t beyond the cosine horizon, or a
/// malformed spec (non-positive factor/horizon).
double schedule_alpha(const ScheduleSpec& spec, double base_alpha,
                      std::int64_t t);

}  // namespace sgdf
