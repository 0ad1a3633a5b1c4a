#include "sgdf/schedule.hpp"

#include <cmath>
#include <numbers>

#include "sgdf/errors.hpp"

namespace sgdf {

double schedule_alpha(const ScheduleSpec& spec, double base_alpha,
                      std::int64_t t) {
  if (t < 1) throw InvalidSchedule("schedule_alpha: t < 1");
  switch (spec.kind) {
    case ScheduleKind::constant:
      return base_alpha;
    case ScheduleKind::inv_sqrt:
      return base_alpha / std::sqrt(static_cast<double>(t));
    case ScheduleKind::step_decay: {
      if (!(spec.decay_factor > 0.0)) {
        throw InvalidSchedule("step_decay: decay_factor must be > 0");
      }
      double alpha = base_alpha;
      for (std::int64_t m : spec.milestones) {
        if (m < t) alpha *= spec.decay_factor;
      }
      return alpha;
    }
    case ScheduleKind::cosine: {
      if (spec.total_steps < 1) {
        throw InvalidSchedule("cosine: total_steps must be >= 1");
      }
      if (t > spec.total_steps) {
        throw InvalidSchedule("cosine: t beyond schedule horizon");
      }
      const double phase = std::numbers::pi * static_cast<double>(t - 1) /
                           static_cast<double>(spec.total_steps);
      return base_alpha * 0.5 * (1.0 + std::cos(phase));
    }
  }
  throw InvalidSchedule("schedule_alpha: unknown kind");
}

}  // namespace sgdf
