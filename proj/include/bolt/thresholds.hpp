#pragma once

namespace bolt {

/// Change-detection thresholds for monthly employment series. Education
/// series report every level transition and need no threshold.
struct ChangeThresholds {
  double salary_rel_jump = 0.10;
  double vacation_days_min = 5.0;
  double sick_days_min = 5.0;

  bool operator==(const ChangeThresholds&) const = default;
};

}  // namespace bolt
