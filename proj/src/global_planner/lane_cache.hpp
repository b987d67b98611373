#pragma once

#include "earthworks/global_planner.hpp"

namespace earthworks::global {

// Lane geometry and pose feasibility of one cell, shared by all corner
// and subroutine options.
class LaneCache {
 public:
  LaneCache(const Cell& cell, const RotatedFrame& frame, const PlannerParams& params,
            const FootprintChecker& checker);

  int lane_count() const { return int(lanes_.size()); }
  LaneSet assemble(const Cell& cell, int entry, Subroutine s, bool flip, bool relaxed) const;

 private:
  struct Lane {
    double u = 0.0;
    double v_lo = 0.0, v_hi = 0.0;
    std::array<std::vector<Pose2>, 2> poses;  // [0] runs towards +v, [1] towards -v
    std::array<std::vector<char>, 2> free;
  };

  std::vector<Pose2> relaxed_poses(int lane, int dir) const;

  RotatedFrame frame_;
  PlannerParams params_;
  const FootprintChecker& checker_;
  std::vector<Lane> lanes_;
};

}  // namespace earthworks::global
