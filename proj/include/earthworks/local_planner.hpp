#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "earthworks/global_planner.hpp"
#include "earthworks/gridmap.hpp"

namespace earthworks::local {

enum class ZoneId : std::uint8_t { Front = 0, FrontLeft = 1, FrontRight = 2, BackLeft = 3, BackRight = 4 };
inline constexpr std::array<ZoneId, 5> kZones{ZoneId::Front, ZoneId::FrontLeft, ZoneId::FrontRight, ZoneId::BackLeft,
                                              ZoneId::BackRight};
inline constexpr std::array<ZoneId, 4> kDumpZones{ZoneId::FrontLeft, ZoneId::FrontRight, ZoneId::BackLeft,
                                                  ZoneId::BackRight};
std::string_view zone_name(ZoneId z);

// Front: |alpha| <= ws/2, r in [r_in, r_out]. Laterals: ws/2 < |alpha| <= pi/2,
// backs: pi/2 < |alpha| < pi - ws/2, both r in [lateral_r_in, lateral_r_out].
// The rear corridor beyond that is zone free.
struct LocalGeometry {
  double workspace_angle = 1.9;
  double r_in = 4.5;
  double r_out = 7.0;
  double lateral_r_in = 3.5;
  double lateral_r_out = 7.5;
};

std::optional<ZoneId> zone_of(const LocalGeometry& g, const Pose2& base, Vec2 p);

struct Thresholds {
  double dig_margin = 0.05;  // a cell is diggable this far above its reference
  double deviation = 0.1;
  double deviation_fraction = 0.10;
  double remaining_fraction = 0.08;
  double refine_fraction = 0.10;
  double inactive_dig_fraction = 0.10;  // dump zone inactive above this share of Dig cells
  double boundary_width = 1.0;
  double footprint_margin = 0.5;
  double travel_margin = 3.0;  // extra no-dump clearance around future travel
  double min_dump_area = 1.0;
  double alpha = 4.0;
};

struct LocalConfig {
  LocalGeometry geometry;
  Thresholds thresholds;
  double half_length = 2.5;
  double half_width = 1.5;
};

// Working mask at one plan position plus the helper sets it was built from.
struct RefreshedMask {
  std::vector<grid::MaskValue> mask;
  std::vector<std::uint8_t> protect;       // future footprints and lane approaches: never dug
  std::vector<std::uint8_t> hull;          // convex hull of remaining footprints
  std::vector<std::uint8_t> dump_allowed;  // may receive soil
};

// `poses` are the working poses of the plan with their lane ids.
RefreshedMask refresh_mask(const grid::LayeredGrid& grid, std::span<const grid::MaskValue> user_mask,
                           std::span<const global::PlanPose> poses, std::size_t index, const LocalConfig& cfg);

struct ZoneState {
  ZoneId id = ZoneId::Front;
  std::vector<std::size_t> cells;       // zone members
  std::vector<std::size_t> dig_cells;   // cells this zone is responsible for digging
  std::vector<std::size_t> dump_cells;  // cells that may receive soil
  double total_volume = 0.0;            // planned at initialization
  double remaining_volume = 0.0;
  double deviation_fraction = 0.0;
  double dig_share = 0.0;  // fraction of members that are user Dig cells
  bool complete = true;
};

enum class Action { Dig, Refine, WorkspaceDone };

struct Selection {
  Action action = Action::WorkspaceDone;
  ZoneId dig_zone = ZoneId::Front;
  ZoneId dump_zone = ZoneId::FrontLeft;
  std::array<double, 5> dump_costs{};  // indexed by ZoneId, +inf when inactive
};

// The five zones anchored at one base pose. Membership and the dig and
// dump sets are frozen at construction; volumes follow the terrain.
class LocalWorkspace {
 public:
  LocalWorkspace(const grid::LayeredGrid& grid, std::span<const grid::MaskValue> user_mask,
                 const RefreshedMask& mask, const Pose2& base, const LocalConfig& cfg);

  const Pose2& base() const { return base_; }
  const LocalConfig& config() const { return cfg_; }
  const ZoneState& zone(ZoneId z) const { return zones_[std::size_t(z)]; }

  // Reference elevation for digging in zone z; NaN where digging is not allowed.
  std::vector<double> dig_reference(const grid::LayeredGrid& grid, ZoneId z) const;
  std::vector<std::uint8_t> receiving_mask(ZoneId z) const;
  Vec2 dump_centroid(ZoneId z) const;

  // Recomputes remaining volume, deviation and completion from the terrain.
  void update(const grid::LayeredGrid& grid);

  bool dump_active(ZoneId z, ZoneId dig_zone) const;
  double dump_cost(ZoneId z, Vec2 dig_point, ZoneId dig_zone = ZoneId::Front) const;

  // Throws DumpDeadlock when a zone needs digging but no zone takes soil.
  Selection select(const grid::LayeredGrid& grid, std::optional<Vec2> last_dig);

  bool refined() const { return refined_; }
  void mark_refined() { refined_ = true; }
  // Treats the zone as complete from now on, e.g. when the dig planner
  // finds nothing left to scoop in it.
  void mark_exhausted(ZoneId z);

 private:
  Pose2 base_;
  LocalConfig cfg_;
  grid::GridSpec spec_;
  std::array<ZoneState, 5> zones_;
  std::vector<double> sdf_dump_;
  std::vector<std::uint8_t> user_dig_;
  std::vector<std::uint8_t> protect_;
  std::array<bool, 5> exhausted_{};
  bool refined_ = false;
};

// Deviation and remaining-volume thresholds of one zone against `reference`.
bool zone_complete(const grid::LayeredGrid& grid, const ZoneState& zone, std::span<const double> reference,
                   const Thresholds& t);

// Mean SDF over the dump cells plus alpha * |x_dig - x_dump|^2.
double dump_cost(std::span<const double> sdf_dump, std::span<const std::size_t> dump_cells, Vec2 dump_point,
                 Vec2 dig_point, double alpha);

// Convex hull (counter-clockwise, no collinear points).
std::vector<Vec2> convex_hull(std::vector<Vec2> pts);

}  // namespace earthworks::local
