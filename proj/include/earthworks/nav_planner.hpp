#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "earthworks/gridmap.hpp"

namespace earthworks::nav {

// Why a cell is not traversable; bits combine.
enum Provenance : std::uint8_t {
  kFree = 0,
  kOfflineSlope = 1,
  kUserNoGo = 2,
  kDug = 4,
  kPile = 8,
};

struct OccupancyParams {
  double pile_height = 0.3;  // deposited height above original ground
  double dug_depth = 0.05;   // Dig cells this far below the original ground count as dug
};

struct OccupancyGrid {
  grid::GridSpec spec;
  std::vector<std::uint8_t> provenance;
  std::vector<double> sdf_dug;      // metres to the nearest dug cell, +inf when none
  std::vector<double> clearance;    // metres to the nearest non-traversable cell centre
  bool traversable(std::size_t i) const { return provenance[i] == kFree; }
  std::size_t blocked_count() const;
};

OccupancyGrid fuse_occupancy(const grid::GridSpec& spec, std::span<const std::uint8_t> offline,
                             std::span<const grid::MaskValue> user_mask, std::span<const std::uint8_t> dug,
                             std::span<const std::uint8_t> pile);

// Derives the offline layer from the occupancy layer (> 0.5), dug cells
// from Dig cells below the original ground and piles from deposited height.
OccupancyGrid fuse_occupancy(const grid::LayeredGrid& grid, std::span<const grid::MaskValue> user_mask,
                             const OccupancyParams& p = {});

// ---- Reeds-Shepp curves ----

enum class Steer : std::uint8_t { None, Left, Straight, Right };

struct RsPath {
  std::array<Steer, 5> types{};
  std::array<double, 5> lengths{};  // signed, in turning radii; negative drives backward
  double radius = 1.0;
  double length() const;  // metres
  bool valid() const { return std::isfinite(length()); }
};

// Shortest Reeds-Shepp path; infinite length if none was found (never for a
// valid radius).
RsPath reeds_shepp(const Pose2& from, const Pose2& to, double radius);

// Pose after driving `s` metres along the path.
Pose2 rs_interpolate(const Pose2& from, const RsPath& path, double s);

struct PathSample {
  Pose2 pose;
  bool forward = true;
};

// Poses every `step` metres of arc length, both ends included.
std::vector<PathSample> rs_sample(const Pose2& from, const RsPath& path, double step);

// ---- planning ----

struct NavParams {
  double turning_radius = 3.0;
  double half_length = 2.5;
  double half_width = 1.5;
  double check_margin = 0.15;  // footprint inflation used while planning
  double check_step = 0.1;
  double alpha = 10.0;
  double beta = 5.0;
  double gamma = 0.7;
  int max_iterations = 5000;
  int improve_iterations = 300;  // kept after the first solution
  int trials = 10;
  double extend = 4.0;       // steering distance, m
  double goal_bias = 0.1;
  double connect_radius = 12.0;  // try a direct goal connection within this
  double goal_tolerance = 0.2;
  double heading_tolerance = 0.1;
  double speed = 0.5;  // m/s
  int threads = 1;
};

// Every covered cell traversable and the footprint inside the map.
bool footprint_free(const OccupancyGrid& occ, const Pose2& pose, double half_length, double half_width);

// Footprint inflated by the check margin.
bool state_valid(const OccupancyGrid& occ, const Pose2& pose, const NavParams& p);
bool path_valid(const OccupancyGrid& occ, const Pose2& from, const RsPath& path, const NavParams& p);

// Mean of beta * exp(-gamma * sdf_dug) over the footprint cells.
double dug_penalty(const OccupancyGrid& occ, const Pose2& pose, const NavParams& p);
double edge_cost(const OccupancyGrid& occ, const Pose2& to, const RsPath& path, const NavParams& p);

struct PathPlan {
  std::vector<Pose2> waypoints;  // start, tree nodes, goal
  std::vector<RsPath> segments;  // segments[i] joins waypoints[i] and waypoints[i + 1]
  double cost = 0.0;
  double length = 0.0;
  int trial = -1;  // successful trial, -1 for the empty plan
  int iterations = 0;

  std::vector<PathSample> sample(double step) const;
};

// Sum of edge costs over the plan against `occ`.
double plan_cost(const OccupancyGrid& occ, const PathPlan& plan, const NavParams& p);

// One RRT* trial; returns false when no path was found within the budget.
bool plan_trial(const OccupancyGrid& occ, const Pose2& start, const Pose2& goal, const NavParams& p,
                std::uint64_t seed, PathPlan& out);

// Up to `trials` independent trials; the lowest-index success wins, so the
// result does not depend on the thread count. Throws PathNotFound.
PathPlan plan_path(const OccupancyGrid& occ, const Pose2& start, const Pose2& goal, const NavParams& p,
                   std::uint64_t seed);

struct FollowResult {
  std::vector<PathSample> trajectory;
  double length = 0.0;
  double duration = 0.0;  // s
};

// Kinematic tracking at the configured speed after revalidating the plan
// against `occ`. Throws ReplanRequired when it no longer fits.
FollowResult follow_path(const PathPlan& plan, const OccupancyGrid& occ, const NavParams& p);

}  // namespace earthworks::nav
