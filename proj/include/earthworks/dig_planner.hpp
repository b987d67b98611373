#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "earthworks/gridmap.hpp"
#include "earthworks/local_planner.hpp"
#include "earthworks/soil_sim.hpp"

namespace earthworks::dig {

struct TrajectoryParams {
  double gamma_min = 0.5;
  double gamma_max = 1.5;
  double gamma_max_dirt = 0.9;
  double d_max = 1.5;   // longest drag
  double h_max = 0.3;   // deepest cut below the surface
  double v_bucket = 0.6;
  double v_max = 0.8;   // drag stops once the bucket holds this much
  double h_close = 0.5;
  double v_dig = 0.5;   // m/s
  double dt = 0.1;
  double shovel_width = 1.2;
  double shovel_length = 0.4;
  double collision_radius = 2.5;  // drag never comes closer to the base

  void validate() const;
  double step() const { return v_dig * dt; }
};

// Polar sector in the base frame; theta is measured from the base heading,
// positive to the left.
struct Sector {
  double r_in = 4.5;
  double r_out = 7.0;
  double theta_min = -0.95;
  double theta_max = 0.95;

  bool contains(double r, double theta) const {
    return r > r_in && r < r_out && theta > theta_min && theta < theta_max;
  }
  double area() const { return 0.5 * (theta_max - theta_min) * (r_out * r_out - r_in * r_in); }
};

Sector zone_sector(const local::LocalGeometry& g, local::ZoneId z);

// Attitude at radius r: gamma_min at r_out rising linearly to gamma_max at r_in.
double attitude(const TrajectoryParams& p, const Sector& s, double r);

// What the trajectory digs against. `reference` has one entry per cell and
// is NaN where digging is not allowed.
struct DigScene {
  const grid::LayeredGrid* grid = nullptr;
  Pose2 base;
  std::span<const double> reference;
  Sector sector;
};

enum class Phase : std::uint8_t { Penetration, Drag, Close };
enum class StopReason : std::uint8_t { NothingToDig, Full, SelfCollision, LeftZone, MaxDrag };
std::string_view stop_reason_name(StopReason r);

struct EdgeState {
  Phase phase = Phase::Penetration;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double gamma = 0.0;
};

struct DigTrajectory {
  double r = 0.0;
  double theta = 0.0;
  bool loose = false;
  std::vector<EdgeState> steps;
  double drag_length = 0.0;
  double duration = 0.0;  // s
};

struct ScoopResult {
  double volume = 0.0;
  std::vector<soil::CellChange> removed;
  StopReason reason = StopReason::NothingToDig;
  DigTrajectory trajectory;
};

// Kinematic scoop on the current terrain; the grid is not modified.
// Throws AttackOutOfBounds when (r, theta) lies outside the sector.
ScoopResult simulate_dig(const DigScene& scene, double r, double theta, const TrajectoryParams& params,
                         bool loose = false);

// Volume only, for the optimizer.
double scoop_volume(const DigScene& scene, double r, double theta, const TrajectoryParams& params);

// Loose soil: the attack cell sits above the original ground.
bool is_loose(const grid::LayeredGrid& grid, const Pose2& base, double r, double theta);

// ---- Gaussian-process surrogate ----

struct GpParams {
  double length_scale = 1.0;
  double noise = 1e-4;  // observation noise variance
};

// Matern-5/2 with fixed hyperparameters. Targets are centred on their mean
// and the signal variance is their sample variance.
class GaussianProcess {
 public:
  explicit GaussianProcess(GpParams p = {}) : p_(p) {}
  void fit(std::span<const Vec2> x, std::span<const double> y);
  // Posterior mean and standard deviation.
  std::pair<double, double> predict(Vec2 x) const;
  double kernel(Vec2 a, Vec2 b) const;

 private:
  GpParams p_;
  std::vector<Vec2> x_;
  std::vector<double> alpha_;
  std::vector<double> chol_;  // lower factor, row-major n x n
  double mean_ = 0.0;
  double var_ = 1.0;
};

double expected_improvement(double mean, double sd, double best, double xi);

struct BoParams {
  int initial = 20;
  int iterations = 10;
  double xi = 0.01;
  GpParams gp;
  int candidates_r = 24;  // acquisition lattice
  int candidates_theta = 48;
  int threads = 1;
};

struct Sample {
  double r = 0.0;
  double theta = 0.0;
  double volume = 0.0;
};

struct AttackResult {
  double r = 0.0;
  double theta = 0.0;
  double volume = 0.0;
  bool nothing_to_dig = false;  // every evaluation scooped nothing
  std::vector<Sample> samples;  // in evaluation order
};

// Initial design: jittered Cartesian lattice clipped to the sector.
std::vector<Sample> initial_design(const Sector& s, int count, std::uint64_t seed);

AttackResult optimize_attack(const DigScene& scene, const TrajectoryParams& params, const BoParams& bo,
                             std::uint64_t seed);

// Reference optimizer: evaluates a polar lattice of about `samples` points.
AttackResult grid_search_attack(const DigScene& scene, const TrajectoryParams& params, int samples = 150);

// ---- refinement ----

struct Sweep {
  double theta = 0.0;
  double r_start = 0.0;  // outer end
  double r_end = 0.0;
  double gamma = 0.0;
};

// Sector grown by `expand` of its radial and angular spans, split into
// left-to-right radially inward sweeps one shovel width apart at the
// outer radius.
std::vector<Sweep> plan_refinement(const Sector& s, const TrajectoryParams& params, double expand = 0.10);

struct SweepResult {
  std::vector<soil::CellChange> changes;  // signed: negative cut, positive fill
  double carried = 0.0;                   // soil left in the bucket at the inner end
};

// Grading pass with the edge at the reference: cuts cells above it and
// drops carried soil into cells below it further in.
SweepResult simulate_sweep(const DigScene& scene, const Sweep& sweep, const TrajectoryParams& params);

// ---- dumping ----

struct DumpParams {
  double alpha = 1.0;
  double beta = 0.1;
  double gamma = 0.05;
};

struct DumpPoint {
  std::size_t cell = 0;
  Vec2 position;
  double heading = 0.0;  // tangential to the base
  double cost = 0.0;
};

double dump_heading(const Pose2& base, Vec2 p);

// Sum of dirt height (elevation - original) over cells under the shovel
// rectangle centred at p with the tangential heading.
double shovel_filter_sum(const grid::LayeredGrid& grid, const Pose2& base, Vec2 p, const TrajectoryParams& params);

// Grid search over `cells`. Throws ZoneInactive when `cells` is empty.
DumpPoint select_dump_point(const grid::LayeredGrid& grid, std::span<const std::size_t> cells, const Pose2& base,
                            const TrajectoryParams& params, const DumpParams& dp = {});

}  // namespace earthworks::dig
