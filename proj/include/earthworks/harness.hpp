#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "earthworks/global_planner.hpp"
#include "earthworks/gridmap.hpp"
#include "earthworks/mission.hpp"
#include "earthworks/nav_planner.hpp"

namespace earthworks::bench {

// ---- fixtures ----

struct PitOptions {
  double length = 15.6;
  double width = 11.5;
  double depth = 1.0;
  double margin = 17.2;  // ground around the pit along its length
  double side_margin = 13.25;
  double resolution = 0.1;
  bool fence = true;  // blocks the lane exits that only corners 0 and 3 need
  bool dump_strips = true;
};

// Rectangular pit with lanes along x on flat ground at elevation 0.
// Permanent dump strips run along both long sides; the rest is Neutral
// and the fence is NoGo.
grid::Site pit_site(const PitOptions& o = {});

// Pit whose surroundings are NoGo except a dump pocket beside the first
// lane start. The mission digs from the first poses and fails with
// DumpDeadlock at `failing_pose`, the first working pose none of whose
// dump zones reaches the pocket.
struct DeadlockFixture {
  grid::Site site;
  global::CoveragePlan plan;
  int failing_pose = -1;
};
DeadlockFixture dump_deadlock_fixture(const mission::MissionConfig& cfg = {});

// Decomposition examples: a 20 x 12 m rectangle around a square obstacle,
// and a 30 x 14 m rectangle around an H lying on its side whose pockets
// open to the sweep. Lanes run along y (theta = pi/2).
struct DecompositionFixture {
  grid::GridSpec spec;
  std::vector<std::uint8_t> dig;
  double theta = 0.0;
};
DecompositionFixture convex_obstacle_fixture();
DecompositionFixture concave_obstacle_fixture();

// ---- procedural benchmark ----

enum class Family : std::uint8_t {
  Foundations,
  ExteriorFoundations,
  ExteriorFoundationsTraversable,
  Crops,
  ExteriorCrops
};
inline constexpr std::array<Family, 5> kFamilies{Family::Foundations, Family::ExteriorFoundations,
                                                 Family::ExteriorFoundationsTraversable, Family::Crops,
                                                 Family::ExteriorCrops};
std::string_view family_name(Family f);
Family parse_family(std::string_view s);
std::pair<double, double> side_range(Family f);
bool is_crops(Family f);

struct BenchmarkTask {
  Family family = Family::Foundations;
  std::uint64_t seed = 0;
  double side = 0.0;
  int attempts = 1;  // sub-seeds used until the geometry was valid
  grid::LayeredGrid site;
};

// Cell size scales with the side so a task has at most about 400 x 400 cells.
double task_resolution(Family f, double side);

// Throws InvalidArgument when side is outside the family range.
BenchmarkTask generate_task(Family family, std::uint64_t seed, double side);
// Side drawn from the family range with the seed.
BenchmarkTask generate_task(Family family, std::uint64_t seed);

// Union of axis-aligned rectangles with optional 45 degree corner cuts,
// centred at `center` and fitting in a square of side `extent`.
std::vector<Vec2> building_silhouette(Rng& rng, Vec2 center, double extent);

struct Score {
  double s_p = 0.0;
  double s_w = 0.0;
  double coverage = 0.0;
  bool success = false;
};

struct ScoreParams {
  double r_max = 7.5;  // outer lateral reach, sets A_w
};

Score score_plan(const BenchmarkTask& task, const global::CoveragePlan& plan, const global::PlannerParams& planner,
                 const ScoreParams& sp = {});
Score failed_score();

// Fraction of Dig cells inside some pose's front annular sector, by
// membership test per pose.
double coverage_by_membership(const grid::LayeredGrid& site, std::span<const Pose2> poses,
                              const global::PlannerParams& p);
// Same quantity by testing each cell against the nearest poses in polar
// coordinates.
double coverage_by_distance(const grid::LayeredGrid& site, std::span<const Pose2> poses,
                            const global::PlannerParams& p);

struct BenchRow {
  std::uint64_t seed = 0;
  Family family = Family::Foundations;
  double side = 0.0;
  Score score;
};

struct BenchOptions {
  global::PlannerParams planner;
  global::SitePlanOptions plan_options;
  ScoreParams score;
  int threads = 1;  // tasks in flight
};

// Tasks seed, seed + 1, ...; rows are in seed order whatever the thread count.
std::vector<BenchRow> run_benchmark(Family family, int count, std::uint64_t seed, const BenchOptions& o);
std::string bench_csv(std::span<const BenchRow> rows);

// ---- rasters ----

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;  // row-major, top row first
  Rgb& at(int x, int y) { return pixels[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
  const Rgb& at(int x, int y) const { return pixels[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
};

Rgb mask_color(grid::MaskValue v);

enum class Layer { Elevation, Mask };

// One block of scale x scale pixels per cell; north is up.
Image render_grid(const grid::LayeredGrid& site, Layer layer, int scale);
void draw_pose(Image& img, const grid::GridSpec& spec, int scale, const Pose2& pose, Rgb color);
// Green while driving forward, red in reverse.
void draw_path(Image& img, const grid::GridSpec& spec, int scale, std::span<const nav::PathSample> path);

void write_ppm(const std::filesystem::path& file, const Image& img);
Image read_ppm(const std::filesystem::path& file);

}  // namespace earthworks::bench
