#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "earthworks/dig_planner.hpp"
#include "earthworks/global_planner.hpp"
#include "earthworks/gridmap.hpp"
#include "earthworks/local_planner.hpp"
#include "earthworks/nav_planner.hpp"

namespace earthworks::mission {

enum class MissionState : std::uint8_t {
  InitializeWorkspace,
  CheckWorkspace,
  FindDigPoint,
  Dig,
  Dump,
  FindPathPlan,
  Driving,
  RetractArm,
  Done,
  Failed,
};
inline constexpr std::size_t kStateCount = 10;
std::string_view state_name(MissionState s);
MissionState parse_state(std::string_view s);

// Edges of the state graph. Failed is reachable from every non-terminal
// state.
bool legal_transition(MissionState from, MissionState to);

// Simulated seconds per state. Arm motions are not simulated, so their
// durations are fixed; digging adds the edge path time on top.
struct Durations {
  double initialize = 0.45;
  double check = 0.29;
  double to_dig = 8.0;
  double dig_overhead = 9.5;  // bucket filling and curling not covered by the edge path
  double dump = 9.9;
  double find_path = 9.38;
  double retract = 4.0;
};

struct MissionConfig {
  global::PlannerParams planner;
  global::SitePlanOptions plan_options;
  local::LocalConfig local;
  dig::TrajectoryParams trajectory;
  dig::BoParams bo;
  dig::DumpParams dump;
  double refine_expand = 0.10;
  nav::NavParams nav;
  nav::OccupancyParams occupancy;
  Durations durations;
  double min_scoop = 1e-3;      // a zone whose best scoop is smaller counts as done
  int max_cycles_per_zone = 2000;
  int replan_attempts = 3;      // per transfer, on ReplanRequired
  int threads = 1;              // copied into the planners that use threads

  // Copies the shared machine and workspace geometry from `local` into the
  // planner and navigation parameters, and `threads` everywhere.
  void sync();
  void validate() const;
};

// INI text with one section per module. Unknown keys are a Parse error.
MissionConfig parse_config(const std::string& text);
MissionConfig read_config(const std::filesystem::path& file);
std::string config_to_ini(const MissionConfig& cfg);

struct LogRecord {
  std::size_t seq = 0;
  MissionState state = MissionState::InitializeWorkspace;
  double start = 0.0;     // simulated seconds since mission start
  double duration = 0.0;
  int pose = -1;          // working pose index
  int cycle = -1;         // scoop index, -1 outside scoop cycles
  Pose2 base;
  std::optional<local::ZoneId> zone;
  double volume = 0.0;    // scooped, swept or deposited
  std::optional<Vec2> dig_point;
  std::optional<Vec2> dump_point;
  std::string note;       // stop reason, action, error text
};

struct Counters {
  int workspaces = 0;
  int scoops = 0;
  int refine_sweeps = 0;
  int exhausted_zones = 0;
  int replans = 0;
  int deposits_skipped = 0;
  double removed = 0.0;    // scoops plus sweep cuts
  double deposited = 0.0;  // deposits plus sweep fills
  double carried = 0.0;    // left in the bucket at the end
  double front_volume = 0.0;
  double drive_length = 0.0;
  double max_deposit_error = 0.0;  // relative |sum h * area - V| per deposit
};

struct MissionLog {
  std::vector<LogRecord> records;
  Counters counters;

  double total_time() const;
  std::string to_jsonl() const;
};

// One JSON object per line; the last line holds the counters.
void write_log(const std::filesystem::path& file, const MissionLog& log);
MissionLog read_log(const std::filesystem::path& file);
MissionLog parse_log(const std::string& text);

struct Failure {
  ErrorCode code = ErrorCode::InvalidArgument;
  std::string message;
  MissionState state = MissionState::Failed;
  int pose = -1;
  int cycle = -1;
};

struct MissionOptions {
  bool snapshots = false;  // keep the elevation after every workspace
};

struct MissionResult {
  MissionState state = MissionState::Done;
  MissionLog log;
  grid::LayeredGrid terrain;
  global::CoveragePlan plan;
  std::optional<Failure> failure;
  std::vector<std::vector<double>> snapshots;
};

// Runs the plan on a copy of the site. DumpDeadlock and PathNotFound end
// the mission in Failed; other errors are rethrown with the pose and cycle
// attached.
MissionResult run_mission(const grid::LayeredGrid& site, const global::CoveragePlan& plan, const MissionConfig& cfg,
                          std::uint64_t seed, const MissionOptions& options = {});
// Plans the site first.
MissionResult run_mission(const grid::LayeredGrid& site, const MissionConfig& cfg, std::uint64_t seed,
                          const MissionOptions& options = {});

struct StateTotals {
  int count = 0;
  double total = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

struct CycleMetrics {
  int cycles = 0;
  double mean_cycle = 0.0;  // FindDigPoint + Dig + Dump per scoop
  double sd_cycle = 0.0;
  double mean_scoop = 0.0;
  double front_volume = 0.0;
  double total_hours = 0.0;
  double efficiency = 0.0;  // front volume per hour
  std::array<StateTotals, kStateCount> states{};
};

// Throws InvalidArgument on an empty log.
CycleMetrics cycle_metrics(const MissionLog& log);

}  // namespace earthworks::mission
