#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "earthworks/gridmap.hpp"

namespace earthworks::global {

enum class Subroutine : std::uint8_t { AlternatingLanes = 0, SameDirectionLanes = 1, ObstaclesBothSides = 2 };
inline constexpr std::array<Subroutine, 3> kSubroutines{Subroutine::AlternatingLanes, Subroutine::SameDirectionLanes,
                                                        Subroutine::ObstaclesBothSides};
std::string_view subroutine_name(Subroutine s);
Subroutine parse_subroutine(std::string_view s);

// Frame whose v axis runs along the lanes (direction theta) and whose u
// axis is the sweep direction. Bin (iu, iv) has center u0 + iu*res,
// v0 + iv*res.
struct RotatedFrame {
  double theta = 0.0;
  double resolution = 0.1;
  Vec2 e_u{0, 1};
  Vec2 e_v{1, 0};
  double u0 = 0.0;
  double v0 = 0.0;
  int nu = 0;
  int nv = 0;

  static RotatedFrame make(double theta, double resolution);
  double u(Vec2 p) const { return p.dot(e_u); }
  double v(Vec2 p) const { return p.dot(e_v); }
  Vec2 world(double u, double v) const { return e_u * u + e_v * v; }
  double bin_u(int iu) const { return u0 + iu * resolution; }
  double bin_v(int iv) const { return v0 + iv * resolution; }
};

// Corner index: bit 0 = sweep side (0 first slice, 1 last slice),
// bit 1 = lane end (0 low v, 1 high v).
inline int corner_index(int u_side, int v_end) { return u_side | (v_end << 1); }
inline int corner_u_side(int c) { return c & 1; }
inline int corner_v_end(int c) { return (c >> 1) & 1; }

struct Cell {
  int id = 0;
  int first_slice = 0;  // iu of the first slice
  std::vector<std::pair<int, int>> extents;  // [lo, hi] bins per slice
  std::array<Vec2, 4> corners{};
  std::size_t cell_count = 0;  // grid cells assigned
  double area = 0.0;
  Vec2 centroid{};

  int last_slice() const { return first_slice + int(extents.size()) - 1; }
};

struct Decomposition {
  RotatedFrame frame;
  std::vector<Cell> cells;
  std::vector<int> bin_label;   // nu*nv, -1 outside any cell
  std::vector<int> grid_label;  // grid cell -> cell id, -1 outside the dig set
  int label_at_bin(int iu, int iv) const {
    if (iu < 0 || iv < 0 || iu >= frame.nu || iv >= frame.nv) return -1;
    return bin_label[std::size_t(iu) * frame.nv + iv];
  }
};

Decomposition decompose(const grid::GridSpec& spec, std::span<const std::uint8_t> dig, double theta);

struct QuotientGraph {
  int n = 0;
  std::vector<std::vector<int>> out;  // i -> j: a corner of i touches cell j
  bool has_edge(int i, int j) const;
  bool undirected() const;
};

QuotientGraph quotient_graph(const Decomposition& d);

struct SpanningTree {
  int root = 0;
  std::vector<int> parent;  // -1 for the root; edge child -> parent exists in the graph
  std::vector<std::vector<int>> children;
  int branch_vertices = 0;
  double length = 0.0;
  bool exact = true;       // branch-and-bound finished
  bool undirected_fallback = false;
};

// Spanning in-arborescence towards root that minimizes the number of
// vertices with more than one child, then centroid edge length, then
// the parent vector lexicographically.
SpanningTree min_branching_tree(const QuotientGraph& g, std::span<const Vec2> centroids, int root,
                                int exact_limit = 15);
// Best over all admissible roots; falls back to ignoring edge direction
// when no root is reachable from every cell.
SpanningTree best_rooted_tree(const QuotientGraph& g, std::span<const Vec2> centroids, int exact_limit = 15);

int count_branch_vertices(std::span<const int> parent);

struct Visit {
  int cell = 0;
  bool excavate = true;
};

// Post-order walk; children farthest first, so the child nearest the
// parent is excavated right before it.
std::vector<Visit> visit_order(const SpanningTree& tree, const Decomposition& d);
std::vector<int> excavation_sequence(std::span<const Visit> walk);

// ---- corner dynamic program ----

struct CellOption {
  int entry = 0;
  int exit = 0;
  Subroutine subroutine = Subroutine::AlternatingLanes;
  bool flip = false;
  double cost = grid::kInf;
};

struct CornerDpProblem {
  std::vector<std::vector<CellOption>> options;  // per stage
  std::vector<std::array<std::array<double, 4>, 4>> transfer;  // [k][exit of k][entry of k+1]
};

struct CornerDpResult {
  double cost = grid::kInf;
  std::vector<int> choice;  // option index per stage
};

CornerDpResult corner_dp(const CornerDpProblem& p, std::optional<int> start_corner = std::nullopt);

// ---- lanes ----

struct PlannerParams {
  double r_in = 4.5;
  double r_out = 7.0;
  double workspace_angle = 1.9;
  double half_length = 2.5;  // machine footprint
  double half_width = 1.5;
  double turn_surcharge = 2.0;
  double c_ax = 0.0;
  double c_p = 1.0;
  double c_n = 1.0;
  double c_a = 100.0;
  int grid_samples = 36;
  double refine_tolerance = 0.01;
  int exact_tree_limit = 15;
  int threads = 1;

  double lane_spacing(double resolution) const;
  double pose_spacing() const { return r_out - r_in; }
};

int exit_corner(int entry, Subroutine s, bool flip, int lane_count);

// Obstacle oracle for machine footprints.
class FootprintChecker {
 public:
  FootprintChecker(const grid::GridSpec& spec, std::vector<std::uint8_t> blocked, double half_length,
                   double half_width);
  const grid::GridSpec& spec() const { return spec_; }
  bool collides(const Pose2& pose) const;
  // Footprint dragged along the segment, heading along it.
  bool sweep_collides(Vec2 a, Vec2 b) const;
  std::span<const std::uint8_t> blocked() const { return blocked_; }

 private:
  grid::GridSpec spec_;
  std::vector<std::uint8_t> blocked_;
  std::vector<double> clearance_;
  double half_length_, half_width_, circumradius_;
};

struct PlanPose {
  Pose2 pose;
  int component = 0;
  int cell = 0;
  int lane = 0;  // global lane index within the plan, -1 for transit points
  bool working = true;
};

struct LaneSet {
  std::vector<Pose2> poses;
  std::vector<int> lane_of_pose;
  int lane_count = 0;
  int turns = 0;
  double cost = grid::kInf;  // d_i
  bool relaxed = false;
};

LaneSet lanes(const Cell& cell, const RotatedFrame& frame, int entry, Subroutine s, bool flip,
              const PlannerParams& params, const FootprintChecker& checker, bool relaxed = false);

// ---- orientation and site plans ----

struct CellVisitRecord {
  int component = 0;
  int cell = 0;
  int entry = 0;
  int exit = 0;
  Subroutine subroutine = Subroutine::AlternatingLanes;
  bool flip = false;
  int lane_count = 0;
  bool relaxed = false;
  std::array<Vec2, 4> corners{};
  std::vector<int> traverse_before;
};

struct PlanMetrics {
  double path_length = 0.0;  // L_p over working poses and transit points
  int workspaces = 0;        // N_w
  double covered_fraction = 0.0;  // A_c
  double objective = grid::kInf;
};

struct CoveragePlan {
  double theta = 0.0;
  std::vector<double> component_theta;
  std::vector<CellVisitRecord> visits;
  std::vector<PlanPose> poses;
  PlanMetrics metrics;

  std::vector<Pose2> working_poses() const;
};

// Front-sector membership of a world point for a base pose.
bool in_front_sector(const Pose2& base, Vec2 p, const PlannerParams& params);
// Per-cell flags: inside at least one pose's front sector.
std::vector<std::uint8_t> covered_cells(const grid::GridSpec& spec, std::span<const std::uint8_t> dig,
                                        std::span<const Pose2> poses, const PlannerParams& params);
double coverage_fraction(const grid::GridSpec& spec, std::span<const std::uint8_t> dig,
                         std::span<const Pose2> poses, const PlannerParams& params);

// Principal axis of the set in [0, pi).
double principal_axis(const grid::GridSpec& spec, std::span<const std::uint8_t> set);

struct PlanInputs {
  grid::GridSpec spec;
  std::vector<std::uint8_t> dig;      // one component
  std::vector<std::uint8_t> blocked;  // NoGo or occupied
};

// Full pipeline at one orientation. Throws NoFeasiblePlan.
CoveragePlan plan_at(const PlanInputs& in, double theta, const PlannerParams& params);

struct OrientationResult {
  double theta = 0.0;
  double objective = grid::kInf;
  double main_axis = 0.0;
  std::vector<std::pair<double, double>> samples;  // (theta, J) in evaluation order
};

double objective(const CoveragePlan& plan, double main_axis, const PlannerParams& params);
OrientationResult optimize_orientation(const PlanInputs& in, const PlannerParams& params);

enum class OrientationMode { Optimize, MainAxis, Fixed };

struct SitePlanOptions {
  OrientationMode mode = OrientationMode::Optimize;
  double fixed_theta = 0.0;
};

PlanInputs site_inputs(const grid::LayeredGrid& site);
CoveragePlan plan_site(const grid::LayeredGrid& site, const PlannerParams& params,
                       const SitePlanOptions& options = {});

// Open-path order over components given a cost matrix cost[a][b] from
// the end of a to the start of b. Exact for n <= 12.
std::vector<int> order_components(const std::vector<std::vector<double>>& cost);
double open_path_cost(const std::vector<std::vector<double>>& cost, std::span<const int> order);

std::string plan_to_json(const CoveragePlan& plan);
CoveragePlan plan_from_json(const std::string& text);
void write_plan(const std::filesystem::path& file, const CoveragePlan& plan);
CoveragePlan read_plan(const std::filesystem::path& file);

}  // namespace earthworks::global
