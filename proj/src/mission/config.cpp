#include <fstream>
#include <sstream>
#include <variant>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "earthworks/mission.hpp"

namespace earthworks::mission {

namespace {

struct ModeRef {
  global::OrientationMode* mode;
};

using Target = std::variant<double*, int*, ModeRef>;

struct Binding {
  const char* section;
  const char* key;
  Target target;
};

// Single source of truth for the file layout; reading and writing both
// walk this table.
std::vector<Binding> bindings(MissionConfig& c) {
  auto& g = c.local.geometry;
  auto& t = c.local.thresholds;
  auto& p = c.planner;
  auto& tr = c.trajectory;
  auto& n = c.nav;
  auto& d = c.durations;
  return {
      {"machine", "half_length", &c.local.half_length},
      {"machine", "half_width", &c.local.half_width},
      {"machine", "threads", &c.threads},
      {"workspace", "workspace_angle", &g.workspace_angle},
      {"workspace", "r_in", &g.r_in},
      {"workspace", "r_out", &g.r_out},
      {"workspace", "lateral_r_in", &g.lateral_r_in},
      {"workspace", "lateral_r_out", &g.lateral_r_out},
      {"global", "turn_surcharge", &p.turn_surcharge},
      {"global", "c_ax", &p.c_ax},
      {"global", "c_p", &p.c_p},
      {"global", "c_n", &p.c_n},
      {"global", "c_a", &p.c_a},
      {"global", "grid_samples", &p.grid_samples},
      {"global", "refine_tolerance", &p.refine_tolerance},
      {"global", "exact_tree_limit", &p.exact_tree_limit},
      {"global", "orientation", ModeRef{&c.plan_options.mode}},
      {"global", "fixed_theta", &c.plan_options.fixed_theta},
      {"local", "dig_margin", &t.dig_margin},
      {"local", "deviation", &t.deviation},
      {"local", "deviation_fraction", &t.deviation_fraction},
      {"local", "remaining_fraction", &t.remaining_fraction},
      {"local", "refine_fraction", &t.refine_fraction},
      {"local", "inactive_dig_fraction", &t.inactive_dig_fraction},
      {"local", "boundary_width", &t.boundary_width},
      {"local", "footprint_margin", &t.footprint_margin},
      {"local", "travel_margin", &t.travel_margin},
      {"local", "min_dump_area", &t.min_dump_area},
      {"local", "alpha", &t.alpha},
      {"dig", "gamma_min", &tr.gamma_min},
      {"dig", "gamma_max", &tr.gamma_max},
      {"dig", "gamma_max_dirt", &tr.gamma_max_dirt},
      {"dig", "d_max", &tr.d_max},
      {"dig", "h_max", &tr.h_max},
      {"dig", "v_bucket", &tr.v_bucket},
      {"dig", "v_max", &tr.v_max},
      {"dig", "h_close", &tr.h_close},
      {"dig", "v_dig", &tr.v_dig},
      {"dig", "dt", &tr.dt},
      {"dig", "shovel_width", &tr.shovel_width},
      {"dig", "shovel_length", &tr.shovel_length},
      {"dig", "collision_radius", &tr.collision_radius},
      {"dig", "min_scoop", &c.min_scoop},
      {"dig", "max_cycles_per_zone", &c.max_cycles_per_zone},
      {"dig", "refine_expand", &c.refine_expand},
      {"bo", "initial", &c.bo.initial},
      {"bo", "iterations", &c.bo.iterations},
      {"bo", "xi", &c.bo.xi},
      {"bo", "length_scale", &c.bo.gp.length_scale},
      {"bo", "noise", &c.bo.gp.noise},
      {"bo", "candidates_r", &c.bo.candidates_r},
      {"bo", "candidates_theta", &c.bo.candidates_theta},
      {"dump", "alpha", &c.dump.alpha},
      {"dump", "beta", &c.dump.beta},
      {"dump", "gamma", &c.dump.gamma},
      {"nav", "turning_radius", &n.turning_radius},
      {"nav", "check_margin", &n.check_margin},
      {"nav", "check_step", &n.check_step},
      {"nav", "alpha", &n.alpha},
      {"nav", "beta", &n.beta},
      {"nav", "gamma", &n.gamma},
      {"nav", "max_iterations", &n.max_iterations},
      {"nav", "improve_iterations", &n.improve_iterations},
      {"nav", "trials", &n.trials},
      {"nav", "extend", &n.extend},
      {"nav", "goal_bias", &n.goal_bias},
      {"nav", "connect_radius", &n.connect_radius},
      {"nav", "goal_tolerance", &n.goal_tolerance},
      {"nav", "heading_tolerance", &n.heading_tolerance},
      {"nav", "speed", &n.speed},
      {"nav", "replan_attempts", &c.replan_attempts},
      {"nav", "pile_height", &c.occupancy.pile_height},
      {"nav", "dug_depth", &c.occupancy.dug_depth},
      {"durations", "initialize", &d.initialize},
      {"durations", "check", &d.check},
      {"durations", "to_dig", &d.to_dig},
      {"durations", "dig_overhead", &d.dig_overhead},
      {"durations", "dump", &d.dump},
      {"durations", "find_path", &d.find_path},
      {"durations", "retract", &d.retract},
  };
}

std::string_view mode_name(global::OrientationMode m) {
  switch (m) {
    case global::OrientationMode::Optimize: return "optimize";
    case global::OrientationMode::MainAxis: return "main_axis";
    case global::OrientationMode::Fixed: return "fixed";
  }
  return "optimize";
}

global::OrientationMode parse_mode(const std::string& s) {
  for (auto m : {global::OrientationMode::Optimize, global::OrientationMode::MainAxis, global::OrientationMode::Fixed})
    if (mode_name(m) == s) return m;
  throw Error(ErrorCode::Parse, "unknown orientation mode '" + s + "'");
}

template <class T>
T parse_number(const std::string& where, const std::string& text) {
  std::istringstream in(text);
  T v{};
  in >> v;
  if (!in || !(in >> std::ws).eof()) throw Error(ErrorCode::Parse, where + ": not a number: '" + text + "'");
  return v;
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

void MissionConfig::sync() {
  planner.r_in = local.geometry.r_in;
  planner.r_out = local.geometry.r_out;
  planner.workspace_angle = local.geometry.workspace_angle;
  planner.half_length = local.half_length;
  planner.half_width = local.half_width;
  nav.half_length = local.half_length;
  nav.half_width = local.half_width;
  planner.threads = bo.threads = nav.threads = threads;
}

void MissionConfig::validate() const {
  trajectory.validate();
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive");
  };
  auto non_negative = [](double v, const char* what) {
    if (!(v >= 0.0)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must not be negative");
  };
  const auto& g = local.geometry;
  if (!(g.r_in < g.r_out) || !(g.lateral_r_in < g.lateral_r_out))
    throw Error(ErrorCode::InvalidArgument, "zone radii must satisfy r_in < r_out");
  positive(g.workspace_angle, "workspace_angle");
  positive(local.half_length, "half_length");
  positive(local.half_width, "half_width");
  positive(nav.turning_radius, "turning_radius");
  positive(nav.speed, "speed");
  positive(nav.check_step, "check_step");
  if (nav.trials < 1 || nav.max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "nav budgets must be >= 1");
  if (bo.initial < 2 || bo.iterations < 0) throw Error(ErrorCode::InvalidArgument, "bo budget too small");
  if (threads < 1) throw Error(ErrorCode::InvalidArgument, "threads must be >= 1");
  non_negative(min_scoop, "min_scoop");
  for (double v : {durations.initialize, durations.check, durations.to_dig, durations.dig_overhead, durations.dump,
                   durations.find_path, durations.retract})
    non_negative(v, "durations");
}

MissionConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::Parse, "config line " + std::to_string(e.line()) + ": " + e.message());
  }
  MissionConfig cfg;
  const auto table = bindings(cfg);
  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty())
      throw Error(ErrorCode::Parse, "config key '" + section + "' outside a section");
    for (const auto& [key, value] : keys) {
      const auto it = std::find_if(table.begin(), table.end(),
                                   [&](const Binding& b) { return section == b.section && key == b.key; });
      if (it == table.end()) throw Error(ErrorCode::Parse, "unknown config key [" + section + "] " + key);
      const std::string where = "[" + section + "] " + key;
      const std::string raw = value.data();
      std::visit(
          [&](auto target) {
            using T = decltype(target);
            if constexpr (std::is_same_v<T, double*>)
              *target = parse_number<double>(where, raw);
            else if constexpr (std::is_same_v<T, int*>)
              *target = parse_number<int>(where, raw);
            else
              *target.mode = parse_mode(raw);
          },
          it->target);
    }
  }
  cfg.sync();
  cfg.validate();
  return cfg;
}

MissionConfig read_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string config_to_ini(const MissionConfig& cfg) {
  MissionConfig copy = cfg;
  std::ostringstream out;
  std::string section;
  for (const Binding& b : bindings(copy)) {
    if (section != b.section) {
      if (!section.empty()) out << '\n';
      section = b.section;
      out << '[' << section << "]\n";
    }
    out << b.key << " = ";
    std::visit(
        [&](auto target) {
          using T = decltype(target);
          if constexpr (std::is_same_v<T, double*>)
            out << format_double(*target);
          else if constexpr (std::is_same_v<T, int*>)
            out << *target;
          else
            out << mode_name(*target.mode);
        },
        b.target);
    out << '\n';
  }
  return out.str();
}

}  // namespace earthworks::mission
