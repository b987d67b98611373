#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "earthworks/global_planner.hpp"

namespace earthworks::global {

using nlohmann::json;

std::string plan_to_json(const CoveragePlan& plan) {
  json j;
  j["format"] = "earthworks-plan 1";
  j["orientation"] = plan.theta;
  j["component_orientation"] = plan.component_theta;
  json cells = json::array();
  for (const auto& v : plan.visits) {
    json corners = json::array();
    for (const Vec2& c : v.corners) corners.push_back({c.x, c.y});
    cells.push_back({{"component", v.component},
                     {"cell", v.cell},
                     {"entry", v.entry},
                     {"exit", v.exit},
                     {"subroutine", subroutine_name(v.subroutine)},
                     {"flip", v.flip},
                     {"lanes", v.lane_count},
                     {"relaxed", v.relaxed},
                     {"corners", corners},
                     {"traverse_before", v.traverse_before}});
  }
  j["cells"] = cells;
  json poses = json::array();
  for (const auto& p : plan.poses)
    poses.push_back({{"x", p.pose.x},
                     {"y", p.pose.y},
                     {"heading", p.pose.heading},
                     {"component", p.component},
                     {"cell", p.cell},
                     {"lane", p.lane},
                     {"working", p.working}});
  j["poses"] = poses;
  j["metrics"] = {{"path_length", plan.metrics.path_length},
                  {"workspaces", plan.metrics.workspaces},
                  {"covered_fraction", plan.metrics.covered_fraction},
                  {"objective", std::isfinite(plan.metrics.objective) ? json(plan.metrics.objective) : json()}};
  return j.dump(1) + "\n";
}

CoveragePlan plan_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    CoveragePlan plan;
    plan.theta = j.at("orientation").get<double>();
    plan.component_theta = j.at("component_orientation").get<std::vector<double>>();
    for (const auto& c : j.at("cells")) {
      CellVisitRecord v;
      v.component = c.at("component");
      v.cell = c.at("cell");
      v.entry = c.at("entry");
      v.exit = c.at("exit");
      v.subroutine = parse_subroutine(c.at("subroutine").get<std::string>());
      v.flip = c.at("flip");
      v.lane_count = c.at("lanes");
      v.relaxed = c.at("relaxed");
      for (std::size_t k = 0; k < 4; ++k) v.corners[k] = {c.at("corners").at(k).at(0), c.at("corners").at(k).at(1)};
      v.traverse_before = c.at("traverse_before").get<std::vector<int>>();
      plan.visits.push_back(v);
    }
    for (const auto& p : j.at("poses")) {
      PlanPose q;
      q.pose = {p.at("x"), p.at("y"), p.at("heading")};
      q.component = p.at("component");
      q.cell = p.at("cell");
      q.lane = p.at("lane");
      q.working = p.at("working");
      plan.poses.push_back(q);
    }
    const auto& m = j.at("metrics");
    plan.metrics.path_length = m.at("path_length");
    plan.metrics.workspaces = m.at("workspaces");
    plan.metrics.covered_fraction = m.at("covered_fraction");
    plan.metrics.objective = m.at("objective").is_null() ? grid::kInf : m.at("objective").get<double>();
    return plan;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("plan file: ") + e.what());
  }
}

void write_plan(const std::filesystem::path& file, const CoveragePlan& plan) {
  std::ofstream out(file);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + file.string());
  out << plan_to_json(plan);
}

CoveragePlan read_plan(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return plan_from_json(ss.str());
}

}  // namespace earthworks::global
