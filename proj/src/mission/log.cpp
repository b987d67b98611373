#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "earthworks/mission.hpp"

namespace earthworks::mission {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kStateCount> kStateNames{
    "InitializeWorkspace", "CheckWorkspace", "FindDigPoint", "Dig", "Dump",
    "FindPathPlan",        "Driving",        "RetractArm",   "Done", "Failed"};

local::ZoneId parse_zone(std::string_view s) {
  for (local::ZoneId z : local::kZones)
    if (local::zone_name(z) == s) return z;
  throw Error(ErrorCode::Parse, "unknown zone '" + std::string(s) + "'");
}

json record_json(const LogRecord& r) {
  json j;
  j["seq"] = r.seq;
  j["state"] = state_name(r.state);
  j["start"] = r.start;
  j["duration"] = r.duration;
  j["pose"] = r.pose;
  j["cycle"] = r.cycle;
  j["base"] = {r.base.x, r.base.y, r.base.heading};
  if (r.zone) j["zone"] = local::zone_name(*r.zone);
  j["volume"] = r.volume;
  if (r.dig_point) j["dig_point"] = {r.dig_point->x, r.dig_point->y};
  if (r.dump_point) j["dump_point"] = {r.dump_point->x, r.dump_point->y};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

LogRecord record_from_json(const json& j) {
  LogRecord r;
  r.seq = j.at("seq").get<std::size_t>();
  r.state = parse_state(j.at("state").get<std::string>());
  r.start = j.at("start").get<double>();
  r.duration = j.at("duration").get<double>();
  r.pose = j.at("pose").get<int>();
  r.cycle = j.at("cycle").get<int>();
  const auto& b = j.at("base");
  r.base = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>()};
  if (j.contains("zone")) r.zone = parse_zone(j["zone"].get<std::string>());
  r.volume = j.at("volume").get<double>();
  if (j.contains("dig_point"))
    r.dig_point = Vec2{j["dig_point"].at(0).get<double>(), j["dig_point"].at(1).get<double>()};
  if (j.contains("dump_point"))
    r.dump_point = Vec2{j["dump_point"].at(0).get<double>(), j["dump_point"].at(1).get<double>()};
  if (j.contains("note")) r.note = j["note"].get<std::string>();
  return r;
}

json counters_json(const Counters& c) {
  return {{"workspaces", c.workspaces},
          {"scoops", c.scoops},
          {"refine_sweeps", c.refine_sweeps},
          {"exhausted_zones", c.exhausted_zones},
          {"replans", c.replans},
          {"deposits_skipped", c.deposits_skipped},
          {"removed", c.removed},
          {"deposited", c.deposited},
          {"carried", c.carried},
          {"front_volume", c.front_volume},
          {"drive_length", c.drive_length},
          {"max_deposit_error", c.max_deposit_error}};
}

Counters counters_from_json(const json& j) {
  Counters c;
  c.workspaces = j.at("workspaces").get<int>();
  c.scoops = j.at("scoops").get<int>();
  c.refine_sweeps = j.at("refine_sweeps").get<int>();
  c.exhausted_zones = j.at("exhausted_zones").get<int>();
  c.replans = j.at("replans").get<int>();
  c.deposits_skipped = j.at("deposits_skipped").get<int>();
  c.removed = j.at("removed").get<double>();
  c.deposited = j.at("deposited").get<double>();
  c.carried = j.at("carried").get<double>();
  c.front_volume = j.at("front_volume").get<double>();
  c.drive_length = j.at("drive_length").get<double>();
  c.max_deposit_error = j.at("max_deposit_error").get<double>();
  return c;
}

StateTotals totals(const std::vector<double>& v) {
  StateTotals t;
  t.count = int(v.size());
  if (v.empty()) return t;
  for (double x : v) t.total += x;
  t.mean = t.total / double(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - t.mean) * (x - t.mean);
  t.sd = std::sqrt(ss / double(v.size()));
  return t;
}

}  // namespace

std::string_view state_name(MissionState s) { return kStateNames[std::size_t(s)]; }

MissionState parse_state(std::string_view s) {
  for (std::size_t i = 0; i < kStateCount; ++i)
    if (kStateNames[i] == s) return MissionState(i);
  throw Error(ErrorCode::Parse, "unknown mission state '" + std::string(s) + "'");
}

bool legal_transition(MissionState from, MissionState to) {
  using S = MissionState;
  if (from == S::Done || from == S::Failed) return false;
  if (to == S::Failed) return true;
  switch (from) {
    case S::InitializeWorkspace: return to == S::CheckWorkspace;
    case S::CheckWorkspace: return to == S::FindDigPoint || to == S::RetractArm;
    // Back to CheckWorkspace when the zone has nothing left to scoop.
    case S::FindDigPoint: return to == S::Dig || to == S::CheckWorkspace;
    case S::Dig: return to == S::Dump;
    case S::Dump: return to == S::CheckWorkspace;
    case S::RetractArm: return to == S::FindPathPlan || to == S::Done;
    case S::FindPathPlan: return to == S::Driving;
    // Back to FindPathPlan when the plan no longer fits the terrain.
    case S::Driving: return to == S::InitializeWorkspace || to == S::FindPathPlan;
    default: return false;
  }
}

double MissionLog::total_time() const {
  double t = 0.0;
  for (const auto& r : records) t += r.duration;
  return t;
}

std::string MissionLog::to_jsonl() const {
  std::string out;
  for (const auto& r : records) {
    out += record_json(r).dump();
    out += '\n';
  }
  out += json{{"counters", counters_json(counters)}}.dump();
  out += '\n';
  return out;
}

void write_log(const std::filesystem::path& file, const MissionLog& log) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write log " + file.string());
  out << log.to_jsonl();
}

MissionLog parse_log(const std::string& text) {
  MissionLog log;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (j.contains("counters"))
        log.counters = counters_from_json(j["counters"]);
      else
        log.records.push_back(record_from_json(j));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, "log line " + std::to_string(number) + ": " + e.what());
    }
  }
  return log;
}

MissionLog read_log(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open log " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_log(text.str());
}

CycleMetrics cycle_metrics(const MissionLog& log) {
  if (log.records.empty()) throw Error(ErrorCode::InvalidArgument, "empty mission log");
  CycleMetrics m;
  std::array<std::vector<double>, kStateCount> per_state;
  std::map<int, double> cycle_time;
  std::map<int, double> scoop_volume;
  double total = 0.0;
  for (const auto& r : log.records) {
    per_state[std::size_t(r.state)].push_back(r.duration);
    total += r.duration;
    if (r.cycle < 0) continue;
    if (r.state == MissionState::FindDigPoint || r.state == MissionState::Dig || r.state == MissionState::Dump)
      cycle_time[r.cycle] += r.duration;
    if (r.state == MissionState::Dig) {
      scoop_volume[r.cycle] = r.volume;
      if (r.zone == local::ZoneId::Front) m.front_volume += r.volume;
    }
  }
  for (std::size_t s = 0; s < kStateCount; ++s) m.states[s] = totals(per_state[s]);
  std::vector<double> times, volumes;
  for (const auto& [c, t] : cycle_time)
    if (scoop_volume.count(c)) {
      times.push_back(t);
      volumes.push_back(scoop_volume[c]);
    }
  const StateTotals ct = totals(times);
  m.cycles = ct.count;
  m.mean_cycle = ct.mean;
  m.sd_cycle = ct.sd;
  m.mean_scoop = totals(volumes).mean;
  m.total_hours = total / 3600.0;
  m.efficiency = m.total_hours > 0.0 ? m.front_volume / m.total_hours : 0.0;
  return m;
}

}  // namespace earthworks::mission
