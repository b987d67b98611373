#include <doctest.h>

#include "earthworks/harness.hpp"
#include "earthworks/mission.hpp"

using namespace earthworks;
using namespace earthworks::mission;

namespace {

bench::PitOptions small_pit(double depth = 0.5) {
  bench::PitOptions o;
  o.length = 6.0;
  o.width = 4.0;
  o.depth = depth;
  o.margin = 12.0;
  o.side_margin = 10.0;
  o.fence = false;
  return o;
}

MissionConfig default_config() {
  MissionConfig c;
  c.sync();
  return c;
}

const MissionResult& small_pit_run() {
  static const MissionResult r = run_mission(bench::pit_site(small_pit()).grid, default_config(), 3);
  return r;
}

LogRecord rec(MissionState s, double duration, int cycle, double volume = 0.0,
              std::optional<local::ZoneId> zone = std::nullopt) {
  LogRecord r;
  r.state = s;
  r.duration = duration;
  r.cycle = cycle;
  r.volume = volume;
  r.zone = zone;
  return r;
}

}  // namespace

TEST_CASE("state names round trip") {
  for (std::size_t i = 0; i < kStateCount; ++i) CHECK(parse_state(state_name(MissionState(i))) == MissionState(i));
  CHECK_THROWS_AS(parse_state("Digging"), Error);
}

TEST_CASE("transition table") {
  using S = MissionState;
  CHECK(legal_transition(S::InitializeWorkspace, S::CheckWorkspace));
  CHECK(legal_transition(S::CheckWorkspace, S::FindDigPoint));
  CHECK(legal_transition(S::CheckWorkspace, S::RetractArm));
  CHECK(legal_transition(S::FindDigPoint, S::Dig));
  CHECK(legal_transition(S::Dig, S::Dump));
  CHECK(legal_transition(S::Dump, S::CheckWorkspace));
  CHECK(legal_transition(S::RetractArm, S::FindPathPlan));
  CHECK(legal_transition(S::RetractArm, S::Done));
  CHECK(legal_transition(S::FindPathPlan, S::Driving));
  CHECK(legal_transition(S::Driving, S::InitializeWorkspace));
  CHECK_FALSE(legal_transition(S::Dig, S::CheckWorkspace));
  CHECK_FALSE(legal_transition(S::Dump, S::Dig));
  CHECK_FALSE(legal_transition(S::InitializeWorkspace, S::Dig));
  CHECK_FALSE(legal_transition(S::CheckWorkspace, S::Done));
  for (std::size_t i = 0; i < kStateCount; ++i) {
    const auto s = MissionState(i);
    CHECK_FALSE(legal_transition(S::Done, s));
    CHECK_FALSE(legal_transition(S::Failed, s));
    if (s != S::Done && s != S::Failed) CHECK(legal_transition(s, S::Failed));
  }
}

TEST_CASE("config ini round trip") {
  MissionConfig c = default_config();
  c.durations.dump = 7.25;
  c.local.geometry.r_out = 7.5;
  c.plan_options.mode = global::OrientationMode::Fixed;
  c.plan_options.fixed_theta = 0.1;
  c.bo.iterations = 12;
  const std::string text = config_to_ini(c);
  const MissionConfig back = parse_config(text);
  CHECK(config_to_ini(back) == text);
  CHECK(back.durations.dump == 7.25);
  CHECK(back.plan_options.mode == global::OrientationMode::Fixed);
  // Geometry is shared with the planner and navigation.
  CHECK(back.planner.r_out == 7.5);
  CHECK(back.nav.half_length == back.local.half_length);
}

TEST_CASE("config rejects unknown keys and bad values") {
  CHECK(config_to_ini(parse_config("")) == config_to_ini(default_config()));
  auto code = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      return e.code();
    }
    FAIL("accepted: " << text);
    return ErrorCode::Io;
  };
  CHECK(code("[dig]\nv_dig_typo = 1\n") == ErrorCode::Parse);
  CHECK(code("[durations]\ndump = fast\n") == ErrorCode::Parse);
  CHECK(code("[global]\norientation = sideways\n") == ErrorCode::Parse);
  CHECK(code("[workspace]\nr_in = 8\n") == ErrorCode::InvalidArgument);
  CHECK(code("[durations]\ndump = -1\n") == ErrorCode::InvalidArgument);
  const auto c = parse_config("[durations]\ndig_overhead = 0\n[machine]\nthreads = 2\n");
  CHECK(c.durations.dig_overhead == 0.0);
  CHECK(c.planner.threads == 2);
  CHECK(c.nav.threads == 2);
}

TEST_CASE("cycle metrics on a hand-built log") {
  MissionLog log;
  using S = MissionState;
  log.records = {rec(S::InitializeWorkspace, 0.5, -1),
                 rec(S::CheckWorkspace, 0.5, -1),
                 rec(S::FindDigPoint, 8.0, 0),
                 rec(S::Dig, 10.0, 0, 0.3, local::ZoneId::Front),
                 rec(S::Dump, 10.0, 0),
                 rec(S::CheckWorkspace, 0.5, -1),
                 rec(S::FindDigPoint, 8.0, 1),
                 rec(S::Dig, 14.0, 1, 0.5, local::ZoneId::FrontLeft),
                 rec(S::Dump, 10.0, 1),
                 rec(S::CheckWorkspace, 0.5, -1),
                 rec(S::RetractArm, 4.0, -1),
                 rec(S::Done, 0.0, -1)};
  const auto m = cycle_metrics(log);
  CHECK(m.cycles == 2);
  CHECK(m.mean_cycle == doctest::Approx(30.0));  // 28 and 32
  CHECK(m.sd_cycle == doctest::Approx(2.0));
  CHECK(m.mean_scoop == doctest::Approx(0.4));
  CHECK(m.front_volume == doctest::Approx(0.3));
  CHECK(m.total_hours == doctest::Approx(66.0 / 3600.0));
  CHECK(m.efficiency == doctest::Approx(0.3 / (66.0 / 3600.0)));
  CHECK(m.states[std::size_t(S::CheckWorkspace)].count == 3);
  CHECK(m.states[std::size_t(S::RetractArm)].total == doctest::Approx(4.0));
  CHECK_THROWS_AS(cycle_metrics(MissionLog{}), Error);
}

TEST_CASE("log parse is the inverse of to_jsonl") {
  const auto& log = small_pit_run().log;
  const std::string text = log.to_jsonl();
  CHECK(parse_log(text).to_jsonl() == text);
  CHECK_THROWS_AS(parse_log("{\"seq\": 1}\n"), Error);
}

TEST_CASE("small pit mission reaches Done") {
  const auto& r = small_pit_run();
  REQUIRE(r.state == MissionState::Done);
  CHECK_FALSE(r.failure.has_value());
  const auto& log = r.log;
  CHECK(log.records.front().state == MissionState::InitializeWorkspace);
  CHECK(log.records.back().state == MissionState::Done);
  CHECK(log.counters.scoops > 0);
  CHECK(log.counters.workspaces == int(r.plan.working_poses().size()));

  SUBCASE("every transition is legal and the clock is contiguous") {
    for (std::size_t k = 1; k < log.records.size(); ++k) {
      const auto& a = log.records[k - 1];
      const auto& b = log.records[k];
      INFO("record " << k);
      CHECK(legal_transition(a.state, b.state));
      CHECK(b.seq == a.seq + 1);
      CHECK(b.start == doctest::Approx(a.start + a.duration).epsilon(1e-12));
      CHECK(a.duration >= 0.0);
    }
  }

  SUBCASE("mass is conserved") {
    const auto& c = log.counters;
    CHECK(std::abs(c.removed - c.deposited) <= 1e-6 * c.removed);
    CHECK(c.carried == 0.0);
    CHECK(c.max_deposit_error <= 1e-9);
    // Terrain-level check: total elevation change integrates to zero.
    const auto e = r.terrain.layer(grid::layer::kElevation);
    const auto o = r.terrain.layer(grid::layer::kOriginalElevation);
    double net = 0.0, cut = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      net += e[i] - o[i];
      cut += std::max(0.0, o[i] - e[i]);
    }
    const double area = r.terrain.spec().cell_area();
    CHECK(std::abs(net * area) <= 1e-6 * cut * area);
  }

  SUBCASE("dig cells end near the target and never below the tolerance") {
    const auto e = r.terrain.layer(grid::layer::kElevation);
    const auto t = r.terrain.layer(grid::layer::kTargetElevation);
    double err = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (r.terrain.mask(i) != grid::MaskValue::Dig) continue;
      CHECK(e[i] >= t[i] - 0.05);
      err += std::abs(e[i] - t[i]);
      ++n;
    }
    REQUIRE(n > 0);
    CHECK(err / n <= 0.05);
  }
}

TEST_CASE("same seed gives the same log, with or without threads") {
  const auto site = bench::pit_site(small_pit());
  MissionConfig threaded = default_config();
  threaded.threads = 2;
  threaded.sync();
  const auto a = small_pit_run().log.to_jsonl();
  const auto b = run_mission(site.grid, default_config(), 3).log.to_jsonl();
  const auto c = run_mission(site.grid, threaded, 3).log.to_jsonl();
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("site already at target needs no digging") {
  const auto site = bench::pit_site(small_pit(0.0));
  const auto r = run_mission(site.grid, default_config(), 1);
  CHECK(r.state == MissionState::Done);
  CHECK(r.log.counters.scoops == 0);
  for (const auto& rec : r.log.records) CHECK(rec.state != MissionState::Dig);
  const auto e0 = site.grid.layer(grid::layer::kElevation);
  const auto e1 = r.terrain.layer(grid::layer::kElevation);
  CHECK(std::equal(e0.begin(), e0.end(), e1.begin()));
}

TEST_CASE("dump deadlock stops the mission at the documented pose") {
  const MissionConfig cfg = default_config();
  const auto fx = bench::dump_deadlock_fixture(cfg);
  REQUIRE(fx.failing_pose > 0);
  const auto r = run_mission(fx.site.grid, fx.plan, cfg, 5);
  CHECK(r.state == MissionState::Failed);
  REQUIRE(r.failure.has_value());
  CHECK(r.failure->code == ErrorCode::DumpDeadlock);
  CHECK(r.failure->pose == fx.failing_pose);
  CHECK(r.log.records.back().state == MissionState::Failed);
  // Poses before the failing one were worked.
  CHECK(r.log.counters.scoops > 0);
}
