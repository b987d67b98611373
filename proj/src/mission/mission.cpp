#include <deque>
#include <map>

#include "earthworks/mission.hpp"

namespace earthworks::mission {

namespace {

using local::ZoneId;
using S = MissionState;

// Seed streams.
constexpr std::uint64_t kAttackStream = 1;
constexpr std::uint64_t kNavStream = 2;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// Log record builder.
struct Rec {
  LogRecord r;
  explicit Rec(MissionState s, double duration = 0.0) {
    r.state = s;
    r.duration = duration;
  }
  Rec& cycle(int c) {
    r.cycle = c;
    return *this;
  }
  Rec& zone(ZoneId z) {
    r.zone = z;
    return *this;
  }
  Rec& volume(double v) {
    r.volume = v;
    return *this;
  }
  Rec& dig(Vec2 p) {
    r.dig_point = p;
    return *this;
  }
  Rec& dump(Vec2 p) {
    r.dump_point = p;
    return *this;
  }
  Rec& note(std::string n) {
    r.note = std::move(n);
    return *this;
  }
};

soil::DepositSpec deposit_spec(const dig::DumpPoint& dp, double volume) {
  soil::DepositSpec d;
  d.center = dp.position;
  d.heading = dp.heading;
  d.volume = volume;
  return d;
}

struct Aborted {
  Failure failure;
};

class Runner {
 public:
  Runner(const grid::LayeredGrid& site, const global::CoveragePlan& plan, const MissionConfig& cfg,
         std::uint64_t seed, const MissionOptions& options)
      : cfg_(cfg), seed_(seed), options_(options) {
    result_.plan = plan;
    result_.terrain = site;
    grid::LayeredGrid& g = result_.terrain;
    if (!g.has_layer(grid::layer::kOriginalElevation)) {
      const auto e = g.layer(grid::layer::kElevation);
      g.set_layer(grid::layer::kOriginalElevation, std::vector<double>(e.begin(), e.end()));
    }
    user_mask_ = g.mask_values();
    for (const auto& p : plan.poses)
      if (p.working) poses_.push_back(p);
  }

  MissionResult run() {
    try {
      for (std::size_t k = 0; k < poses_.size(); ++k) {
        pose_ = int(k);
        workspace(k);
        emit(Rec(S::RetractArm, cfg_.durations.retract));
        if (k + 1 < poses_.size()) drive(poses_[k].pose, poses_[k + 1].pose);
      }
      emit(Rec(S::Done));
      result_.state = S::Done;
    } catch (const Aborted& a) {
      result_.failure = a.failure;
      emit(Rec(S::Failed).note(std::string(error_code_name(a.failure.code)) + ": " + a.failure.message));
      result_.state = S::Failed;
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (pose " + std::to_string(pose_) + ", cycle " +
                                std::to_string(result_.log.counters.scoops) + ")");
    }
    result_.log.counters.carried = carry_;
    return std::move(result_);
  }

 private:
  grid::LayeredGrid& grid() { return result_.terrain; }
  Counters& counters() { return result_.log.counters; }

  void emit(const Rec& rec) {
    LogRecord r = rec.r;
    auto& records = result_.log.records;
    const S prev = records.empty() ? S::InitializeWorkspace : records.back().state;
    if (!records.empty() && !legal_transition(prev, r.state))
      throw std::logic_error("illegal mission transition " + std::string(state_name(prev)) + " -> " +
                             std::string(state_name(r.state)));
    r.seq = records.size();
    r.start = clock_;
    r.pose = pose_;
    r.base = base_;
    clock_ += r.duration;
    records.push_back(std::move(r));
  }

  [[noreturn]] void fail(const Error& e) {
    const S at = result_.log.records.empty() ? S::InitializeWorkspace : result_.log.records.back().state;
    throw Aborted{{e.code(), e.what(), at, pose_, counters().scoops}};
  }

  void workspace(std::size_t k) {
    base_ = poses_[k].pose;
    const auto refreshed = local::refresh_mask(grid(), user_mask_, poses_, k, cfg_.local);
    local::LocalWorkspace ws(grid(), user_mask_, refreshed, base_, cfg_.local);
    references_.clear();
    receiving_.clear();
    ++counters().workspaces;
    emit(Rec(S::InitializeWorkspace, cfg_.durations.initialize));

    std::optional<Vec2> last_dig;
    std::deque<dig::Sweep> sweeps;
    ZoneId refine_dump = ZoneId::FrontLeft;
    std::array<int, 5> zone_cycles{};
    while (true) {
      if (!sweeps.empty()) {
        emit(Rec(S::CheckWorkspace, cfg_.durations.check).note("Refine"));
        const dig::Sweep sweep = sweeps.front();
        sweeps.pop_front();
        refine(ws, sweep, refine_dump);
        continue;
      }
      local::Selection sel;
      try {
        sel = ws.select(grid(), last_dig);
      } catch (const Error& e) {
        emit(Rec(S::CheckWorkspace, cfg_.durations.check).note("DumpDeadlock"));
        if (e.code() == ErrorCode::DumpDeadlock) fail(e);
        throw;
      }
      if (sel.action == local::Action::WorkspaceDone) {
        emit(Rec(S::CheckWorkspace, cfg_.durations.check).note("WorkspaceDone"));
        break;
      }
      if (sel.action == local::Action::Refine) {
        emit(Rec(S::CheckWorkspace, cfg_.durations.check).zone(ZoneId::Front).note("Refine"));
        ws.mark_refined();
        refine_dump = sel.dump_zone;
        const auto planned = dig::plan_refinement(dig::zone_sector(cfg_.local.geometry, ZoneId::Front),
                                                  cfg_.trajectory, cfg_.refine_expand);
        if (planned.empty()) continue;
        sweeps.assign(planned.begin() + 1, planned.end());
        refine(ws, planned.front(), refine_dump);
        continue;
      }
      const ZoneId z = sel.dig_zone;
      emit(Rec(S::CheckWorkspace, cfg_.durations.check)
               .zone(z)
               .note("Dig " + std::string(local::zone_name(z)) + " dump " +
                     std::string(local::zone_name(sel.dump_zone))));
      if (++zone_cycles[std::size_t(z)] > cfg_.max_cycles_per_zone) {
        exhaust(ws, z, "cycle limit");
        continue;
      }
      if (auto p = scoop(ws, z, sel.dump_zone)) last_dig = p;
    }
    if (options_.snapshots) {
      const auto e = grid().layer(grid::layer::kElevation);
      result_.snapshots.emplace_back(e.begin(), e.end());
    }
  }

  void exhaust(local::LocalWorkspace& ws, ZoneId z, const std::string& why) {
    emit(Rec(S::FindDigPoint, cfg_.durations.to_dig).zone(z).note("exhausted: " + why));
    ws.mark_exhausted(z);
    ++counters().exhausted_zones;
  }

  const std::vector<double>& reference(const local::LocalWorkspace& ws, ZoneId z) {
    auto it = references_.find(z);
    if (it == references_.end()) it = references_.emplace(z, ws.dig_reference(grid(), z)).first;
    return it->second;
  }

  const std::vector<std::uint8_t>& receiving(const local::LocalWorkspace& ws, ZoneId z) {
    auto it = receiving_.find(z);
    if (it == receiving_.end()) it = receiving_.emplace(z, ws.receiving_mask(z)).first;
    return it->second;
  }

  Vec2 world(double r, double theta) const { return base_.position() + unit(base_.heading + theta) * r; }

  // One FindDigPoint -> Dig -> Dump cycle; returns the dig point.
  std::optional<Vec2> scoop(local::LocalWorkspace& ws, ZoneId z, ZoneId dump_zone) {
    const dig::DigScene scene{&grid(), base_, reference(ws, z), dig::zone_sector(cfg_.local.geometry, z)};
    const auto attack = dig::optimize_attack(scene, cfg_.trajectory, cfg_.bo,
                                             mix_seed(mix_seed(seed_, kAttackStream), attacks_++));
    if (attack.nothing_to_dig || attack.volume < cfg_.min_scoop) {
      exhaust(ws, z, "best scoop " + fmt(attack.volume));
      return std::nullopt;
    }
    const bool loose = dig::is_loose(grid(), base_, attack.r, attack.theta);
    auto result = dig::simulate_dig(scene, attack.r, attack.theta, cfg_.trajectory, loose);
    if (loose && result.volume < cfg_.min_scoop)
      result = dig::simulate_dig(scene, attack.r, attack.theta, cfg_.trajectory, false);
    if (result.volume < cfg_.min_scoop) {
      exhaust(ws, z, "scoop " + fmt(result.volume));
      return std::nullopt;
    }
    const int cycle = counters().scoops++;
    const Vec2 p = world(attack.r, attack.theta);
    emit(Rec(S::FindDigPoint, cfg_.durations.to_dig).cycle(cycle).zone(z).dig(p));
    const double removed = soil::apply_scoop(grid(), result.removed);
    counters().removed += removed;
    if (z == ZoneId::Front) counters().front_volume += removed;
    emit(Rec(S::Dig, result.trajectory.duration + cfg_.durations.dig_overhead)
             .cycle(cycle)
             .zone(z)
             .volume(removed)
             .dig(p)
             .note(std::string(dig::stop_reason_name(result.reason)) + (result.trajectory.loose ? " loose" : "")));
    dump(ws, dump_zone, removed, cycle);
    return p;
  }

  void dump(const local::LocalWorkspace& ws, ZoneId z, double volume, int cycle) {
    const double v = volume + carry_;
    const auto dp = dig::select_dump_point(grid(), ws.zone(z).dump_cells, base_, cfg_.trajectory, cfg_.dump);
    const auto res = soil::deposit(grid(), deposit_spec(dp, v),
                                   receiving(ws, z));
    double placed = 0.0;
    std::string note;
    if (res.skipped) {
      // Too little to place; it stays in the bucket for the next dump.
      carry_ = v;
      ++counters().deposits_skipped;
      note = "carried";
    } else {
      carry_ = 0.0;
      placed = res.volume;
      counters().deposited += placed;
      counters().max_deposit_error = std::max(counters().max_deposit_error, std::abs(placed - v) / v);
    }
    emit(Rec(S::Dump, cfg_.durations.dump).cycle(cycle).zone(z).volume(placed).dump(dp.position).note(note));
  }

  void refine(local::LocalWorkspace& ws, const dig::Sweep& sweep, ZoneId dump_zone) {
    // Grading only trims residue; deeper soil belongs to later poses.
    std::vector<double> ref = reference(ws, ZoneId::Front);
    const auto elev = grid().layer(grid::layer::kElevation);
    for (std::size_t i = 0; i < ref.size(); ++i)
      if (!std::isnan(ref[i]) && elev[i] - ref[i] > cfg_.trajectory.h_max) ref[i] = grid::kNoData;
    const dig::DigScene scene{&grid(), base_, ref, dig::zone_sector(cfg_.local.geometry, ZoneId::Front)};
    const auto res = dig::simulate_sweep(scene, sweep, cfg_.trajectory);
    double cut = 0.0, fill = 0.0;
    for (const auto& c : res.changes) (c.delta < 0 ? cut : fill) += std::abs(c.delta);
    const double area = grid().spec().cell_area();
    soil::apply_changes(grid(), res.changes);
    counters().removed += cut * area;
    counters().deposited += fill * area;
    ++counters().refine_sweeps;
    const Vec2 start = world(sweep.r_start, sweep.theta);
    emit(Rec(S::FindDigPoint, cfg_.durations.to_dig).zone(ZoneId::Front).dig(start).note("refine"));
    emit(Rec(S::Dig, (sweep.r_start - sweep.r_end) / cfg_.trajectory.v_dig)
             .zone(ZoneId::Front)
             .volume(cut * area)
             .dig(start)
             .note("refine"));
    dump(ws, dump_zone, (cut - fill) * area, -1);
  }

  void drive(const Pose2& from, const Pose2& to) {
    const auto occ = nav::fuse_occupancy(grid(), user_mask_, cfg_.occupancy);
    for (int attempt = 0;; ++attempt) {
      nav::PathPlan plan;
      try {
        const std::uint64_t stream = std::uint64_t(pose_) * 64 + std::uint64_t(attempt);
        plan = nav::plan_path(occ, from, to, cfg_.nav, mix_seed(mix_seed(seed_, kNavStream), stream));
      } catch (const Error& e) {
        emit(Rec(S::FindPathPlan, cfg_.durations.find_path).note("failed"));
        if (e.code() == ErrorCode::PathNotFound) fail(e);
        throw;
      }
      emit(Rec(S::FindPathPlan, cfg_.durations.find_path)
               .note("trial " + std::to_string(plan.trial) + " length " + fmt(plan.length)));
      try {
        const auto follow = nav::follow_path(plan, occ, cfg_.nav);
        counters().drive_length += follow.length;
        base_ = to;
        emit(Rec(S::Driving, follow.duration).note("length " + fmt(follow.length)));
        return;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ReplanRequired || attempt + 1 >= cfg_.replan_attempts) throw;
        ++counters().replans;
        emit(Rec(S::Driving).note("replan"));
      }
    }
  }

  MissionConfig cfg_;
  std::uint64_t seed_;
  MissionOptions options_;
  MissionResult result_;
  std::vector<grid::MaskValue> user_mask_;
  std::vector<global::PlanPose> poses_;
  std::map<ZoneId, std::vector<double>> references_;
  std::map<ZoneId, std::vector<std::uint8_t>> receiving_;
  Pose2 base_;
  int pose_ = -1;
  double clock_ = 0.0;
  double carry_ = 0.0;
  std::uint64_t attacks_ = 0;
};

}  // namespace

MissionResult run_mission(const grid::LayeredGrid& site, const global::CoveragePlan& plan, const MissionConfig& cfg,
                          std::uint64_t seed, const MissionOptions& options) {
  cfg.validate();
  MissionConfig synced = cfg;
  synced.sync();
  return Runner(site, plan, synced, seed, options).run();
}

MissionResult run_mission(const grid::LayeredGrid& site, const MissionConfig& cfg, std::uint64_t seed,
                          const MissionOptions& options) {
  MissionConfig synced = cfg;
  synced.sync();
  const auto plan = global::plan_site(site, synced.planner, synced.plan_options);
  return run_mission(site, plan, synced, seed, options);
}

}  // namespace earthworks::mission
