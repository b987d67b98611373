#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "earthworks/harness.hpp"

namespace fs = std::filesystem;
using namespace earthworks;

namespace {

// Sites are directories written by write_site, or one of the built-in
// fixtures spelled fixture:<name>.
grid::Site load_site(const std::string& arg) {
  if (arg == "fixture:pit") return bench::pit_site();
  if (arg == "fixture:deadlock") return bench::dump_deadlock_fixture().site;
  if (arg.rfind("fixture:", 0) == 0) throw Error(ErrorCode::InvalidArgument, "unknown fixture '" + arg + "'");
  return grid::read_site(arg);
}

mission::MissionConfig load_config(const std::string& file) {
  if (!file.empty()) return mission::read_config(file);
  mission::MissionConfig cfg;
  cfg.sync();
  return cfg;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorCode::Io, "cannot write " + file.string());
}

void write_doubles(const fs::path& file, const std::vector<double>& values) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + file.string());
  out.write(reinterpret_cast<const char*>(values.data()), std::streamsize(values.size() * sizeof(double)));
}

std::string score_line(const bench::Score& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "S_p=%.6f S_w=%.6f coverage=%.6f", s.s_p, s.s_w, s.coverage);
  return buf;
}

int cmd_plan(const std::string& site_arg, const std::string& out, const std::string& config) {
  const auto cfg = load_config(config);
  bench::BenchmarkTask task;
  task.site = load_site(site_arg).grid;
  const auto plan = global::plan_site(task.site, cfg.planner, cfg.plan_options);
  global::write_plan(out, plan);
  int lanes = 0;
  for (const auto& v : plan.visits) lanes += v.lane_count;
  const auto s = bench::score_plan(task, plan, cfg.planner);
  std::cout << "poses=" << plan.working_poses().size() << " lanes=" << lanes
            << " entry_corner=" << (plan.visits.empty() ? -1 : plan.visits.front().entry) << " theta=" << plan.theta
            << ' ' << score_line(s) << '\n';
  return 0;
}

int cmd_simulate(const std::string& site_arg, const std::string& plan_arg, const std::string& out,
                 const std::string& config, std::uint64_t seed, bool snapshots) {
  const auto cfg = load_config(config);
  const auto site = load_site(site_arg);
  mission::MissionOptions opts;
  opts.snapshots = snapshots;
  const auto result = plan_arg == "auto"
                          ? mission::run_mission(site.grid, cfg, seed, opts)
                          : mission::run_mission(site.grid, global::read_plan(plan_arg), cfg, seed, opts);
  fs::create_directories(out);
  mission::write_log(fs::path(out) / "mission.jsonl", result.log);
  global::write_plan(fs::path(out) / "plan.json", result.plan);
  grid::write_site(fs::path(out) / "terrain", result.terrain, site.polygons);
  for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
    char name[48];
    std::snprintf(name, sizeof name, "elevation_%03zu.f64", k);
    fs::create_directories(fs::path(out) / "snapshots");
    write_doubles(fs::path(out) / "snapshots" / name, result.snapshots[k]);
  }
  const auto& c = result.log.counters;
  std::cout << "state=" << mission::state_name(result.state) << " scoops=" << c.scoops << " removed=" << c.removed
            << " deposited=" << c.deposited << " time=" << result.log.total_time() << '\n';
  if (result.failure) {
    const auto& f = *result.failure;
    std::cerr << "error: " << error_code_name(f.code) << " pose=" << f.pose << " cycle=" << f.cycle << ' '
              << f.message << '\n';
    return 3;
  }
  return 0;
}

int cmd_bench(const std::string& family, int count, std::uint64_t seed, const std::string& out, int threads,
              const std::string& config) {
  const auto cfg = load_config(config);
  bench::BenchOptions o;
  o.planner = cfg.planner;
  o.plan_options = cfg.plan_options;
  o.threads = threads;
  const auto rows = bench::run_benchmark(bench::parse_family(family), count, seed, o);
  const std::string csv = bench::bench_csv(rows);
  if (out.empty() || out == "-")
    std::cout << csv;
  else
    write_text(out, csv);
  return 0;
}

int cmd_render(const std::string& input, const std::string& out, const std::string& site_arg, const std::string& layer,
               int scale, const std::string& config) {
  const bench::Layer l = layer == "mask" ? bench::Layer::Mask : bench::Layer::Elevation;
  if (layer != "mask" && layer != "elevation") throw Error(ErrorCode::InvalidArgument, "layer must be elevation|mask");
  const fs::path in(input);
  bench::Image img;
  if (fs::is_directory(in) && fs::exists(in / "mission.jsonl")) {
    const auto terrain = grid::read_site(in / "terrain");
    img = bench::render_grid(terrain.grid, l, scale);
    const auto log = mission::read_log(in / "mission.jsonl");
    for (const auto& r : log.records)
      if (r.state == mission::MissionState::InitializeWorkspace)
        bench::draw_pose(img, terrain.grid.spec(), scale, r.base, {255, 255, 255});
  } else if (fs::is_directory(in) || input.rfind("fixture:", 0) == 0) {
    img = bench::render_grid(load_site(input).grid, l, scale);
  } else {
    if (site_arg.empty()) throw Error(ErrorCode::InvalidArgument, "rendering a plan needs --site");
    const auto site = load_site(site_arg);
    const auto plan = global::read_plan(input);
    const auto cfg = load_config(config);
    img = bench::render_grid(site.grid, l, scale);
    const auto& spec = site.grid.spec();
    for (std::size_t k = 1; k < plan.poses.size(); ++k) {
      const Pose2& a = plan.poses[k - 1].pose;
      const Pose2& b = plan.poses[k].pose;
      const auto path = nav::reeds_shepp(a, b, cfg.nav.turning_radius);
      if (path.valid()) {
        const auto samples = nav::rs_sample(a, path, spec.resolution);
        bench::draw_path(img, spec, scale, samples);
      }
    }
    for (const auto& p : plan.poses)
      if (p.working) bench::draw_pose(img, spec, scale, p.pose, {255, 255, 255});
  }
  bench::write_ppm(out, img);
  std::cout << "width=" << img.width << " height=" << img.height << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Excavation planning: coverage plans, mission simulation, benchmarks and rasters."};
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "INI file with planner and mission parameters");

  std::string site, out, plan_arg = "auto", family, layer = "elevation", render_site;
  std::uint64_t seed = 1;
  int count = 10, threads = 1, scale = 1;
  bool snapshots = false;

  auto* plan = app.add_subcommand("plan", "Plan base poses for a site");
  plan->add_option("site", site, "site directory or fixture:pit")->required();
  plan->add_option("-o,--output", out, "plan file (JSON)")->required();

  auto* sim = app.add_subcommand("simulate", "Run the excavation mission on a site");
  sim->add_option("site", site, "site directory or fixture:<name>")->required();
  sim->add_option("plan", plan_arg, "plan file, or -auto (auto) to plan first");
  sim->add_option("-o,--output", out, "log directory")->required();
  sim->add_option("--seed", seed, "random seed");
  sim->add_flag("--snapshots", snapshots, "write the elevation after every workspace");

  auto* bench_cmd = app.add_subcommand("bench", "Generate, plan and score benchmark tasks");
  bench_cmd->add_option("family", family, "Foundations, ExteriorFoundations, ...")->required();
  bench_cmd->add_option("-n,--count", count, "number of tasks")->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--seed", seed, "first task seed");
  bench_cmd->add_option("-o,--output", out, "CSV file, - for stdout");
  bench_cmd->add_option("--threads", threads, "tasks in flight")->check(CLI::PositiveNumber);

  auto* render = app.add_subcommand("render", "Write a PPM raster of a site, plan or mission log");
  render->add_option("input", site, "site directory, plan file or log directory")->required();
  render->add_option("-o,--output", out, "PPM file")->required();
  render->add_option("--site", render_site, "site of a plan file");
  render->add_option("--layer", layer, "elevation or mask");
  render->add_option("--scale", scale, "pixels per cell")->check(CLI::PositiveNumber);

  // "-auto" would otherwise parse as a cluster of short flags.
  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(std::string_view(argv[i]) == "-auto" ? "auto" : argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (*plan) return cmd_plan(site, out, config);
    if (*sim) return cmd_simulate(site, plan_arg, out, config, seed, snapshots);
    if (*bench_cmd) return cmd_bench(family, count, seed, out, threads, config);
    if (*render) return cmd_render(site, out, render_site, layer, scale, config);
  } catch (const Error& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ' ' << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal " << e.what() << '\n';
    return 2;
  }
  return 1;
}
