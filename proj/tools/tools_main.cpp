#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cpnav/config.hpp"
#include "cpnav/scenarios.hpp"
#include "cpnav/svg.hpp"
#include "cpnav/world.hpp"

namespace {

using namespace cpnav;
using harness::RunConfig;

// Minimal trace reader for plotting: picks t,x,y,z out of a trace CSV.
std::vector<harness::TraceRow> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file: " + path);
  std::vector<harness::TraceRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() < 4) continue;
    harness::TraceRow r;
    r.t = vals[0];
    r.r = Vec3(vals[1], vals[2], vals[3]);
    rows.push_back(r);
  }
  return rows;
}

std::string default_out(const std::string& leaf) {
  if (const char* root = std::getenv("CPNAV_OUT_ROOT"))
    return std::string(root) + "/" + leaf;
  return leaf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compliant-arm quadrotor navigation testbed"};
  app.require_subcommand(1);

  std::string config_path, scenario, variant, planner, out, map_file, suite = "cluttered";
  std::uint64_t seed = 0;
  int seeds = 0, trials = 0, gen_count = 30;
  double speed = 0, height = 0;
  bool plot = false;

  auto* run = app.add_subcommand("run", "run one scenario");
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--scenario", scenario,
                  "estimator_static | estimator_dynamic | drop | wall_collision | "
                  "pole_collision | plan_offline | plan_online");
  run->add_option("--variant", variant, "compliant | rigid | both");
  run->add_option("--planner", planner, "cp | astar | rrt | all");
  run->add_option("--seed", seed, "base seed");
  run->add_option("--trials", trials, "trials per setting");
  run->add_option("--speed", speed, "approach speed, m/s");
  run->add_option("--height", height, "drop tip height, m");
  run->add_option("--map", map_file, "map JSON file");
  run->add_option("--out", out, "output directory");
  run->add_flag("--plot", plot, "write SVG plots");

  auto* bench = app.add_subcommand("bench", "batch suites");
  bench->add_option("--config", config_path, "JSON config file");
  bench->add_option("--suite", suite, "experimental | cluttered | online | drop | wall");
  bench->add_option("--seeds", seeds, "number of map seeds");
  bench->add_option("--trials", trials, "trials per setting");
  bench->add_option("--variant", variant, "compliant | rigid | both");
  bench->add_option("--seed", seed, "base seed");
  bench->add_option("--out", out, "output directory");
  bench->add_flag("--plot", plot, "write SVG plots");

  auto* mapcmd = app.add_subcommand("map", "generate or inspect maps");
  bool gen = false;
  std::string map_out, inspect;
  mapcmd->add_flag("--gen", gen, "generate a random cluttered map");
  mapcmd->add_option("--n", gen_count, "obstacle count");
  mapcmd->add_option("--seed", seed, "map seed");
  mapcmd->add_option("--config", config_path, "JSON config file (cluttered block)");
  mapcmd->add_option("--out", map_out, "output map file");
  mapcmd->add_option("--inspect", inspect, "print a map file back as JSON");

  auto* plotcmd = app.add_subcommand("plot", "trace CSVs over a map as SVG");
  std::vector<std::string> trace_files;
  std::string plot_map, plot_out;
  plotcmd->add_option("--map", plot_map, "map JSON file (defaults to the built-in one)");
  plotcmd->add_option("--trace", trace_files, "trace CSV files");
  plotcmd->add_option("--out", plot_out, "output SVG path");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : harness::load_config(config_path);
    if (run->count("--scenario")) cfg.scenario = scenario;
    if (app.count_all() && (run->count("--variant") || bench->count("--variant")))
      cfg.variant = variant;
    if (run->count("--planner")) cfg.planner = planner;
    if (run->count("--seed") || bench->count("--seed") || mapcmd->count("--seed"))
      cfg.seed = seed;
    if (bench->count("--seeds")) cfg.seeds = seeds;
    if (run->count("--trials") || bench->count("--trials")) cfg.trials = trials;
    if (run->count("--speed")) cfg.speed = speed;
    if (run->count("--height")) {
      cfg.height = height;
      cfg.heights = {height};
    }
    if (run->count("--map")) cfg.map_file = map_file;
    if (run->count("--plot") || bench->count("--plot")) cfg.plot = plot;
    if (mapcmd->count("--n")) cfg.cluttered.count = gen_count;

    if (run->parsed()) {
      cfg.out = run->count("--out") ? out : default_out("out/" + cfg.scenario);
      harness::validate_config(cfg);
      auto rows = harness::run_scenario(cfg);
      std::cout << harness::aggregate_table(rows);
      std::cout << "outputs: " << cfg.out << "\n";
    } else if (bench->parsed()) {
      cfg.out = bench->count("--out") ? out : default_out("out/bench_" + suite);
      harness::validate_config(cfg);
      auto rows = harness::run_suite(cfg, suite);
      std::cout << harness::aggregate_table(rows);
      std::cout << "outputs: " << cfg.out << "\n";
    } else if (mapcmd->parsed()) {
      if (!inspect.empty()) {
        std::cout << world::map_to_json(world::load_map(inspect)) << "\n";
      } else if (gen) {
        if (map_out.empty()) map_out = default_out("map_seed" + std::to_string(seed) + ".json");
        world::save_map(world::generate_random_map(cfg.cluttered, cfg.seed), map_out);
        std::cout << "wrote " << map_out << "\n";
      } else {
        throw ConfigError("map: need --gen or --inspect");
      }
    } else if (plotcmd->parsed()) {
      if (plot_out.empty()) throw ConfigError("plot: need --out");
      world::Map m =
          plot_map.empty() ? harness::experimental_map() : world::load_map(plot_map);
      std::vector<std::vector<harness::TraceRow>> traces;
      for (const auto& f : trace_files) traces.push_back(read_trace_csv(f));
      harness::write_map_svg(m, traces, cfg.cp.inflation, plot_out);
      std::cout << "wrote " << plot_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
