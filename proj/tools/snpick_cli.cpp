// Command-line front end: grasp planning on depth files, pile simulation,
// single picks against a saved state, mass-model fitting, and the three
// experiment campaigns. Every invariant violation surfaces as a nonzero
// exit code with the reason on stderr.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "snpick/campaign.hpp"
#include "snpick/errors.hpp"
#include "snpick/grasp_planner.hpp"
#include "snpick/gripper.hpp"
#include "snpick/mass_model.hpp"
#include "snpick/pgm_io.hpp"
#include "snpick/pile_sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw snpick::io_error("cannot open '" + path.string() + "'");
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw snpick::io_error("bad json in '" + path.string() + "': " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw snpick::io_error("cannot open '" + path.string() + "'");
  out << j.dump(2) << "\n";
  if (!out) throw snpick::io_error("failed writing '" + path.string() + "'");
}

void write_scale_sidecar(const fs::path& depth_path, double scale) {
  write_json_file(depth_path.string() + ".json",
                  json{{"scale_mm_per_px", scale}});
}

struct PlanArgs {
  std::string depth_file;
  std::string config_file;
  double scale = 0.0;  // 0 = take it from the file or config
  std::string out_dir = ".";
  bool dump_maps = false;
};

int run_plan(const PlanArgs& args) {
  snpick::GripperSpec gripper;
  double sigma_mm = 5.0;
  double step_deg = 15.0;
  double cfg_scale = 0.0;
  if (!args.config_file.empty()) {
    const json cfg = load_json_file(args.config_file);
    if (cfg.contains("gripper")) gripper = cfg.at("gripper").get<snpick::GripperSpec>();
    sigma_mm = cfg.value("sigma_mm", sigma_mm);
    step_deg = cfg.value("orientation_step_deg", step_deg);
    cfg_scale = cfg.value("scale_mm_per_px", cfg_scale);
  }

  double scale = args.scale > 0.0 ? args.scale : cfg_scale;
  if (scale <= 0.0)
    scale = snpick::resolve_scale(args.depth_file).value_or(0.0);
  if (scale <= 0.0)
    throw snpick::config_error(
        "no pixel scale: pass --scale, set scale_mm_per_px in the config, or "
        "embed it in the depth file header/sidecar");

  const snpick::DepthMap depth = snpick::load_depth_map(args.depth_file, scale);
  const auto plan = snpick::plan_grasp(depth, gripper, sigma_mm, step_deg);

  fs::create_directories(args.out_dir);
  const fs::path out = fs::path(args.out_dir) / "plan.json";
  if (!plan) {
    write_json_file(out, json{{"plan", nullptr}});
    std::cerr << "no feasible grasp in this scene\n";
    std::cout << out.string() << "\n";
    return 0;
  }
  write_json_file(out, json{{"plan", *plan}});
  std::cout << out.string() << "\n";

  if (args.dump_maps) {
    const auto maps =
        snpick::compute_maps(depth, gripper, plan->rotation_deg, sigma_mm);
    const fs::path gp = fs::path(args.out_dir) / "graspability.pgm";
    const fs::path ep = fs::path(args.out_dir) / "entanglement.pgm";
    snpick::save_score_pgm(maps.G, gp);
    snpick::save_score_pgm(maps.Gprime, ep);
    std::cout << gp.string() << "\n" << ep.string() << "\n";
  }
  return 0;
}

struct SimulateArgs {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  double render_scale = 2.0;
};

int run_simulate(const SimulateArgs& args) {
  auto params = load_json_file(args.config_file).get<snpick::PileParams>();
  if (args.seed) params.seed = *args.seed;
  const snpick::PileState state = snpick::generate_pile(params);
  const snpick::DepthMap depth = snpick::render_depth(state, args.render_scale);

  fs::create_directories(args.out_dir);
  const fs::path state_path = fs::path(args.out_dir) / "state.json";
  const fs::path depth_path = fs::path(args.out_dir) / "depth.pgm";
  write_json_file(state_path, state);
  snpick::save_depth_map(depth, depth_path);
  write_scale_sidecar(depth_path, depth.scale());
  std::cout << state_path.string() << "\n" << depth_path.string() << "\n";
  return 0;
}

struct PickArgs {
  std::string state_file;
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

int run_pick(const PickArgs& args) {
  auto state = load_json_file(args.state_file).get<snpick::PileState>();
  const json cfg = load_json_file(args.config_file);

  snpick::PickParams pick;
  pick.x_mm = cfg.at("x_mm").get<double>();
  pick.y_mm = cfg.at("y_mm").get<double>();
  pick.rotation_deg = cfg.value("rotation_deg", pick.rotation_deg);
  pick.aperture_w_mm = cfg.value("aperture_w_mm", pick.aperture_w_mm);
  pick.jaw_lateral_mm = cfg.value("jaw_lateral_mm", pick.jaw_lateral_mm);
  pick.max_aperture_mm = cfg.value("max_aperture_mm", pick.max_aperture_mm);
  if (cfg.contains("spread_direction")) {
    const auto& dir = cfg.at("spread_direction");
    pick.spread_dir_x = dir.at(0).get<double>();
    pick.spread_dir_y = dir.at(1).get<double>();
  }
  const bool spread = cfg.value("spread", false);
  const auto strategy =
      snpick::strategy_from_string(cfg.value("strategy", std::string("FP")));
  const std::uint64_t seed = args.seed.value_or(state.rng_seed);

  const snpick::PickOutcome out =
      snpick::simulate_pick(state, pick, spread, seed, strategy);

  fs::create_directories(args.out_dir);
  json jout{{"strategy", snpick::to_string(out.strategy)},
            {"picked_ids", out.picked_ids},
            {"picked_mass_g", out.picked_mass_g},
            {"spread", out.spread},
            {"edges_attenuated", out.edges_attenuated},
            {"edges_pruned", out.edges_pruned},
            {"remaining_mass_g", state.total_mass()}};
  const fs::path outcome_path = fs::path(args.out_dir) / "outcome.json";
  const fs::path state_path = fs::path(args.out_dir) / "state.json";
  write_json_file(outcome_path, jout);
  write_json_file(state_path, state);
  std::cout << outcome_path.string() << "\n" << state_path.string() << "\n";
  return 0;
}

struct FitArgs {
  std::string trials_file;
  std::string out_dir = ".";
};

int run_fit(const FitArgs& args) {
  const auto records = snpick::read_trials_csv(args.trials_file);
  const snpick::MassModel model = snpick::fit_mass_model(records);
  fs::create_directories(args.out_dir);
  const fs::path out = fs::path(args.out_dir) / "model.json";
  write_json_file(out, model);
  std::cout << out.string() << "\n";
  return 0;
}

struct CampaignArgs {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string format = "csv";
};

int run_campaign_cmd(const std::string& which, const CampaignArgs& args) {
  auto cfg = load_json_file(args.config_file).get<snpick::ExperimentConfig>();
  if (cfg.experiment != which)
    throw snpick::config_error("config is for '" + cfg.experiment +
                               "' but the subcommand asked for '" + which + "'");
  if (args.seed) cfg.master_seed = *args.seed;
  const snpick::CampaignReport report = snpick::run_campaign(cfg);
  for (const std::string& path :
       snpick::emit_report(report, args.out_dir, args.format))
    std::cout << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"staple-pile grasp planning and picking experiments"};
  app.require_subcommand(1);

  PlanArgs plan_args;
  CLI::App* plan = app.add_subcommand("plan", "plan a grasp on a depth file");
  plan->add_option("--depth", plan_args.depth_file, "depth image (PGM or CSV)")
      ->required();
  plan->add_option("--config", plan_args.config_file,
                   "planner config json {gripper, sigma_mm, "
                   "orientation_step_deg, scale_mm_per_px}");
  plan->add_option("--scale", plan_args.scale, "pixel pitch in mm/px");
  plan->add_option("--out-dir", plan_args.out_dir, "output directory");
  plan->add_flag("--dump-maps", plan_args.dump_maps,
                 "also write graspability/entanglement PGMs");

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "generate a pile and render it");
  sim->add_option("--config", sim_args.config_file, "pile config json")
      ->required();
  std::uint64_t sim_seed = 0;
  CLI::Option* sim_seed_opt =
      sim->add_option("--seed", sim_seed, "override the config seed");
  sim->add_option("--out-dir", sim_args.out_dir, "output directory");
  sim->add_option("--render-scale", sim_args.render_scale, "render mm/px");

  PickArgs pick_args;
  CLI::App* pick = app.add_subcommand("pick", "execute one pick on a saved state");
  pick->add_option("--state", pick_args.state_file, "pile state json")
      ->required();
  pick->add_option("--config", pick_args.config_file,
                   "pick params json {x_mm, y_mm, rotation_deg, aperture_w_mm, "
                   "spread, strategy, ...}")
      ->required();
  std::uint64_t pick_seed = 0;
  CLI::Option* pick_seed_opt =
      pick->add_option("--seed", pick_seed, "pick outcome seed");
  pick->add_option("--out-dir", pick_args.out_dir, "output directory");

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit-mass-model",
                                     "fit aperture->mass line from trials");
  fit->add_option("--trials", fit_args.trials_file, "trial csv")->required();
  fit->add_option("--out-dir", fit_args.out_dir, "output directory");

  CampaignArgs camp_args;
  CLI::App* camp = app.add_subcommand("campaign", "run an experiment campaign");
  camp->require_subcommand(1);
  camp->fallthrough();  // accept --config etc. after the h1/h2/h3 name
  std::uint64_t camp_seed = 0;
  CLI::Option* camp_seed_opt = nullptr;
  for (const std::string which : {"h1", "h2", "h3"})
    camp->add_subcommand(which, "run the " + which + " study")->fallthrough();
  camp->add_option("--config", camp_args.config_file, "experiment config json")
      ->required();
  camp_seed_opt = camp->add_option("--seed", camp_seed, "override master_seed");
  camp->add_option("--out-dir", camp_args.out_dir, "output directory");
  camp->add_option("--format", camp_args.format, "summary format")
      ->check(CLI::IsMember({"csv", "markdown"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan) return run_plan(plan_args);
    if (*sim) {
      if (*sim_seed_opt) sim_args.seed = sim_seed;
      return run_simulate(sim_args);
    }
    if (*pick) {
      if (*pick_seed_opt) pick_args.seed = pick_seed;
      return run_pick(pick_args);
    }
    if (*fit) return run_fit(fit_args);
    if (*camp) {
      if (*camp_seed_opt) camp_args.seed = camp_seed;
      return run_campaign_cmd(camp->get_subcommands().front()->get_name(),
                              camp_args);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
