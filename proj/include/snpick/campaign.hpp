#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snpick/csv_util.hpp"
#include "snpick/errors.hpp"
#include "snpick/grasp_planner.hpp"
#include "snpick/gripper.hpp"
#include "snpick/mass_model.hpp"
#include "snpick/pile_sim.hpp"
#include "snpick/rng.hpp"
#include "snpick/stats.hpp"

namespace snpick {

struct ExperimentConfig {
  std::string experiment;  // "h1" | "h2" | "h3"
  PileParams pile;
  GripperSpec gripper;
  std::vector<double> apertures_mm;
  std::vector<double> protrusion_lengths_mm;
  std::vector<double> target_masses_g;
  int trials_per_cell = 1;
  std::vector<Strategy> strategies;
  Strategy training_strategy = Strategy::SnP;  // h3 phase-1 picks
  std::uint64_t master_seed = 0;

  // scene handling for the planned strategies
  double render_scale_mm_per_px = 2.0;
  double sigma_mm = 5.0;
  double orientation_step_deg = 15.0;
  double insertion_rz_mm = 2.0;

  std::optional<PileParams> transfer_pile;  // H3 cross-material evaluation

  void validate() const {
    if (experiment != "h1" && experiment != "h2" && experiment != "h3")
      throw config_error("experiment must be h1, h2 or h3, got '" + experiment + "'");
    if (trials_per_cell < 1)
      throw config_error("trials_per_cell must be >= 1");
    pile.validate();
    gripper.validate();
    if (!(render_scale_mm_per_px > 0.0))
      throw config_error("render scale must be > 0 mm/px");
    if (!(sigma_mm > 0.0)) throw config_error("sigma must be > 0 mm");
    if (!(orientation_step_deg > 0.0 && orientation_step_deg <= 90.0))
      throw config_error("orientation step must be in (0, 90] degrees");
    if (insertion_rz_mm < 0.0)
      throw config_error("insertion depth must be >= 0 mm");

    if (experiment == "h1") {
      if (apertures_mm.empty())
        throw config_error("h1 needs at least one aperture");
      const bool has_zero = std::any_of(protrusion_lengths_mm.begin(),
                                        protrusion_lengths_mm.end(),
                                        [](double l) { return l == 0.0; });
      const bool has_pos = std::any_of(protrusion_lengths_mm.begin(),
                                       protrusion_lengths_mm.end(),
                                       [](double l) { return l > 0.0; });
      if (!has_zero || !has_pos)
        throw config_error("h1 needs protrusion lengths with and without "
                           "protrusions (l = 0 and l > 0)");
    } else if (experiment == "h2") {
      if (apertures_mm.empty() || protrusion_lengths_mm.empty())
        throw config_error("h2 needs apertures and protrusion lengths");
      if (strategies.empty())
        throw config_error("h2 needs at least one strategy");
    } else {
      if (apertures_mm.size() < 2)
        throw config_error("h3 needs at least two training apertures");
      if (target_masses_g.empty())
        throw config_error("h3 needs target masses");
      if (strategies.empty())
        throw config_error("h3 needs at least one test strategy");
      for (double mt : target_masses_g)
        if (!(mt > 0.0)) throw config_error("target masses must be > 0 g");
    }
  }
};

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  nlohmann::json strategies = nlohmann::json::array();
  for (Strategy s : c.strategies) strategies.push_back(to_string(s));
  j = nlohmann::json{{"experiment", c.experiment},
                     {"pile", c.pile},
                     {"gripper", c.gripper},
                     {"apertures", c.apertures_mm},
                     {"protrusion_lengths", c.protrusion_lengths_mm},
                     {"target_masses", c.target_masses_g},
                     {"trials_per_cell", c.trials_per_cell},
                     {"strategies", strategies},
                     {"training_strategy", to_string(c.training_strategy)},
                     {"master_seed", c.master_seed},
                     {"render_scale_mm_per_px", c.render_scale_mm_per_px},
                     {"sigma_mm", c.sigma_mm},
                     {"orientation_step_deg", c.orientation_step_deg},
                     {"insertion_rz_mm", c.insertion_rz_mm}};
  if (c.transfer_pile) j["transfer_pile"] = *c.transfer_pile;
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  c = ExperimentConfig{};
  c.experiment = j.at("experiment").get<std::string>();
  if (j.contains("pile")) c.pile = j.at("pile").get<PileParams>();
  if (j.contains("gripper")) c.gripper = j.at("gripper").get<GripperSpec>();
  c.apertures_mm = j.value("apertures", c.apertures_mm);
  c.protrusion_lengths_mm = j.value("protrusion_lengths", c.protrusion_lengths_mm);
  c.target_masses_g = j.value("target_masses", c.target_masses_g);
  c.trials_per_cell = j.value("trials_per_cell", c.trials_per_cell);
  if (j.contains("strategies")) {
    c.strategies.clear();
    for (const auto& s : j.at("strategies"))
      c.strategies.push_back(strategy_from_string(s.get<std::string>()));
  }
  if (j.contains("training_strategy"))
    c.training_strategy =
        strategy_from_string(j.at("training_strategy").get<std::string>());
  c.master_seed = j.value("master_seed", c.master_seed);
  c.render_scale_mm_per_px = j.value("render_scale_mm_per_px", c.render_scale_mm_per_px);
  c.sigma_mm = j.value("sigma_mm", c.sigma_mm);
  c.orientation_step_deg = j.value("orientation_step_deg", c.orientation_step_deg);
  c.insertion_rz_mm = j.value("insertion_rz_mm", c.insertion_rz_mm);
  if (j.contains("transfer_pile"))
    c.transfer_pile = j.at("transfer_pile").get<PileParams>();
  c.validate();
}

struct CellStats {
  std::string cell_id;
  std::string experiment;
  double l_mm = 0.0;
  double w_mm = 0.0;
  std::optional<double> target_mass_g;
  Strategy strategy = Strategy::FP;
  int trials = 0;
  double mean_g = 0.0;
  double sd_g = 0.0;
  double var_g2 = 0.0;
  std::optional<double> picking_error_g;
  int spread_events = 0;
  int planner_fallbacks = 0;
  bool aperture_clamped = false;
  std::vector<TrialRecord> records;
};

struct H1Comparison {
  double w_mm = 0.0;
  double l_mm = 0.0;  // the protruding cell compared against its l=0 twin
  double var_ratio = 0.0;
  double p_value = 1.0;
};

struct CampaignReport {
  std::string experiment;
  nlohmann::json config_echo;
  std::uint64_t master_seed = 0;
  std::vector<CellStats> cells;
  std::vector<H1Comparison> comparisons;  // h1 only
  std::optional<MassModel> model;         // h3 only
};

namespace detail {

inline std::string trim_number(double v) { return format_double(v); }

inline void finalize_cell(CellStats& cell) {
  std::vector<double> masses;
  masses.reserve(cell.records.size());
  for (const TrialRecord& r : cell.records) masses.push_back(r.picked_mass_g);
  cell.trials = static_cast<int>(masses.size());
  cell.mean_g = masses.empty() ? 0.0 : mean(masses);
  if (masses.size() >= 2) {
    cell.var_g2 = sample_variance(masses);
    cell.sd_g = std::sqrt(cell.var_g2);
  } else {
    cell.var_g2 = 0.0;
    cell.sd_g = 0.0;
  }
  if (cell.target_mass_g && !masses.empty())
    cell.picking_error_g = picking_error(*cell.target_mass_g, masses);
}

// One fixed-parameter pick: jaws at the pile center, no planning involved.
inline TrialRecord fp_trial(PileState& state, const ExperimentConfig& cfg,
                            double w_mm, std::uint64_t pick_seed, int trial_n) {
  PickParams pick;
  pick.x_mm = state.area_w_mm() / 2.0;
  pick.y_mm = state.area_h_mm() / 2.0;
  pick.rotation_deg = 90.0;
  pick.aperture_w_mm = w_mm;
  pick.jaw_lateral_mm = cfg.gripper.plate_lateral_width_mm;
  pick.max_aperture_mm = cfg.gripper.max_aperture_mm;
  const PickOutcome out = simulate_pick(state, pick, false, pick_seed, Strategy::FP);

  TrialRecord r;
  r.strategy = Strategy::FP;
  r.rx_mm = pick.x_mm;
  r.ry_mm = pick.y_mm;
  r.rtheta_deg = pick.rotation_deg;
  r.w_mm = w_mm;
  r.picked_mass_g = out.picked_mass_g;
  r.trial_n = trial_n;
  return r;
}

// One planned pick (GI, optionally with the spread step for SnP). Falls back
// to a center pick when the whole scene is blocked, which the cell records.
inline TrialRecord planned_trial(PileState& state, const ExperimentConfig& cfg,
                                 double w_mm, bool spread,
                                 std::uint64_t pick_seed, int trial_n,
                                 CellStats& cell) {
  GripperSpec grip = cfg.gripper;
  grip.aperture_w_mm = w_mm;
  grip.insertion_depth_rz_mm = cfg.insertion_rz_mm;

  const DepthMap depth = render_depth(state, cfg.render_scale_mm_per_px);
  const auto plan =
      plan_grasp(depth, grip, cfg.sigma_mm, cfg.orientation_step_deg);

  PickParams pick;
  pick.aperture_w_mm = w_mm;
  pick.jaw_lateral_mm = grip.plate_lateral_width_mm;
  pick.max_aperture_mm = grip.max_aperture_mm;

  bool do_spread = false;
  if (plan) {
    pick.x_mm = (plan->grasp.x + 0.5) * depth.scale();
    pick.y_mm = (plan->grasp.y + 0.5) * depth.scale();
    pick.rotation_deg = spread ? plan->aligned_rotation_deg() : plan->rotation_deg;
    pick.spread_dir_x = plan->spread_dir_x;
    pick.spread_dir_y = plan->spread_dir_y;
    do_spread = spread && plan->entanglement.has_value();
    if (do_spread) ++cell.spread_events;
  } else {
    pick.x_mm = state.area_w_mm() / 2.0;
    pick.y_mm = state.area_h_mm() / 2.0;
    pick.rotation_deg = 90.0;
    ++cell.planner_fallbacks;
  }

  const Strategy strat = spread ? Strategy::SnP : Strategy::GI;
  const PickOutcome out = simulate_pick(state, pick, do_spread, pick_seed, strat);

  TrialRecord r;
  r.strategy = strat;
  r.rx_mm = pick.x_mm;
  r.ry_mm = pick.y_mm;
  r.rtheta_deg = pick.rotation_deg;
  r.w_mm = w_mm;
  r.picked_mass_g = out.picked_mass_g;
  r.trial_n = trial_n;
  return r;
}

}  // namespace detail

// Protrusions-versus-variance study: fixed-parameter center picks on fresh
// piles, protrusion length varied, trial seeds shared across lengths so the
// comparison is paired.
inline CampaignReport run_h1(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment != "h1") throw config_error("config is not an h1 config");

  CampaignReport report;
  report.experiment = "h1";
  report.config_echo = cfg;
  report.master_seed = cfg.master_seed;

  const std::uint64_t base = derive_seed(cfg.master_seed, 101);
  for (double l : cfg.protrusion_lengths_mm) {
    for (std::size_t wi = 0; wi < cfg.apertures_mm.size(); ++wi) {
      const double w = cfg.apertures_mm[wi];
      CellStats cell;
      cell.experiment = "h1";
      cell.strategy = Strategy::FP;
      cell.l_mm = l;
      cell.w_mm = w;
      cell.cell_id = "h1_l" + detail::trim_number(l) + "_w" +
                     detail::trim_number(w) + "_FP";
      for (int t = 0; t < cfg.trials_per_cell; ++t) {
        // seeds depend on (aperture, trial) but never on l: the l-cells see
        // identical placement randomness and differ only by protrusions
        const std::uint64_t trial_seed =
            derive_seed(base, wi * 1000003ull + static_cast<std::uint64_t>(t));
        PileParams prm = cfg.pile;
        prm.l_mm = l;
        prm.seed = derive_seed(trial_seed, 0);
        PileState state = generate_pile(prm);
        cell.records.push_back(detail::fp_trial(
            state, cfg, w, derive_seed(trial_seed, 1), t));
      }
      detail::finalize_cell(cell);
      report.cells.push_back(std::move(cell));
    }
  }

  // every protruding cell against its l = 0 twin at the same aperture
  for (const CellStats& cell : report.cells) {
    if (cell.l_mm == 0.0) continue;
    for (const CellStats& base_cell : report.cells) {
      if (base_cell.l_mm != 0.0 || base_cell.w_mm != cell.w_mm) continue;
      if (cell.records.size() < 2 || base_cell.records.size() < 2) continue;
      std::vector<double> a, b;
      for (const TrialRecord& r : cell.records) a.push_back(r.picked_mass_g);
      for (const TrialRecord& r : base_cell.records) b.push_back(r.picked_mass_g);
      const FTestResult f = variance_f_test(a, b);
      report.comparisons.push_back({cell.w_mm, cell.l_mm, f.ratio, f.p_value});
    }
  }
  return report;
}

// Spread-versus-spread-free study: per protrusion length, the same reshaken
// piles are picked with and without the spreading step.
inline CampaignReport run_h2(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment != "h2") throw config_error("config is not an h2 config");

  CampaignReport report;
  report.experiment = "h2";
  report.config_echo = cfg;
  report.master_seed = cfg.master_seed;

  const std::uint64_t base = derive_seed(cfg.master_seed, 202);
  for (std::size_t li = 0; li < cfg.protrusion_lengths_mm.size(); ++li) {
    const double l = cfg.protrusion_lengths_mm[li];
    for (std::size_t wi = 0; wi < cfg.apertures_mm.size(); ++wi) {
      const double w = cfg.apertures_mm[wi];
      // one batch of material per (l, w); every strategy sees the same
      // resets and the same pick seeds
      const std::uint64_t cell_seed = derive_seed(base, li * 1009ull + wi);
      PileParams prm = cfg.pile;
      prm.l_mm = l;
      prm.seed = derive_seed(cell_seed, 0);
      const PileState pristine = generate_pile(prm);

      for (Strategy strat : cfg.strategies) {
        CellStats cell;
        cell.experiment = "h2";
        cell.strategy = strat;
        cell.l_mm = l;
        cell.w_mm = w;
        cell.cell_id = "h2_l" + detail::trim_number(l) + "_w" +
                       detail::trim_number(w) + "_" + to_string(strat);
        for (int t = 0; t < cfg.trials_per_cell; ++t) {
          PileState state = reset_pile(
              pristine, derive_seed(cell_seed, 2ull * t + 1));
          const std::uint64_t pick_seed = derive_seed(cell_seed, 2ull * t + 2);
          if (strat == Strategy::FP)
            cell.records.push_back(detail::fp_trial(state, cfg, w, pick_seed, t));
          else
            cell.records.push_back(detail::planned_trial(
                state, cfg, w, strat == Strategy::SnP, pick_seed, t, cell));
        }
        detail::finalize_cell(cell);
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

// Mass-constrained picking: train a mass model on planned picks across the
// aperture grid, invert it per target mass, then compare strategies on
// matched piles. Optionally repeats the test phase on a second material
// with the same (untransferred) model.
inline CampaignReport run_h3(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment != "h3") throw config_error("config is not an h3 config");

  CampaignReport report;
  report.experiment = "h3";
  report.config_echo = cfg;
  report.master_seed = cfg.master_seed;

  // phase 1: training picks, planner-placed, no spreading
  std::vector<TrialRecord> training;
  const std::uint64_t train_base = derive_seed(cfg.master_seed, 303);
  for (std::size_t wi = 0; wi < cfg.apertures_mm.size(); ++wi) {
    const double w = cfg.apertures_mm[wi];
    CellStats cell;
    cell.experiment = "h3";
    cell.strategy = cfg.training_strategy;
    cell.l_mm = cfg.pile.l_mm;
    cell.w_mm = w;
    cell.cell_id = "h3_train_w" + detail::trim_number(w) + "_" +
                   to_string(cfg.training_strategy);
    for (int t = 0; t < cfg.trials_per_cell; ++t) {
      const std::uint64_t trial_seed =
          derive_seed(train_base, wi * 1000003ull + static_cast<std::uint64_t>(t));
      PileParams prm = cfg.pile;
      prm.seed = derive_seed(trial_seed, 0);
      PileState state = generate_pile(prm);
      const std::uint64_t pick_seed = derive_seed(trial_seed, 1);
      if (cfg.training_strategy == Strategy::FP)
        cell.records.push_back(detail::fp_trial(state, cfg, w, pick_seed, t));
      else
        cell.records.push_back(detail::planned_trial(
            state, cfg, w, cfg.training_strategy == Strategy::SnP, pick_seed,
            t, cell));
    }
    detail::finalize_cell(cell);
    training.insert(training.end(), cell.records.begin(), cell.records.end());
    report.cells.push_back(std::move(cell));
  }
  report.model = fit_mass_model(training);

  // phase 2: inverted apertures per target, strategies on matched seeds
  auto test_phase = [&](const PileParams& pile, const std::string& tag) {
    const std::uint64_t test_base = derive_seed(cfg.master_seed, 304);
    for (std::size_t mi = 0; mi < cfg.target_masses_g.size(); ++mi) {
      const double mt = cfg.target_masses_g[mi];
      const InvertedAperture inv = invert_mass_model(*report.model, mt);
      for (Strategy strat : cfg.strategies) {
        CellStats cell;
        cell.experiment = "h3";
        cell.strategy = strat;
        cell.l_mm = pile.l_mm;
        cell.w_mm = inv.w_mm;
        cell.target_mass_g = mt;
        cell.aperture_clamped = inv.clamped;
        cell.cell_id = "h3_mt" + detail::trim_number(mt) + "_" +
                       to_string(strat) + tag;
        for (int t = 0; t < cfg.trials_per_cell; ++t) {
          const std::uint64_t trial_seed = derive_seed(
              test_base, mi * 1000003ull + static_cast<std::uint64_t>(t));
          PileParams prm = pile;
          prm.seed = derive_seed(trial_seed, 0);
          PileState state = generate_pile(prm);
          if (strat == Strategy::FP)
            cell.records.push_back(detail::fp_trial(
                state, cfg, inv.w_mm, derive_seed(trial_seed, 1), t));
          else
            cell.records.push_back(detail::planned_trial(
                state, cfg, inv.w_mm, strat == Strategy::SnP,
                derive_seed(trial_seed, 1), t, cell));
        }
        detail::finalize_cell(cell);
        report.cells.push_back(std::move(cell));
      }
    }
  };
  test_phase(cfg.pile, "");
  if (cfg.transfer_pile) test_phase(*cfg.transfer_pile, "_transfer");
  return report;
}

inline CampaignReport run_campaign(const ExperimentConfig& cfg) {
  if (cfg.experiment == "h1") return run_h1(cfg);
  if (cfg.experiment == "h2") return run_h2(cfg);
  return run_h3(cfg);
}

// ---------------------------------------------------------------------------
// report emission

inline constexpr const char* kSummaryCsvHeader =
    "experiment,cell_id,l_mm,w_mm,target_g,strategy,trials,mean_g,sd_g,var_g2,"
    "picking_error_g,spread_events,planner_fallbacks,aperture_clamped";

inline std::string summary_csv_line(const CellStats& c) {
  std::string line = c.experiment + "," + c.cell_id + "," +
                     format_double(c.l_mm) + "," + format_double(c.w_mm) + ",";
  line += c.target_mass_g ? format_double(*c.target_mass_g) : std::string{};
  line += "," + to_string(c.strategy) + "," + std::to_string(c.trials) + "," +
          format_double(c.mean_g) + "," + format_double(c.sd_g) + "," +
          format_double(c.var_g2) + ",";
  line += c.picking_error_g ? format_double(*c.picking_error_g) : std::string{};
  line += "," + std::to_string(c.spread_events) + "," +
          std::to_string(c.planner_fallbacks) + "," +
          (c.aperture_clamped ? "1" : "0");
  return line;
}

namespace detail {

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw io_error("failed while writing '" + path.string() + "'");
}

inline std::string markdown_summary(const CampaignReport& report) {
  std::string md = "# Campaign " + report.experiment + "\n\n";
  md += "master_seed: " + std::to_string(report.master_seed) + "\n\n";
  md += "| cell | l (mm) | w (mm) | target (g) | strategy | trials | mean (g) "
        "| s.d. (g) | e (g) |\n";
  md += "|---|---|---|---|---|---|---|---|---|\n";
  for (const CellStats& c : report.cells) {
    md += "| " + c.cell_id + " | " + format_double(c.l_mm) + " | " +
          format_double(c.w_mm) + " | " +
          (c.target_mass_g ? format_double(*c.target_mass_g) : "-") + " | " +
          to_string(c.strategy) + " | " + std::to_string(c.trials) + " | " +
          format_double(c.mean_g) + " | " + format_double(c.sd_g) + " | " +
          (c.picking_error_g ? format_double(*c.picking_error_g) : "-") +
          " |\n";
  }
  if (!report.comparisons.empty()) {
    md += "\n| w (mm) | l (mm) | variance ratio | p |\n|---|---|---|---|\n";
    for (const H1Comparison& c : report.comparisons)
      md += "| " + format_double(c.w_mm) + " | " + format_double(c.l_mm) +
            " | " + format_double(c.var_ratio) + " | " +
            format_double(c.p_value) + " |\n";
  }
  if (report.model) {
    md += "\nmass model: slope " + format_double(report.model->slope) +
          " g/mm, intercept " + format_double(report.model->intercept) +
          " g, domain [" + format_double(report.model->w_min_mm) + ", " +
          format_double(report.model->w_max_mm) + "] mm, residual s.d. " +
          format_double(report.model->residual_sd_g) + " g\n";
  }
  return md;
}

}  // namespace detail

// Writes the per-cell trial CSVs plus a summary (csv or markdown), the
// config echo, and for H3 the fitted model. Returns every path written.
inline std::vector<std::string> emit_report(const CampaignReport& report,
                                            const std::string& out_dir,
                                            const std::string& format) {
  if (format != "csv" && format != "markdown")
    throw config_error("format must be csv or markdown, got '" + format + "'");
  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  fs::create_directories(root / "trials");

  std::vector<std::string> written;
  for (const CellStats& cell : report.cells) {
    const fs::path p = root / "trials" / (cell.cell_id + ".csv");
    write_trials_csv(p.string(), cell.records);
    written.push_back(p.string());
  }

  if (format == "csv") {
    std::string csv = std::string(kSummaryCsvHeader) + "\n";
    for (const CellStats& c : report.cells) csv += summary_csv_line(c) + "\n";
    const fs::path p = root / "summary.csv";
    detail::write_text_file(p, csv);
    written.push_back(p.string());
    if (!report.comparisons.empty()) {
      std::string cmp = "w_mm,l_mm,var_ratio,p_value\n";
      for (const H1Comparison& c : report.comparisons)
        cmp += format_double(c.w_mm) + "," + format_double(c.l_mm) + "," +
               format_double(c.var_ratio) + "," + format_double(c.p_value) +
               "\n";
      const fs::path cp = root / "comparisons.csv";
      detail::write_text_file(cp, cmp);
      written.push_back(cp.string());
    }
  } else {
    const fs::path p = root / "summary.md";
    detail::write_text_file(p, detail::markdown_summary(report));
    written.push_back(p.string());
  }

  const fs::path cfg_path = root / "config.json";
  detail::write_text_file(cfg_path, report.config_echo.dump(2) + "\n");
  written.push_back(cfg_path.string());

  if (report.model) {
    const nlohmann::json jm = *report.model;
    const fs::path mp = root / "model.json";
    detail::write_text_file(mp, jm.dump(2) + "\n");
    written.push_back(mp.string());
  }
  return written;
}

}  // namespace snpick
