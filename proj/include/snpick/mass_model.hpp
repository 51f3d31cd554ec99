#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snpick/csv_util.hpp"
#include "snpick/errors.hpp"
#include "snpick/pile_sim.hpp"

namespace snpick {

struct TrialRecord {
  Strategy strategy = Strategy::FP;
  double rx_mm = 0.0;
  double ry_mm = 0.0;
  double rtheta_deg = 0.0;
  double w_mm = 0.0;
  double picked_mass_g = 0.0;
  int trial_n = 0;
};

inline Strategy strategy_from_string(const std::string& s) {
  if (s == "FP") return Strategy::FP;
  if (s == "GI") return Strategy::GI;
  if (s == "SnP") return Strategy::SnP;
  throw io_error("unknown strategy tag '" + s + "'");
}

// Mean absolute deviation of the picked masses from the target.
inline double picking_error(double target_mass_g, const std::vector<double>& picks) {
  if (picks.empty())
    throw config_error("picking error is undefined without any picks");
  if (!(target_mass_g > 0.0))
    throw config_error("target mass must be > 0 g");
  double sum = 0.0;
  for (double m : picks) sum += std::abs(target_mass_g - m);
  return sum / static_cast<double>(picks.size());
}

// Straight line mass = slope*w + intercept; slope must be positive so the
// line can be inverted aperture <- mass.
struct MassModel {
  double slope = 0.0;        // g per mm of aperture
  double intercept = 0.0;    // g
  double w_min_mm = 0.0;     // fitted aperture range
  double w_max_mm = 0.0;
  double residual_sd_g = 0.0;

  double predict(double w_mm) const { return slope * w_mm + intercept; }
};

inline void to_json(nlohmann::json& j, const MassModel& m) {
  j = nlohmann::json{{"slope", m.slope},
                     {"intercept", m.intercept},
                     {"domain", {m.w_min_mm, m.w_max_mm}},
                     {"residual_sd", m.residual_sd_g}};
}

inline void from_json(const nlohmann::json& j, MassModel& m) {
  m.slope = j.at("slope").get<double>();
  m.intercept = j.at("intercept").get<double>();
  m.w_min_mm = j.at("domain").at(0).get<double>();
  m.w_max_mm = j.at("domain").at(1).get<double>();
  m.residual_sd_g = j.value("residual_sd", 0.0);
  if (!(m.slope > 0.0))
    throw config_error("mass model slope must be positive, got " +
                       format_double(m.slope));
}

// Least squares over the raw trials, every pick weighted equally.
inline MassModel fit_mass_model(const std::vector<TrialRecord>& records) {
  if (records.size() < 2)
    throw fit_error("mass model needs at least two trials, got " +
                    std::to_string(records.size()));
  const double n = static_cast<double>(records.size());
  double sum_w = 0.0, sum_m = 0.0;
  for (const TrialRecord& r : records) {
    sum_w += r.w_mm;
    sum_m += r.picked_mass_g;
  }
  const double mean_w = sum_w / n;
  const double mean_m = sum_m / n;
  double sxx = 0.0, sxy = 0.0;
  for (const TrialRecord& r : records) {
    sxx += (r.w_mm - mean_w) * (r.w_mm - mean_w);
    sxy += (r.w_mm - mean_w) * (r.picked_mass_g - mean_m);
  }
  if (sxx == 0.0)
    throw fit_error("mass model needs at least two distinct apertures; all " +
                    std::to_string(records.size()) + " trials share w = " +
                    format_double(records.front().w_mm) + " mm");

  MassModel m;
  m.slope = sxy / sxx;
  m.intercept = mean_m - m.slope * mean_w;
  if (!(m.slope > 0.0))
    throw fit_error("fitted slope " + format_double(m.slope) +
                    " g/mm is not positive; picked mass must grow with "
                    "aperture for the model to invert");

  m.w_min_mm = records.front().w_mm;
  m.w_max_mm = records.front().w_mm;
  double ss_res = 0.0;
  for (const TrialRecord& r : records) {
    m.w_min_mm = std::min(m.w_min_mm, r.w_mm);
    m.w_max_mm = std::max(m.w_max_mm, r.w_mm);
    const double resid = r.picked_mass_g - m.predict(r.w_mm);
    ss_res += resid * resid;
  }
  m.residual_sd_g =
      records.size() > 2 ? std::sqrt(ss_res / (n - 2.0)) : 0.0;
  return m;
}

struct InvertedAperture {
  double w_mm = 0.0;
  bool clamped = false;  // target mass fell outside the fitted range
};

// Aperture that the line predicts for the target mass, clamped to the
// fitted domain (the gripper cannot open past what was trained).
inline InvertedAperture invert_mass_model(const MassModel& m, double target_mass_g) {
  if (!(m.slope > 0.0))
    throw config_error("cannot invert a mass model with non-positive slope");
  InvertedAperture out;
  out.w_mm = (target_mass_g - m.intercept) / m.slope;
  if (out.w_mm < m.w_min_mm) {
    out.w_mm = m.w_min_mm;
    out.clamped = true;
  } else if (out.w_mm > m.w_max_mm) {
    out.w_mm = m.w_max_mm;
    out.clamped = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// trial CSV

inline constexpr const char* kTrialCsvHeader =
    "strategy,rx,ry,rtheta_deg,w_mm,picked_mass_g,trial_n";

inline std::string trial_csv_line(const TrialRecord& r) {
  return to_string(r.strategy) + "," + format_double(r.rx_mm) + "," +
         format_double(r.ry_mm) + "," + format_double(r.rtheta_deg) + "," +
         format_double(r.w_mm) + "," + format_double(r.picked_mass_g) + "," +
         std::to_string(r.trial_n);
}

inline void write_trials_csv(const std::string& path,
                             const std::vector<TrialRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << kTrialCsvHeader << "\n";
  for (const TrialRecord& r : records) out << trial_csv_line(r) << "\n";
  if (!out) throw io_error("failed while writing '" + path + "'");
}

inline std::vector<TrialRecord> read_trials_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != split_csv_line(kTrialCsvHeader))
    throw io_error("'" + path + "' is not a trial CSV (bad header)");

  std::vector<TrialRecord> records;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7)
      throw io_error("'" + path + "' row " + std::to_string(row) + " has " +
                     std::to_string(f.size()) + " fields, expected 7");
    const std::string at = "'" + path + "' row " + std::to_string(row);
    TrialRecord r;
    r.strategy = strategy_from_string(f[0]);
    r.rx_mm = parse_double_field(f[1], at + " rx");
    r.ry_mm = parse_double_field(f[2], at + " ry");
    r.rtheta_deg = parse_double_field(f[3], at + " rtheta_deg");
    r.w_mm = parse_double_field(f[4], at + " w_mm");
    r.picked_mass_g = parse_double_field(f[5], at + " picked_mass_g");
    r.trial_n = static_cast<int>(parse_int_field(f[6], at + " trial_n"));
    records.push_back(r);
  }
  return records;
}

}  // namespace snpick
