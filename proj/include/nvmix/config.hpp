#pragma once

// Sweep configuration: a flat sectioned key = value format. Unknown sections
// or keys are hard errors; every message carries the offending line number.
// The full key reference lives in the README.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nvmix/csv.hpp"
#include "nvmix/errors.hpp"
#include "nvmix/mixing.hpp"

namespace nvmix {

enum class SweepMode { Synthetic, Ingest, AnalyticOnly };

inline const char* sweep_mode_name(SweepMode m) {
  switch (m) {
    case SweepMode::Synthetic: return "synthetic";
    case SweepMode::Ingest: return "ingest";
    case SweepMode::AnalyticOnly: return "analytic";
  }
  return "?";
}

enum class TableFormat { Csv, Json };

// Everything needed to run one sweep point; built from the sweep defaults
// and then patched by per-point overrides.
struct PointSettings {
  double freq_hz = 0.0;  // signal frequency omega_phi / 2pi
  double b0_tesla = 0.051;
  double rabi_hz = 1e7;
  Band band = Band::Difference;
  double gamma1 = 200.0;   // s^-1
  double gamma2 = 1e6;     // s^-1
  long long shots = 3000;
  double baseline_rate = 0.05;  // counts per shot, bright state
  double contrast = 0.30;
  double wait_min_s = 1e-5;
  double wait_max_s = 3e-2;
  int wait_points = 20;
  double omega1_hz = 0.0;  // 0 = schedule automatically (on resonance)
};

struct SweepConfig {
  SweepMode mode = SweepMode::Synthetic;
  int points = 147;
  double freq_min_hz = 1e8;
  double freq_max_hz = 1.2e10;
  std::uint64_t master_seed = 1;
  std::string output = "exclusion.csv";
  TableFormat format = TableFormat::Csv;
  bool emit_projected = true;
  double ensemble_factor = 2.8e4;

  double zero_field_splitting_hz = 2.87e9;
  double degeneracy_floor_hz = 1e6;

  PointSettings defaults;

  double rho_dm_gev_cm3 = 0.4;

  int inject_point = -1;  // -1 disables injection
  double inject_frac_alpha = 0.0;
  double inject_frac_me = 0.0;

  double analytic_sigma_gamma = 85.0;  // s^-1, flat per-point rate error

  std::string records_dir;   // ingest mode
  std::string override_file; // optional per-point override CSV

  // Per-point patches loaded from override_file: index -> (field -> value).
  std::map<int, std::map<std::string, std::string>> overrides;

  // Hash of the raw config bytes, stamped into output provenance.
  std::uint64_t config_hash = 0;

  std::vector<double> frequency_grid() const {
    std::vector<double> grid(points);
    if (points == 1) {
      grid[0] = freq_min_hz;
      return grid;
    }
    const double lo = std::log(freq_min_hz);
    const double hi = std::log(freq_max_hz);
    for (int i = 0; i < points; ++i) {
      grid[i] = std::exp(lo + (hi - lo) * i / (points - 1));
    }
    return grid;
  }

  void validate() const {
    if (points < 1) throw ConfigInvalid("sweep.points must be >= 1");
    if (!(freq_min_hz > 0.0) || !(freq_max_hz >= freq_min_hz)) {
      throw ConfigInvalid("sweep frequency range invalid (need 0 < min <= max)");
    }
    if (points > 1 && !(freq_max_hz > freq_min_hz)) {
      throw ConfigInvalid("sweep.freq_max_hz must exceed freq_min_hz");
    }
    if (!(zero_field_splitting_hz > 0.0)) {
      throw ConfigInvalid("spin.zero_field_splitting_hz must be > 0");
    }
    if (!(defaults.b0_tesla >= 0.0)) throw ConfigInvalid("spin.b0_tesla must be >= 0");
    if (!(defaults.rabi_hz > 0.0)) throw ConfigInvalid("drive.rabi_hz must be > 0");
    if (!(defaults.gamma1 >= 0.0)) throw ConfigInvalid("noise.gamma1 must be >= 0");
    if (!(defaults.gamma2 >= 0.5 * defaults.gamma1)) {
      throw ConfigInvalid("noise.gamma2 must be >= gamma1/2");
    }
    if (defaults.shots <= 0) throw ConfigInvalid("measurement.shots must be > 0");
    if (!(defaults.contrast > 0.0 && defaults.contrast <= 1.0)) {
      throw ConfigInvalid("measurement.contrast must be in (0,1]");
    }
    if (!(defaults.baseline_rate > 0.0)) {
      throw ConfigInvalid("measurement.baseline_rate must be > 0");
    }
    if (defaults.wait_points < 4 ||
        !(defaults.wait_max_s > defaults.wait_min_s) ||
        !(defaults.wait_min_s > 0.0)) {
      throw ConfigInvalid("measurement wait-time grid invalid");
    }
    if (!(ensemble_factor >= 1.0)) {
      throw ConfigInvalid("sweep.ensemble_factor must be >= 1");
    }
    if (!(rho_dm_gev_cm3 > 0.0)) {
      throw ConfigInvalid("darkmatter.rho_dm_gev_cm3 must be > 0");
    }
    if (!(analytic_sigma_gamma > 0.0)) {
      throw ConfigInvalid("analytic.sigma_gamma must be > 0");
    }
    if (inject_point >= points) {
      throw ConfigInvalid("inject.point outside the sweep grid");
    }
    if (mode == SweepMode::Ingest && records_dir.empty()) {
      throw ConfigInvalid("ingest mode requires ingest.records_dir");
    }
  }
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"sweep",
       {"mode", "points", "freq_min_hz", "freq_max_hz", "master_seed", "band",
        "output", "format", "emit_projected", "ensemble_factor"}},
      {"spin", {"zero_field_splitting_hz", "b0_tesla", "degeneracy_floor_hz"}},
      {"drive", {"rabi_hz"}},
      {"noise", {"gamma1", "gamma2"}},
      {"measurement",
       {"shots", "baseline_rate", "contrast", "wait_min_s", "wait_max_s",
        "wait_points"}},
      {"darkmatter", {"rho_dm_gev_cm3"}},
      {"inject", {"point", "frac_alpha", "frac_me"}},
      {"analytic", {"sigma_gamma"}},
      {"ingest", {"records_dir"}},
      {"overrides", {"file"}},
  };
  return schema;
}

inline double to_double(const std::string& v, int line_no) {
  return parse_double_field(v, line_no, "value");
}

inline long long to_int(const std::string& v, int line_no) {
  return parse_int_field(v, line_no, "value");
}

inline bool to_bool(const std::string& v, int line_no) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigInvalid("line " + std::to_string(line_no) +
                      ": expected true/false, got '" + v + "'");
}

inline Band to_band(const std::string& v, int line_no) {
  if (v == "difference") return Band::Difference;
  if (v == "sum") return Band::Sum;
  throw ConfigInvalid("line " + std::to_string(line_no) +
                      ": band must be 'difference' or 'sum', got '" + v + "'");
}

}  // namespace detail

// Parses config text. Unknown sections/keys are errors (reproducibility
// over leniency); '#' starts a comment.
inline SweepConfig parse_config(const std::string& text) {
  SweepConfig cfg;
  cfg.config_hash = fnv1a_hash(text);
  std::string section;
  int line_no = 0;
  std::istringstream in(text);
  std::string raw;
  const auto& schema = detail::config_schema();

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigInvalid("line " + std::to_string(line_no) +
                            ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (schema.find(section) == schema.end()) {
        throw ConfigInvalid("line " + std::to_string(line_no) +
                            ": unknown section '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigInvalid("line " + std::to_string(line_no) +
                          ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw ConfigInvalid("line " + std::to_string(line_no) +
                          ": key outside any section");
    }
    const auto& keys = schema.at(section);
    if (keys.find(key) == keys.end()) {
      throw ConfigInvalid("line " + std::to_string(line_no) +
                          ": unknown key '" + section + "." + key + "'");
    }

    using namespace detail;
    if (section == "sweep") {
      if (key == "mode") {
        if (value == "synthetic") cfg.mode = SweepMode::Synthetic;
        else if (value == "ingest") cfg.mode = SweepMode::Ingest;
        else if (value == "analytic") cfg.mode = SweepMode::AnalyticOnly;
        else
          throw ConfigInvalid("line " + std::to_string(line_no) +
                              ": mode must be synthetic|ingest|analytic");
      } else if (key == "points") {
        cfg.points = static_cast<int>(to_int(value, line_no));
      } else if (key == "freq_min_hz") {
        cfg.freq_min_hz = to_double(value, line_no);
      } else if (key == "freq_max_hz") {
        cfg.freq_max_hz = to_double(value, line_no);
      } else if (key == "master_seed") {
        cfg.master_seed = static_cast<std::uint64_t>(to_int(value, line_no));
      } else if (key == "band") {
        cfg.defaults.band = to_band(value, line_no);
      } else if (key == "output") {
        cfg.output = value;
      } else if (key == "format") {
        if (value == "csv") cfg.format = TableFormat::Csv;
        else if (value == "json") cfg.format = TableFormat::Json;
        else
          throw ConfigInvalid("line " + std::to_string(line_no) +
                              ": format must be csv|json");
      } else if (key == "emit_projected") {
        cfg.emit_projected = to_bool(value, line_no);
      } else if (key == "ensemble_factor") {
        cfg.ensemble_factor = to_double(value, line_no);
      }
    } else if (section == "spin") {
      if (key == "zero_field_splitting_hz") {
        cfg.zero_field_splitting_hz = to_double(value, line_no);
      } else if (key == "b0_tesla") {
        cfg.defaults.b0_tesla = to_double(value, line_no);
      } else if (key == "degeneracy_floor_hz") {
        cfg.degeneracy_floor_hz = to_double(value, line_no);
      }
    } else if (section == "drive") {
      cfg.defaults.rabi_hz = to_double(value, line_no);
    } else if (section == "noise") {
      if (key == "gamma1") cfg.defaults.gamma1 = to_double(value, line_no);
      else cfg.defaults.gamma2 = to_double(value, line_no);
    } else if (section == "measurement") {
      if (key == "shots") cfg.defaults.shots = to_int(value, line_no);
      else if (key == "baseline_rate") cfg.defaults.baseline_rate = to_double(value, line_no);
      else if (key == "contrast") cfg.defaults.contrast = to_double(value, line_no);
      else if (key == "wait_min_s") cfg.defaults.wait_min_s = to_double(value, line_no);
      else if (key == "wait_max_s") cfg.defaults.wait_max_s = to_double(value, line_no);
      else cfg.defaults.wait_points = static_cast<int>(to_int(value, line_no));
    } else if (section == "darkmatter") {
      cfg.rho_dm_gev_cm3 = to_double(value, line_no);
    } else if (section == "inject") {
      if (key == "point") cfg.inject_point = static_cast<int>(to_int(value, line_no));
      else if (key == "frac_alpha") cfg.inject_frac_alpha = to_double(value, line_no);
      else cfg.inject_frac_me = to_double(value, line_no);
    } else if (section == "analytic") {
      cfg.analytic_sigma_gamma = to_double(value, line_no);
    } else if (section == "ingest") {
      cfg.records_dir = value;
    } else if (section == "overrides") {
      cfg.override_file = value;
    }
  }
  return cfg;
}

// Override CSV schema: header `index,field,value`, one patch per row.
inline void load_overrides(SweepConfig& cfg, const std::string& text) {
  static const std::set<std::string> allowed = {
      "b0_tesla", "rabi_hz",  "band",       "gamma1",     "gamma2",
      "shots",    "omega1_hz", "wait_min_s", "wait_max_s", "wait_points",
      "baseline_rate", "contrast"};
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = split_csv(t);
    if (!header_seen) {
      if (cells.size() != 3 || trim(cells[0]) != "index" ||
          trim(cells[1]) != "field" || trim(cells[2]) != "value") {
        throw SchemaError("override file line " + std::to_string(line_no) +
                          ": expected header index,field,value");
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != 3) {
      throw SchemaError("override file line " + std::to_string(line_no) +
                        ": expected 3 columns, got " +
                        std::to_string(cells.size()));
    }
    const int idx = static_cast<int>(parse_int_field(cells[0], line_no, "index"));
    const std::string field = trim(cells[1]);
    const std::string value = trim(cells[2]);
    if (allowed.find(field) == allowed.end()) {
      throw SchemaError("override file line " + std::to_string(line_no) +
                        ": unknown field '" + field + "'");
    }
    if (idx < 0 || idx >= cfg.points) {
      throw SchemaError("override file line " + std::to_string(line_no) +
                        ": index " + std::to_string(idx) +
                        " outside the sweep grid");
    }
    // Validate the value now so later point builds cannot fail.
    if (field == "band") {
      detail::to_band(value, line_no);
    } else if (field == "shots" || field == "wait_points") {
      parse_int_field(value, line_no, field);
    } else {
      parse_double_field(value, line_no, field);
    }
    cfg.overrides[idx][field] = value;
  }
}

// Materializes the settings for one sweep point, applying any overrides.
inline PointSettings point_settings(const SweepConfig& cfg, int index,
                                    double freq_hz) {
  PointSettings p = cfg.defaults;
  p.freq_hz = freq_hz;
  const auto it = cfg.overrides.find(index);
  if (it != cfg.overrides.end()) {
    for (const auto& [field, value] : it->second) {
      const int ln = -1;  // already validated at load time
      if (field == "b0_tesla") p.b0_tesla = detail::to_double(value, ln);
      else if (field == "rabi_hz") p.rabi_hz = detail::to_double(value, ln);
      else if (field == "band") p.band = detail::to_band(value, ln);
      else if (field == "gamma1") p.gamma1 = detail::to_double(value, ln);
      else if (field == "gamma2") p.gamma2 = detail::to_double(value, ln);
      else if (field == "shots") p.shots = detail::to_int(value, ln);
      else if (field == "omega1_hz") p.omega1_hz = detail::to_double(value, ln);
      else if (field == "wait_min_s") p.wait_min_s = detail::to_double(value, ln);
      else if (field == "wait_max_s") p.wait_max_s = detail::to_double(value, ln);
      else if (field == "wait_points") p.wait_points = static_cast<int>(detail::to_int(value, ln));
      else if (field == "baseline_rate") p.baseline_rate = detail::to_double(value, ln);
      else if (field == "contrast") p.contrast = detail::to_double(value, ln);
    }
  }
  return p;
}

inline SweepConfig load_config(const std::string& path) {
  SweepConfig cfg = parse_config(read_file(path));
  if (!cfg.override_file.empty()) {
    load_overrides(cfg, read_file(cfg.override_file));
  }
  cfg.validate();
  return cfg;
}

}  // namespace nvmix
