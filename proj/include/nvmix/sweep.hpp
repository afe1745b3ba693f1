#pragma once

// End-to-end frequency sweep: schedule -> measure (synthetic or ingested)
// -> fit -> excess-rate limit -> constant-variation limits -> coupling
// exclusion table.
//
// Determinism contract: the output table is a pure function of (config
// bytes, master seed). Per-point seeds are derived hashes, points are
// computed independently, and results are merged in frequency order, so any
// worker count produces identical bytes.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nvmix/config.hpp"
#include "nvmix/csv.hpp"
#include "nvmix/dark_matter.hpp"
#include "nvmix/errors.hpp"
#include "nvmix/inference.hpp"
#include "nvmix/io.hpp"
#include "nvmix/mixing.hpp"
#include "nvmix/rng.hpp"
#include "nvmix/spin_model.hpp"

namespace nvmix {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kTableHeader =
    "freq_hz,m_phi_ev,omega1_hz,gamma_up_hz,dalpha_up,dme_up,"
    "inv_lambda_gamma_gev,inv_lambda_e_gev,projected";

struct ExclusionRow {
  double freq_hz = 0.0;
  double m_phi_ev = 0.0;
  double omega1_hz = 0.0;
  double gamma_up_hz = 0.0;  // per-direction excess-rate limit, s^-1
  double dalpha_up = 0.0;
  double dme_up = 0.0;
  double inv_lambda_gamma_gev = 0.0;
  double inv_lambda_e_gev = 0.0;
  bool projected = false;
};

struct Provenance {
  std::string version = kVersion;
  std::string config_hash;  // hex of the config byte hash
  std::uint64_t master_seed = 0;
  std::string mode;
  int points = 0;
  double rho_dm_gev_cm3 = 0.0;
  // The per-point drive schedule is a reconstruction (difference-band
  // retuning by default); overrides can replace it point by point.
  std::string schedule = "reconstructed-difference-band";
};

struct ExclusionTable {
  Provenance provenance;
  std::vector<ExclusionRow> rows;
};

struct PointFailure {
  int index = -1;
  double freq_hz = 0.0;
  std::string message;
};

struct SweepResult {
  ExclusionTable table;
  std::vector<PointFailure> failures;
};

// ---------------------------------------------------------------------------
// Table serialization
// ---------------------------------------------------------------------------

inline std::string serialize_table_csv(const ExclusionTable& table) {
  std::ostringstream out;
  const auto& p = table.provenance;
  out << "# nvmix exclusion table\n";
  out << "# version = " << p.version << '\n';
  out << "# config = " << p.config_hash << '\n';
  out << "# master_seed = " << p.master_seed << '\n';
  out << "# mode = " << p.mode << '\n';
  out << "# points = " << p.points << '\n';
  out << "# rho_dm_gev_cm3 = " << format_double(p.rho_dm_gev_cm3) << '\n';
  out << "# schedule = " << p.schedule << '\n';
  out << kTableHeader << '\n';
  for (const auto& r : table.rows) {
    out << format_double(r.freq_hz) << ',' << format_double(r.m_phi_ev) << ','
        << format_double(r.omega1_hz) << ',' << format_double(r.gamma_up_hz)
        << ',' << format_double(r.dalpha_up) << ',' << format_double(r.dme_up)
        << ',' << format_double(r.inv_lambda_gamma_gev) << ','
        << format_double(r.inv_lambda_e_gev) << ',' << (r.projected ? 1 : 0)
        << '\n';
  }
  return out.str();
}

inline nlohmann::json table_to_json(const ExclusionTable& table) {
  nlohmann::json j;
  const auto& p = table.provenance;
  j["provenance"] = {{"version", p.version},
                     {"config", p.config_hash},
                     {"master_seed", p.master_seed},
                     {"mode", p.mode},
                     {"points", p.points},
                     {"rho_dm_gev_cm3", p.rho_dm_gev_cm3},
                     {"schedule", p.schedule}};
  j["rows"] = nlohmann::json::array();
  for (const auto& r : table.rows) {
    j["rows"].push_back({{"freq_hz", r.freq_hz},
                         {"m_phi_ev", r.m_phi_ev},
                         {"omega1_hz", r.omega1_hz},
                         {"gamma_up_hz", r.gamma_up_hz},
                         {"dalpha_up", r.dalpha_up},
                         {"dme_up", r.dme_up},
                         {"inv_lambda_gamma_gev", r.inv_lambda_gamma_gev},
                         {"inv_lambda_e_gev", r.inv_lambda_e_gev},
                         {"projected", r.projected}});
  }
  return j;
}

inline std::string serialize_table(const ExclusionTable& table,
                                   TableFormat format) {
  if (format == TableFormat::Csv) return serialize_table_csv(table);
  return table_to_json(table).dump(2) + "\n";
}

inline void write_table(const ExclusionTable& table, const std::string& path,
                        TableFormat format) {
  write_file(path, serialize_table(table, format));
}

inline ExclusionTable parse_table_csv(const std::string& text) {
  ExclusionTable table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      // provenance comments: "# key = value"
      const auto eq = t.find('=');
      if (eq != std::string::npos) {
        const std::string key = trim(t.substr(1, eq - 1));
        const std::string value = trim(t.substr(eq + 1));
        if (key == "version") table.provenance.version = value;
        else if (key == "config") table.provenance.config_hash = value;
        else if (key == "master_seed")
          table.provenance.master_seed = std::strtoull(value.c_str(), nullptr, 10);
        else if (key == "mode") table.provenance.mode = value;
        else if (key == "points") table.provenance.points = std::atoi(value.c_str());
        else if (key == "rho_dm_gev_cm3")
          table.provenance.rho_dm_gev_cm3 = std::atof(value.c_str());
        else if (key == "schedule") table.provenance.schedule = value;
      }
      continue;
    }
    if (!header_seen) {
      if (t != kTableHeader) {
        throw SchemaError("line " + std::to_string(line_no) +
                          ": unexpected table header");
      }
      header_seen = true;
      continue;
    }
    const auto cells = split_csv(t);
    const auto names = split_csv(kTableHeader);
    if (cells.size() != names.size()) {
      // name the first missing column for the error message
      const std::string& missing =
          names[std::min(cells.size(), names.size() - 1)];
      throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(names.size()) + " columns, got " +
                        std::to_string(cells.size()) + " (column '" + missing +
                        "')");
    }
    ExclusionRow r;
    r.freq_hz = parse_double_field(cells[0], line_no, names[0]);
    r.m_phi_ev = parse_double_field(cells[1], line_no, names[1]);
    r.omega1_hz = parse_double_field(cells[2], line_no, names[2]);
    r.gamma_up_hz = parse_double_field(cells[3], line_no, names[3]);
    r.dalpha_up = parse_double_field(cells[4], line_no, names[4]);
    r.dme_up = parse_double_field(cells[5], line_no, names[5]);
    r.inv_lambda_gamma_gev = parse_double_field(cells[6], line_no, names[6]);
    r.inv_lambda_e_gev = parse_double_field(cells[7], line_no, names[7]);
    r.projected = parse_int_field(cells[8], line_no, names[8]) != 0;
    table.rows.push_back(r);
  }
  if (!header_seen) throw SchemaError("empty table file");
  return table;
}

inline ExclusionTable parse_table_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid table JSON: ") + e.what());
  }
  ExclusionTable table;
  try {
    const auto& p = j.at("provenance");
    table.provenance.version = p.value("version", "");
    table.provenance.config_hash = p.value("config", "");
    table.provenance.master_seed = p.value("master_seed", 0ULL);
    table.provenance.mode = p.value("mode", "");
    table.provenance.points = p.value("points", 0);
    table.provenance.rho_dm_gev_cm3 = p.value("rho_dm_gev_cm3", 0.0);
    table.provenance.schedule = p.value("schedule", "");
    for (const auto& row : j.at("rows")) {
      ExclusionRow r;
      r.freq_hz = row.at("freq_hz").get<double>();
      r.m_phi_ev = row.at("m_phi_ev").get<double>();
      r.omega1_hz = row.at("omega1_hz").get<double>();
      r.gamma_up_hz = row.at("gamma_up_hz").get<double>();
      r.dalpha_up = row.at("dalpha_up").get<double>();
      r.dme_up = row.at("dme_up").get<double>();
      r.inv_lambda_gamma_gev = row.at("inv_lambda_gamma_gev").get<double>();
      r.inv_lambda_e_gev = row.at("inv_lambda_e_gev").get<double>();
      r.projected = row.at("projected").get<bool>();
      table.rows.push_back(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("table JSON missing field: ") + e.what());
  }
  return table;
}

inline ExclusionTable read_table(const std::string& path, TableFormat format) {
  const std::string text = read_file(path);
  return format == TableFormat::Csv ? parse_table_csv(text)
                                    : parse_table_json(text);
}

// ---------------------------------------------------------------------------
// Per-point pipeline
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out(n);
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (int i = 0; i < n; ++i) {
    out[i] = std::exp(llo + (lhi - llo) * i / (n - 1));
  }
  return out;
}

struct PointContext {
  MixingConfig chain;  // detection chain used for the inversion
  SensitivityCoefficients coeffs;
  double omega1_hz = 0.0;
  double injected_gamma_phi = 0.0;  // per-direction truth, synthetic only
};

// Builds the detection chain for one point: spin frequency, coefficients,
// drive schedule, and (for synthetic mode) the injected excess rate.
inline PointContext build_point(const SweepConfig& cfg, int index,
                                const PointSettings& p) {
  NVSpinModel model;
  model.zero_field_splitting_D = kTwoPi * cfg.zero_field_splitting_hz;
  model.magnetic_field_B0 = p.b0_tesla;
  const auto freqs = transition_frequencies(model);
  if (freqs.off_branch || !(freqs.f_minus_hz > 0.0)) {
    throw DegenerateBranch("point " + std::to_string(index) +
                           ": minus branch crossed at B0 = " +
                           format_double(p.b0_tesla) + " T");
  }
  PointContext ctx;
  ctx.coeffs = sensitivity_coefficients(model, {}, Branch::Minus,
                                        kTwoPi * cfg.degeneracy_floor_hz);

  const double omega_spin = kTwoPi * freqs.f_minus_hz;
  const double omega_phi = kTwoPi * p.freq_hz;
  const double rabi = kTwoPi * p.rabi_hz;
  double omega1;
  if (p.omega1_hz > 0.0) {
    omega1 = kTwoPi * p.omega1_hz;
  } else {
    omega1 = mixing_schedule(omega_phi, omega_spin, p.band, rabi);
  }

  ctx.chain.omega_spin = omega_spin;
  ctx.chain.drive = MixerDrive{omega1, rabi, p.band};
  ctx.chain.signal = SignalHypothesis{omega_phi, 0.0, 0.0};
  ctx.chain.noise.gamma1 = p.gamma1;
  ctx.chain.noise.gamma2 = p.gamma2;
  ctx.chain.validate();
  ctx.omega1_hz = omega1 / kTwoPi;

  if (cfg.mode == SweepMode::Synthetic && index == cfg.inject_point &&
      (cfg.inject_frac_alpha != 0.0 || cfg.inject_frac_me != 0.0)) {
    const double delta_s = level_shift_amplitude(
        ctx.coeffs, cfg.inject_frac_alpha, cfg.inject_frac_me, omega_spin);
    const double omega_eff = effective_rabi(
        SignalHypothesis{omega_phi, delta_s, 0.0}, ctx.chain.drive);
    const double detuning = sideband_detuning(omega_spin, omega_phi, omega1);
    ctx.injected_gamma_phi =
        induced_relaxation_rate(omega_eff, detuning, ctx.chain.noise).gamma_phi;
  }
  return ctx;
}

// Converts an exponential-constant fit to per-direction rate units: the
// population exponential decays at twice the total transition rate.
inline RateEstimate to_transition_rate(const RateEstimate& fit) {
  RateEstimate out = fit;
  out.rate = fit.rate / 2.0;
  out.sigma = fit.sigma / 2.0;
  return out;
}

inline ExcessRate measure_point_synthetic(const SweepConfig& cfg, int index,
                                          const PointSettings& p,
                                          const PointContext& ctx) {
  const auto waits = log_spaced(p.wait_min_s, p.wait_max_s, p.wait_points);
  const double exp_signal = 2.0 * (p.gamma1 + ctx.injected_gamma_phi);
  const double exp_reference = 2.0 * p.gamma1;
  const auto sig_rec = synthesize_measurement(
      exp_signal, p.contrast, p.baseline_rate, waits, p.shots,
      derive_seed(cfg.master_seed, static_cast<std::uint64_t>(index), 1));
  const auto ref_rec = synthesize_measurement(
      exp_reference, p.contrast, p.baseline_rate, waits, p.shots,
      derive_seed(cfg.master_seed, static_cast<std::uint64_t>(index), 2));
  const auto sig_fit = to_transition_rate(fit_relaxation(sig_rec));
  const auto ref_fit = to_transition_rate(fit_relaxation(ref_rec));
  return excess_rate_limit(sig_fit, ref_fit, 0.95);
}

inline ExcessRate measure_point_ingest(const SweepConfig& cfg, int index) {
  char name[64];
  std::snprintf(name, sizeof(name), "point_%04d_signal.csv", index);
  const std::string sig_path = cfg.records_dir + "/" + name;
  std::snprintf(name, sizeof(name), "point_%04d_reference.csv", index);
  const std::string ref_path = cfg.records_dir + "/" + name;
  const auto sig_fit = to_transition_rate(fit_relaxation(read_record_csv(sig_path)));
  const auto ref_fit = to_transition_rate(fit_relaxation(read_record_csv(ref_path)));
  return excess_rate_limit(sig_fit, ref_fit, 0.95);
}

inline ExclusionRow run_point(const SweepConfig& cfg, int index,
                              double freq_hz) {
  const PointSettings p = point_settings(cfg, index, freq_hz);
  const PointContext ctx = build_point(cfg, index, p);

  ExcessRate excess;
  switch (cfg.mode) {
    case SweepMode::Synthetic:
      excess = measure_point_synthetic(cfg, index, p, ctx);
      break;
    case SweepMode::Ingest:
      excess = measure_point_ingest(cfg, index);
      break;
    case SweepMode::AnalyticOnly:
      excess.gamma_hat = 0.0;
      excess.sigma = cfg.analytic_sigma_gamma;
      excess.confidence = 0.95;
      excess.upper = sigma_multiplier(0.95) * excess.sigma;
      break;
  }

  const UpperLimit limit =
      variation_upper_limit(excess.upper, ctx.chain, ctx.coeffs, 0.95);

  DarkMatterModel dm;
  dm.rho_dm_gev_cm3 = cfg.rho_dm_gev_cm3;
  const CouplingLimit coupling =
      coupling_limit(dm, freq_hz, limit.frac_variation_up_alpha,
                     limit.frac_variation_up_me);

  ExclusionRow row;
  row.freq_hz = freq_hz;
  row.m_phi_ev = coupling.m_phi_ev;
  row.omega1_hz = ctx.omega1_hz;
  row.gamma_up_hz = excess.upper;
  row.dalpha_up = limit.frac_variation_up_alpha;
  row.dme_up = limit.frac_variation_up_me;
  row.inv_lambda_gamma_gev = coupling.inv_lambda_gamma_gev;
  row.inv_lambda_e_gev = coupling.inv_lambda_e_gev;
  row.projected = false;
  if (!std::isfinite(row.dalpha_up) || !std::isfinite(row.dme_up) ||
      row.dalpha_up < 0.0 || row.dme_up < 0.0) {
    throw Error("point " + std::to_string(index) +
                ": non-finite or negative limit");
  }
  return row;
}

}  // namespace detail

// Runs the sweep with the given worker count. Failed points are collected
// and reported; surviving rows stay sorted by frequency. Identical (config,
// seed) give byte-identical tables for any worker count.
inline SweepResult run_sweep(const SweepConfig& cfg, int workers = 0) {
  cfg.validate();
  const auto grid = cfg.frequency_grid();
  const int n = static_cast<int>(grid.size());

  std::vector<std::optional<ExclusionRow>> slots(n);
  std::vector<std::optional<PointFailure>> fails(n);

  int nw = workers > 0 ? workers
                       : static_cast<int>(std::thread::hardware_concurrency());
  nw = std::max(1, std::min(nw, n));

  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        slots[i] = detail::run_point(cfg, i, grid[i]);
      } catch (const std::exception& e) {
        fails[i] = PointFailure{i, grid[i], e.what()};
      }
    }
  };
  if (nw == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  SweepResult result;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(cfg.config_hash));
  result.table.provenance.config_hash = hash_hex;
  result.table.provenance.master_seed = cfg.master_seed;
  result.table.provenance.mode = sweep_mode_name(cfg.mode);
  result.table.provenance.points = n;
  result.table.provenance.rho_dm_gev_cm3 = cfg.rho_dm_gev_cm3;

  for (int i = 0; i < n; ++i) {
    if (slots[i]) result.table.rows.push_back(*slots[i]);
    if (fails[i]) result.failures.push_back(*fails[i]);
  }
  if (cfg.emit_projected) {
    const std::size_t base = result.table.rows.size();
    for (std::size_t i = 0; i < base; ++i) {
      const auto& r = result.table.rows[i];
      ExclusionRow proj = r;
      proj.inv_lambda_gamma_gev /= cfg.ensemble_factor;
      proj.inv_lambda_e_gev /= cfg.ensemble_factor;
      proj.projected = true;
      result.table.rows.push_back(proj);
    }
  }
  return result;
}

// Applies the ensemble projection to every row of an existing table.
inline ExclusionTable project_table(const ExclusionTable& table,
                                    double factor) {
  ExclusionTable out = table;
  for (auto& r : out.rows) {
    r.inv_lambda_gamma_gev /= factor;
    r.inv_lambda_e_gev /= factor;
    r.projected = true;
  }
  return out;
}

}  // namespace nvmix
