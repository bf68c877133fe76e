// Batch front end: parses a run configuration, dispatches to the purcellsim
// library through its C API, and writes CSV data files plus JSON fit reports.
//
// Exit codes: 0 success, 1 validation error (config/CLI/file), 2 numerical
// failure inside the library.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "purcellsim.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliError {
  int exit_code;
  std::string message;
};

[[noreturn]] void die(int code, const std::string& message) { throw CliError{code, message}; }

void check(ps_status status, const std::string& context) {
  if (status == PS_OK) return;
  const int code = status == PS_ERR_INVALID_ARGUMENT ? 1 : 2;
  die(code, context + ": " + ps_last_error());
}

// ---- handle wrappers ----------------------------------------------------

struct SystemDeleter {
  void operator()(ps_spin_system* p) const { ps_spin_system_free(p); }
};
struct ResonatorDeleter {
  void operator()(ps_resonator* p) const { ps_resonator_free(p); }
};
struct LineDeleter {
  void operator()(ps_spectral_line* p) const { ps_spectral_line_free(p); }
};
struct CurveDeleter {
  void operator()(ps_curve* p) const { ps_curve_free(p); }
};
struct TableDeleter {
  void operator()(ps_transition_table* p) const { ps_transition_table_free(p); }
};
struct FitDeleter {
  void operator()(ps_fit_result* p) const { ps_fit_result_free(p); }
};

using SystemPtr = std::unique_ptr<ps_spin_system, SystemDeleter>;
using ResonatorPtr = std::unique_ptr<ps_resonator, ResonatorDeleter>;
using LinePtr = std::unique_ptr<ps_spectral_line, LineDeleter>;
using CurvePtr = std::unique_ptr<ps_curve, CurveDeleter>;
using TablePtr = std::unique_ptr<ps_transition_table, TableDeleter>;
using FitPtr = std::unique_ptr<ps_fit_result, FitDeleter>;

// ---- configuration ------------------------------------------------------

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

struct Config {
  json root;
  std::string hash_hex;
};

void reject_unknown_keys(const json& object, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& item : object.items()) {
    if (!allowed.contains(item.key())) {
      die(1, "config: unknown key '" + item.key() + "' in " + where);
    }
  }
}

const json& need(const json& object, const std::string& key, const std::string& where) {
  if (!object.contains(key)) die(1, "config: missing key '" + key + "' in " + where);
  return object.at(key);
}

double need_number(const json& object, const std::string& key, const std::string& where) {
  const json& value = need(object, key, where);
  if (!value.is_number()) die(1, "config: key '" + key + "' in " + where + " must be a number");
  return value.get<double>();
}

double number_or(const json& object, const std::string& key, double fallback) {
  if (!object.contains(key)) return fallback;
  return object.at(key).get<double>();
}

const json& need_section(const Config& config, const std::string& name) {
  if (!config.root.contains(name)) die(1, "config: missing section '" + name + "'");
  return config.root.at(name);
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die(1, "cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  Config config;
  try {
    config.root = json::parse(text);
  } catch (const std::exception& e) {
    die(1, std::string("config parse error: ") + e.what());
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016" PRIx64, fnv1a(text));
  config.hash_hex = hex;

  static const std::set<std::string> kSections = {
      "spin_system", "resonators", "line",       "sim",      "transitions",
      "purcell",     "inversion",  "saturation", "rabi",     "fieldsweep",
      "reproduce"};
  reject_unknown_keys(config.root, kSections, "top level");

  if (config.root.contains("spin_system")) {
    reject_unknown_keys(config.root.at("spin_system"),
                        {"S", "I", "A_Hz", "gamma_e_Hz_per_T", "gamma_n_Hz_per_T"}, "spin_system");
  }
  if (config.root.contains("resonators")) {
    for (const auto& item : config.root.at("resonators").items()) {
      reject_unknown_keys(item.value(),
                          {"omega0_Hz", "Q", "kappa1_Hz", "kappa2_Hz", "dB1y_T", "dB1z_T", "theta_rad"},
                          "resonators." + item.key());
    }
  }
  if (config.root.contains("line")) {
    reject_unknown_keys(config.root.at("line"), {"components"}, "line");
    for (const auto& component : need(config.root.at("line"), "components", "line")) {
      reject_unknown_keys(component, {"center_Hz", "fwhm_Hz", "weight"}, "line.components[]");
    }
  }
  if (config.root.contains("sim")) {
    reject_unknown_keys(config.root.at("sim"),
                        {"grid_points", "grid_span_factor", "noise_sigma", "b1_spread"}, "sim");
  }
  if (config.root.contains("transitions")) {
    reject_unknown_keys(config.root.at("transitions"), {"b0_T", "min_matrix_element"}, "transitions");
  }
  if (config.root.contains("purcell")) {
    reject_unknown_keys(config.root.at("purcell"),
                        {"resonator", "t1_resonant_s", "gamma_nr_per_s", "delta_start_Hz",
                         "delta_stop_Hz", "points"},
                        "purcell");
  }
  if (config.root.contains("inversion")) {
    reject_unknown_keys(config.root.at("inversion"),
                        {"resonator", "g_Hz", "gamma_nr_per_s", "t_invert_s", "t_detect_pi_half_s",
                         "t_detect_pi_s", "t_detect_pi_broadband_s", "times_s"},
                        "inversion");
  }
  if (config.root.contains("saturation")) {
    reject_unknown_keys(config.root.at("saturation"),
                        {"resonator", "g_Hz", "gamma_nr_per_s", "mode", "sweep_deltas_Hz",
                         "saturation_bandwidth_Hz", "delta_pulse_Hz", "dfdB_Hz_per_T",
                         "coil_bandwidth_Hz", "buffer_s", "t_detect_pi_half_s", "t_detect_pi_s",
                         "times_s"},
                        "saturation");
  }
  if (config.root.contains("rabi")) {
    reject_unknown_keys(config.root.at("rabi"),
                        {"resonator", "g_Hz", "pulse_duration_s", "power_start_W", "power_stop_W",
                         "points"},
                        "rabi");
  }
  if (config.root.contains("fieldsweep")) {
    reject_unknown_keys(config.root.at("fieldsweep"),
                        {"resonators", "b_start_T", "b_stop_T", "points", "min_matrix_element",
                         "doublet_splitting_Hz", "doublet_fwhm_Hz"},
                        "fieldsweep");
  }
  if (config.root.contains("reproduce")) {
    reject_unknown_keys(config.root.at("reproduce"), {"t1_deltas_Hz", "decay_curve_count"},
                        "reproduce");
  }
  return config;
}

// ---- domain-object construction -----------------------------------------

SystemPtr make_system(const Config& config) {
  const json& section = need_section(config, "spin_system");
  ps_spin_system* raw = nullptr;
  check(ps_spin_system_create(need_number(section, "S", "spin_system"),
                              need_number(section, "I", "spin_system"),
                              need_number(section, "A_Hz", "spin_system"),
                              need_number(section, "gamma_e_Hz_per_T", "spin_system"),
                              need_number(section, "gamma_n_Hz_per_T", "spin_system"), &raw),
        "spin_system");
  return SystemPtr(raw);
}

struct ResonatorEntry {
  ResonatorPtr handle;
  double db1y_T = 0.0;
  double db1z_T = 0.0;
  double theta_rad = 0.0;
};

ResonatorEntry make_resonator(const Config& config, const std::string& name) {
  const json& section = need_section(config, "resonators");
  if (!section.contains(name)) die(1, "config: resonators has no entry '" + name + "'");
  const json& r = section.at(name);
  const std::string where = "resonators." + name;
  ps_resonator* raw = nullptr;
  check(ps_resonator_create(need_number(r, "omega0_Hz", where), need_number(r, "Q", where),
                            number_or(r, "kappa1_Hz", 0.0), number_or(r, "kappa2_Hz", 0.0), &raw),
        where);
  ResonatorEntry entry;
  entry.handle.reset(raw);
  entry.db1y_T = number_or(r, "dB1y_T", 0.0);
  entry.db1z_T = number_or(r, "dB1z_T", 0.0);
  entry.theta_rad = number_or(r, "theta_rad", 0.0);
  return entry;
}

LinePtr make_line(const Config& config) {
  const json& section = need_section(config, "line");
  std::vector<double> centers, fwhms, weights;
  for (const json& c : need(section, "components", "line")) {
    centers.push_back(need_number(c, "center_Hz", "line.components[]"));
    fwhms.push_back(need_number(c, "fwhm_Hz", "line.components[]"));
    weights.push_back(need_number(c, "weight", "line.components[]"));
  }
  ps_spectral_line* raw = nullptr;
  check(ps_spectral_line_create(centers.data(), fwhms.data(), weights.data(),
                                static_cast<int>(centers.size()), &raw),
        "line");
  return LinePtr(raw);
}

ps_sim_options make_options(const Config& config, std::uint64_t seed) {
  ps_sim_options options{0, 0.0, 0.0, seed, 0.0};
  if (config.root.contains("sim")) {
    const json& sim = config.root.at("sim");
    options.grid_points = static_cast<int>(number_or(sim, "grid_points", 0.0));
    options.grid_span_factor = number_or(sim, "grid_span_factor", 0.0);
    options.noise_sigma = number_or(sim, "noise_sigma", 0.0);
    options.b1_spread = number_or(sim, "b1_spread", 0.0);
  }
  return options;
}

std::vector<double> times_from(const json& section, const std::string& where) {
  const json& times = need(section, "times_s", where);
  if (times.is_array()) return times.get<std::vector<double>>();
  const double start = need_number(times, "start", where + ".times_s");
  const double stop = need_number(times, "stop", where + ".times_s");
  const int count = static_cast<int>(need_number(times, "count", where + ".times_s"));
  if (count < 2 || !(stop > start)) die(1, "config: bad times_s range in " + where);
  std::vector<double> out(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<size_t>(i)] = start + (stop - start) * i / (count - 1);
  return out;
}

std::vector<double> linspace(double start, double stop, int count) {
  std::vector<double> out(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<size_t>(i)] = start + (stop - start) * i / (count - 1);
  return out;
}

// ---- output --------------------------------------------------------------

struct OutputContext {
  fs::path directory;
  std::string config_hash;
  std::uint64_t seed = 0;
};

std::string metadata_comment(const OutputContext& out) {
  std::ostringstream line;
  line << "# purcellsim " << ps_version() << " config_hash=" << out.config_hash << " seed=" << out.seed;
  return line.str();
}

std::string format_value(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

void write_csv(const OutputContext& out, const std::string& filename, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  const fs::path path = out.directory / filename;
  std::ofstream file(path, std::ios::binary);
  if (!file) die(1, "cannot write " + path.string());
  file << metadata_comment(out) << "\n" << header << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i > 0) file << ",";
      file << format_value(row[i]);
    }
    file << "\n";
  }
  std::cout << "wrote " << path.string() << "\n";
}

void write_curve_csv(const OutputContext& out, const std::string& filename, const std::string& header,
                     const ps_curve* curve) {
  std::vector<std::vector<double>> rows;
  const int n = ps_curve_size(curve);
  rows.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = 0.0, y = 0.0;
    check(ps_curve_get(curve, i, &x, &y), "curve read");
    rows.push_back({x, y});
  }
  write_csv(out, filename, header, rows);
}

json fit_to_json(const ps_fit_result* fit, const std::string& model) {
  json params = json::object();
  json errors = json::object();
  for (int i = 0; i < ps_fit_result_param_count(fit); ++i) {
    const std::string name = ps_fit_result_param_name(fit, i);
    params[name] = ps_fit_result_param(fit, i);
    const double se = ps_fit_result_stderr(fit, i);
    if (std::isfinite(se)) {
      errors[name] = se;
    } else {
      errors[name] = "inf";
    }
  }
  json report;
  report["model"] = model;
  report["params"] = params;
  report["stderr"] = errors;
  report["residual_norm"] = ps_fit_result_residual_norm(fit);
  report["converged"] = ps_fit_result_converged(fit) != 0;
  report["iterations"] = ps_fit_result_iterations(fit);
  const std::string note = ps_fit_result_note(fit);
  if (!note.empty()) report["note"] = note;
  return report;
}

void write_fit_report(const OutputContext& out, const std::string& filename, const json& report,
                      bool echo_stdout) {
  const fs::path path = out.directory / filename;
  std::ofstream file(path, std::ios::binary);
  if (!file) die(1, "cannot write " + path.string());
  json wrapped = report;
  wrapped["tool_version"] = ps_version();
  wrapped["config_hash"] = out.config_hash;
  file << wrapped.dump(2) << "\n";
  if (echo_stdout) std::cout << wrapped.dump(2) << "\n";
  else std::cout << "wrote " << path.string() << "\n";
}

// ---- shared protocol runners ---------------------------------------------

CurvePtr run_inversion(const Config& config, const ps_sim_options& options, double t_detect_pi_s) {
  const json& section = need_section(config, "inversion");
  ResonatorEntry resonator = make_resonator(config, need(section, "resonator", "inversion"));
  LinePtr line = make_line(config);
  const std::vector<double> times = times_from(section, "inversion");
  ps_curve* raw = nullptr;
  const double t_pi = t_detect_pi_s > 0.0 ? t_detect_pi_s
                                          : need_number(section, "t_detect_pi_s", "inversion");
  check(ps_simulate_inversion_recovery(
            line.get(), resonator.handle.get(), need_number(section, "g_Hz", "inversion"),
            need_number(section, "gamma_nr_per_s", "inversion"),
            need_number(section, "t_invert_s", "inversion"),
            t_detect_pi_s > 0.0 ? 0.5 * t_detect_pi_s
                                : need_number(section, "t_detect_pi_half_s", "inversion"),
            t_pi, times.data(), static_cast<int>(times.size()), &options, &raw),
        "inversion recovery");
  return CurvePtr(raw);
}

CurvePtr run_saturation(const Config& config, const ps_sim_options& options, double delta_pulse_Hz,
                        const std::vector<double>& times, bool swept_override, bool has_override) {
  const json& section = need_section(config, "saturation");
  ResonatorEntry resonator = make_resonator(config, need(section, "resonator", "saturation"));
  LinePtr line = make_line(config);
  const std::string mode = need(section, "mode", "saturation").get<std::string>();
  if (mode != "plain" && mode != "swept") die(1, "config: saturation.mode must be 'plain' or 'swept'");
  const bool swept = has_override ? swept_override : mode == "swept";
  std::vector<double> sweep;
  if (section.contains("sweep_deltas_Hz")) sweep = section.at("sweep_deltas_Hz").get<std::vector<double>>();
  const double dfdb = need_number(section, "dfdB_Hz_per_T", "saturation");
  if (dfdb == 0.0) die(1, "config: saturation.dfdB_Hz_per_T must be non-zero");
  const double amplitude_T = delta_pulse_Hz / dfdb;

  ps_curve* raw = nullptr;
  check(ps_simulate_saturation_recovery(
            line.get(), resonator.handle.get(), need_number(section, "g_Hz", "saturation"),
            need_number(section, "gamma_nr_per_s", "saturation"), swept ? 1 : 0, sweep.data(),
            static_cast<int>(sweep.size()), number_or(section, "saturation_bandwidth_Hz", 250e3),
            amplitude_T, dfdb, number_or(section, "coil_bandwidth_Hz", 1.0),
            number_or(section, "buffer_s", 1.0),
            need_number(section, "t_detect_pi_half_s", "saturation"),
            need_number(section, "t_detect_pi_s", "saturation"), times.data(),
            static_cast<int>(times.size()), &options, &raw),
        "saturation recovery");
  return CurvePtr(raw);
}

CurvePtr run_rabi(const Config& config, const ps_sim_options& options) {
  const json& section = need_section(config, "rabi");
  ResonatorEntry resonator = make_resonator(config, need(section, "resonator", "rabi"));
  const std::vector<double> powers =
      linspace(number_or(section, "power_start_W", 0.0), need_number(section, "power_stop_W", "rabi"),
               static_cast<int>(number_or(section, "points", 81)));
  ps_curve* raw = nullptr;
  check(ps_simulate_rabi(powers.data(), static_cast<int>(powers.size()),
                         need_number(section, "pulse_duration_s", "rabi"),
                         need_number(section, "g_Hz", "rabi"), resonator.handle.get(), &options, &raw),
        "rabi simulation");
  return CurvePtr(raw);
}

CurvePtr run_fieldsweep(const Config& config, const std::string& resonator_name) {
  const json& section = need_section(config, "fieldsweep");
  SystemPtr system = make_system(config);
  ResonatorEntry resonator = make_resonator(config, resonator_name);
  const double splitting = number_or(section, "doublet_splitting_Hz", 4e6);
  const double fwhm = number_or(section, "doublet_fwhm_Hz", 2e6);
  const double centers[2] = {0.0, splitting};
  const double fwhms[2] = {fwhm, fwhm};
  const double weights[2] = {1.0, 1.0};
  ps_spectral_line* line_raw = nullptr;
  check(ps_spectral_line_create(centers, fwhms, weights, 2, &line_raw), "fieldsweep doublet");
  LinePtr doublet(line_raw);
  ps_curve* raw = nullptr;
  check(ps_field_sweep_spectrum(system.get(), resonator.handle.get(), doublet.get(),
                                need_number(section, "b_start_T", "fieldsweep"),
                                need_number(section, "b_stop_T", "fieldsweep"),
                                static_cast<int>(number_or(section, "points", 601)),
                                number_or(section, "min_matrix_element", 0.2), &raw),
        "field sweep");
  return CurvePtr(raw);
}

std::vector<std::vector<double>> table_rows(const ps_transition_table* table) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < ps_transition_table_size(table); ++i) {
    ps_transition t{};
    check(ps_transition_table_get(table, i, &t), "transition table read");
    rows.push_back({t.from_f, t.from_mf, t.to_f, t.to_mf, t.frequency_hz, t.matrix_element,
                    t.dfdb_hz_per_t, static_cast<double>(t.branch)});
  }
  return rows;
}

constexpr const char* kTransitionHeader =
    "fromF,frommF,toF,tomF,frequency_Hz,matrix_element,dfdB_Hz_per_T,branch";

// ---- commands -------------------------------------------------------------

void cmd_transitions(const Config& config, const OutputContext& out, double b0_override,
                     double threshold_override) {
  const json& section = need_section(config, "transitions");
  const double b0 = b0_override >= 0.0 ? b0_override : need_number(section, "b0_T", "transitions");
  const double threshold =
      threshold_override >= 0.0 ? threshold_override : number_or(section, "min_matrix_element", 0.0);
  SystemPtr system = make_system(config);
  ps_transition_table* raw = nullptr;
  check(ps_transition_table_compute(system.get(), b0, threshold, &raw), "transition table");
  TablePtr table(raw);
  write_csv(out, "transitions.csv", kTransitionHeader, table_rows(table.get()));
}

void cmd_purcell(const Config& config, const OutputContext& out) {
  const json& section = need_section(config, "purcell");
  ResonatorEntry resonator = make_resonator(config, need(section, "resonator", "purcell"));
  const double kappa = ps_resonator_kappa(resonator.handle.get());
  const double t1_resonant = need_number(section, "t1_resonant_s", "purcell");
  const double gamma_nr = need_number(section, "gamma_nr_per_s", "purcell");
  const std::vector<double> deltas =
      linspace(need_number(section, "delta_start_Hz", "purcell"),
               need_number(section, "delta_stop_Hz", "purcell"),
               static_cast<int>(number_or(section, "points", 201)));
  std::vector<std::vector<double>> rows;
  for (double d : deltas) {
    double t1 = 0.0;
    check(ps_t1_of_delta(t1_resonant, kappa, d, gamma_nr, &t1), "t1_of_delta");
    rows.push_back({d, t1});
  }
  write_csv(out, "purcell.csv", "delta_Hz,T1_s", rows);
}

void cmd_simulate(const Config& config, const OutputContext& out, const std::string& protocol,
                  const ps_sim_options& options) {
  if (protocol == "inversion") {
    CurvePtr curve = run_inversion(config, options, 0.0);
    write_curve_csv(out, "inversion.csv", "time_s,A_Q", curve.get());
  } else if (protocol == "saturation") {
    const json& section = need_section(config, "saturation");
    CurvePtr curve = run_saturation(config, options, number_or(section, "delta_pulse_Hz", 0.0),
                                    times_from(section, "saturation"), false, false);
    write_curve_csv(out, "saturation.csv", "time_s,A_Q", curve.get());
  } else if (protocol == "rabi") {
    CurvePtr curve = run_rabi(config, options);
    write_curve_csv(out, "rabi.csv", "power_W,A_Q", curve.get());
  } else if (protocol == "fieldsweep") {
    const json& section = need_section(config, "fieldsweep");
    for (const json& name : need(section, "resonators", "fieldsweep")) {
      const std::string resonator_name = name.get<std::string>();
      CurvePtr curve = run_fieldsweep(config, resonator_name);
      write_curve_csv(out, "fieldsweep_" + resonator_name + ".csv", "B0_T,A_Q", curve.get());
    }
  } else {
    die(1, "unknown protocol '" + protocol + "' (expected inversion|saturation|rabi|fieldsweep)");
  }
}

void cmd_fit(const Config* config, const OutputContext& out, const std::string& model,
             const std::string& input, double t1_resonant, double kappa,
             const std::string& resonator_name, double pulse_duration) {
  std::ifstream in(input);
  if (!in) die(1, "cannot open input CSV: " + input);
  std::vector<double> xs, ys;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',')) continue;
    try {
      const double x = std::stod(a);
      const double y = std::stod(b);
      xs.push_back(x);
      ys.push_back(y);
    } catch (...) {
      continue;  // header line
    }
  }
  if (xs.empty()) die(1, "no numeric rows in " + input);

  ps_fit_result* raw = nullptr;
  if (model == "exp") {
    check(ps_fit_exponential(xs.data(), ys.data(), static_cast<int>(xs.size()), &raw), "fit exp");
  } else if (model == "dexp") {
    check(ps_fit_double_exponential(xs.data(), ys.data(), static_cast<int>(xs.size()), &raw),
          "fit dexp");
  } else if (model == "purcell") {
    if (!(t1_resonant > 0.0) || !(kappa > 0.0)) {
      die(1, "fit purcell: --t1-resonant-s and --kappa-Hz are required");
    }
    check(ps_fit_purcell_t1(xs.data(), ys.data(), static_cast<int>(xs.size()), t1_resonant, kappa,
                            &raw),
          "fit purcell");
  } else if (model == "rabi") {
    if (config == nullptr) die(1, "fit rabi: --config with a resonators section is required");
    if (!(pulse_duration > 0.0)) die(1, "fit rabi: --pulse-duration-s is required");
    ResonatorEntry resonator = make_resonator(*config, resonator_name);
    check(ps_fit_rabi(xs.data(), ys.data(), static_cast<int>(xs.size()), resonator.handle.get(),
                      pulse_duration, &raw),
          "fit rabi");
  } else {
    die(1, "unknown fit model '" + model + "' (expected exp|dexp|purcell|rabi)");
  }
  FitPtr fit(raw);
  write_fit_report(out, "fit_" + model + ".json", fit_to_json(fit.get(), model), true);
}

void cmd_reproduce(const Config& config, const OutputContext& out, const ps_sim_options& options) {
  // Transition table.
  cmd_transitions(config, out, -1.0, -1.0);
  {
    SystemPtr system = make_system(config);
    const json& section = need_section(config, "transitions");
    ps_transition_table* raw = nullptr;
    check(ps_transition_table_compute(system.get(), need_number(section, "b0_T", "transitions"), 0.0,
                                      &raw),
          "transition table");
    TablePtr table(raw);
    write_csv(out, "full_transition_table.csv", kTransitionHeader, table_rows(table.get()));
  }

  // Field sweeps.
  const json& sweep_section = need_section(config, "fieldsweep");
  for (const json& name : need(sweep_section, "resonators", "fieldsweep")) {
    const std::string resonator_name = name.get<std::string>();
    CurvePtr curve = run_fieldsweep(config, resonator_name);
    write_curve_csv(out, "fieldsweep_" + resonator_name + ".csv", "B0_T,A_Q", curve.get());
  }

  // Rabi oscillations plus closure fit.
  {
    CurvePtr curve = run_rabi(config, options);
    write_curve_csv(out, "rabi_oscillations.csv", "power_W,A_Q", curve.get());
    const int n = ps_curve_size(curve.get());
    std::vector<double> powers(static_cast<size_t>(n)), amplitudes(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      check(ps_curve_get(curve.get(), i, &powers[static_cast<size_t>(i)],
                         &amplitudes[static_cast<size_t>(i)]),
            "curve read");
    }
    const json& section = need_section(config, "rabi");
    ResonatorEntry resonator = make_resonator(config, need(section, "resonator", "rabi"));
    ps_fit_result* raw = nullptr;
    check(ps_fit_rabi(powers.data(), amplitudes.data(), n, resonator.handle.get(),
                      need_number(section, "pulse_duration_s", "rabi"), &raw),
          "rabi fit");
    FitPtr fit(raw);
    write_fit_report(out, "rabi_fit.json", fit_to_json(fit.get(), "rabi"), false);
  }

  // Inversion recovery, narrowband readout plus broadband comparison.
  const json& inversion = need_section(config, "inversion");
  {
    CurvePtr narrow = run_inversion(config, options, 0.0);
    write_curve_csv(out, "inversion_recovery_narrowband.csv", "time_s,A_Q", narrow.get());
    const int n = ps_curve_size(narrow.get());
    std::vector<double> t(static_cast<size_t>(n)), y(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      check(ps_curve_get(narrow.get(), i, &t[static_cast<size_t>(i)], &y[static_cast<size_t>(i)]),
            "curve read");
    }
    ps_fit_result* raw = nullptr;
    check(ps_fit_exponential(t.data(), y.data(), n, &raw), "inversion fit");
    FitPtr fit(raw);
    write_fit_report(out, "inversion_narrowband_fit.json", fit_to_json(fit.get(), "exp"), false);

    const double t_broad = number_or(inversion, "t_detect_pi_broadband_s", 5e-6);
    CurvePtr broad = run_inversion(config, options, t_broad);
    write_curve_csv(out, "inversion_recovery_broadband.csv", "time_s,A_Q", broad.get());
    for (int i = 0; i < n; ++i) {
      check(ps_curve_get(broad.get(), i, &t[static_cast<size_t>(i)], &y[static_cast<size_t>(i)]),
            "curve read");
    }
    raw = nullptr;
    check(ps_fit_exponential(t.data(), y.data(), n, &raw), "inversion fit");
    FitPtr broad_fit(raw);
    write_fit_report(out, "inversion_broadband_fit.json", fit_to_json(broad_fit.get(), "exp"), false);
  }

  // T1 versus detuning: saturation-recovery curves, per-delta exponential
  // fits, then the one-parameter gamma_nr fit.
  {
    const json& section = need_section(config, "saturation");
    const json& repro = need_section(config, "reproduce");
    const std::vector<double> deltas = need(repro, "t1_deltas_Hz", "reproduce").get<std::vector<double>>();
    const int keep = static_cast<int>(number_or(repro, "decay_curve_count", 4));
    ResonatorEntry resonator = make_resonator(config, need(section, "resonator", "saturation"));
    const double kappa = ps_resonator_kappa(resonator.handle.get());
    const double g = need_number(section, "g_Hz", "saturation");
    const double gamma_nr = need_number(section, "gamma_nr_per_s", "saturation");
    double rate0 = 0.0;
    check(ps_purcell_rate(g, kappa, 0.0, &rate0), "purcell rate");
    const double t1_resonant = 1.0 / (rate0 + gamma_nr);

    std::vector<std::vector<double>> t1_rows;
    std::vector<double> fit_deltas, fit_t1;
    for (size_t k = 0; k < deltas.size(); ++k) {
      const double delta = deltas[k];
      double predicted = 0.0;
      check(ps_t1_of_delta(t1_resonant, kappa, delta, gamma_nr, &predicted), "t1_of_delta");
      const std::vector<double> times = linspace(predicted / 20.0, 4.0 * predicted, 25);
      CurvePtr curve = run_saturation(config, options, delta, times, true, true);
      const int n = ps_curve_size(curve.get());
      std::vector<double> t(static_cast<size_t>(n)), y(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        check(ps_curve_get(curve.get(), i, &t[static_cast<size_t>(i)], &y[static_cast<size_t>(i)]),
              "curve read");
      }
      if (static_cast<int>(k) < keep) {
        write_curve_csv(out, "t1_decay_" + std::to_string(k) + ".csv", "time_s,A_Q", curve.get());
      }
      ps_fit_result* raw = nullptr;
      check(ps_fit_exponential(t.data(), y.data(), n, &raw), "decay fit");
      FitPtr fit(raw);
      double fitted_t1 = 0.0;
      for (int i = 0; i < ps_fit_result_param_count(fit.get()); ++i) {
        if (std::string(ps_fit_result_param_name(fit.get(), i)) == "T1") {
          fitted_t1 = ps_fit_result_param(fit.get(), i);
        }
      }
      t1_rows.push_back({delta, fitted_t1});
      fit_deltas.push_back(delta);
      fit_t1.push_back(fitted_t1);
    }
    write_csv(out, "t1_vs_delta.csv", "delta_Hz,T1_s", t1_rows);

    ps_fit_result* raw = nullptr;
    check(ps_fit_purcell_t1(fit_deltas.data(), fit_t1.data(), static_cast<int>(fit_deltas.size()),
                            t1_resonant, kappa, &raw),
          "gamma_nr fit");
    FitPtr fit(raw);
    json report = fit_to_json(fit.get(), "purcell");
    report["t1_resonant_s"] = t1_resonant;
    report["kappa_Hz"] = kappa;
    if (ps_fit_result_param_count(fit.get()) == 1 && ps_fit_result_param(fit.get(), 0) > 0.0) {
      report["gamma_nr_inverse_s"] = 1.0 / ps_fit_result_param(fit.get(), 0);
    }
    write_fit_report(out, "gamma_nr_fit.json", report, false);

    // Saturation-recovery decays at the reference detuning: swept versus
    // plain saturation, both fit with single and double exponentials.
    const double reference_delta = number_or(section, "delta_pulse_Hz", 3.8e6);
    double predicted = 0.0;
    check(ps_t1_of_delta(t1_resonant, kappa, reference_delta, gamma_nr, &predicted), "t1_of_delta");
    const std::vector<double> times = linspace(predicted / 20.0, 4.0 * predicted, 31);
    CurvePtr swept = run_saturation(config, options, reference_delta, times, true, true);
    write_curve_csv(out, "saturation_recovery_swept.csv", "time_s,A_Q", swept.get());
    CurvePtr plain = run_saturation(config, options, reference_delta, times, false, true);
    write_curve_csv(out, "saturation_recovery_plain.csv", "time_s,A_Q", plain.get());
    const int n = ps_curve_size(swept.get());
    std::vector<double> t(static_cast<size_t>(n)), y(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      check(ps_curve_get(swept.get(), i, &t[static_cast<size_t>(i)], &y[static_cast<size_t>(i)]),
            "curve read");
    }
    raw = nullptr;
    check(ps_fit_double_exponential(t.data(), y.data(), n, &raw), "dexp fit");
    FitPtr dexp(raw);
    write_fit_report(out, "saturation_swept_dexp_fit.json", fit_to_json(dexp.get(), "dexp"), false);

    // Polarization scans right after each excitation scheme.
    LinePtr line_handle = make_line(config);
    std::vector<double> sweep;
    if (section.contains("sweep_deltas_Hz")) {
      sweep = section.at("sweep_deltas_Hz").get<std::vector<double>>();
    }
    const std::vector<double> probes = linspace(-6e6, 10e6, 161);
    const struct {
      int kind;
      const char* name;
    } scans[] = {{0, "none"}, {1, "pi"}, {2, "plain"}, {3, "swept"}};
    for (const auto& scan : scans) {
      ps_curve* scan_raw = nullptr;
      check(ps_polarization_scan(line_handle.get(), resonator.handle.get(), g, gamma_nr, scan.kind,
                                 5e-6, sweep.data(), static_cast<int>(sweep.size()),
                                 number_or(section, "saturation_bandwidth_Hz", 250e3),
                                 number_or(section, "coil_bandwidth_Hz", 1.0),
                                 number_or(section, "buffer_s", 1.0),
                                 need_number(section, "t_detect_pi_half_s", "saturation"),
                                 need_number(section, "t_detect_pi_s", "saturation"), probes.data(),
                                 static_cast<int>(probes.size()), &options, &scan_raw),
            "polarization scan");
      CurvePtr scan_curve(scan_raw);
      write_curve_csv(out, std::string("polarization_scan_") + scan.name + ".csv", "delta_Hz,Sz",
                      scan_curve.get());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"purcellsim: cavity-controlled spin relaxation simulator and fitter"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd, bool config_required) {
    auto* opt = cmd->add_option("--config", config_path, "run configuration (JSON)");
    if (config_required) opt->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "noise generator seed");
  };

  auto* transitions_cmd = app.add_subcommand("transitions", "emit the allowed-transition table as CSV");
  double b0_override = -1.0, threshold_override = -1.0;
  add_common(transitions_cmd, true);
  transitions_cmd->add_option("--b0-T", b0_override, "static field override (T)");
  transitions_cmd->add_option("--min-matrix-element", threshold_override, "matrix-element threshold");

  auto* purcell_cmd = app.add_subcommand("purcell", "T1 versus detuning from the rate formula");
  add_common(purcell_cmd, true);

  auto* simulate_cmd = app.add_subcommand("simulate", "run a pulse-protocol simulation");
  std::string protocol;
  add_common(simulate_cmd, true);
  simulate_cmd->add_option("--protocol", protocol, "inversion|saturation|rabi|fieldsweep")->required();

  auto* fit_cmd = app.add_subcommand("fit", "fit a decay/oscillation CSV");
  std::string model, input, fit_resonator = "B";
  double t1_resonant = 0.0, kappa = 0.0, pulse_duration = 0.0;
  add_common(fit_cmd, false);
  fit_cmd->add_option("--model", model, "exp|dexp|purcell|rabi")->required();
  fit_cmd->add_option("--input", input, "input CSV (x,y)")->required();
  fit_cmd->add_option("--t1-resonant-s", t1_resonant, "fixed resonant T1 (purcell model)");
  fit_cmd->add_option("--kappa-Hz", kappa, "fixed cavity linewidth (purcell model)");
  fit_cmd->add_option("--resonator", fit_resonator, "resonator name for nbar calibration (rabi)");
  fit_cmd->add_option("--pulse-duration-s", pulse_duration, "refocusing pulse length (rabi)");

  auto* reproduce_cmd = app.add_subcommand("reproduce", "emit the full set of reference data files");
  add_common(reproduce_cmd, true);

  CLI11_PARSE(app, argc, argv);

  try {
    OutputContext out;
    out.directory = out_dir;
    out.seed = seed;
    std::error_code ec;
    fs::create_directories(out.directory, ec);
    if (ec) die(1, "cannot create output directory: " + out.directory.string());

    Config config;
    const bool have_config = !config_path.empty();
    if (have_config) {
      config = load_config(config_path);
      out.config_hash = config.hash_hex;
    } else {
      out.config_hash = "none";
    }
    const ps_sim_options options = have_config ? make_options(config, seed)
                                               : ps_sim_options{0, 0.0, 0.0, seed, 0.0};

    if (transitions_cmd->parsed()) {
      cmd_transitions(config, out, b0_override, threshold_override);
    } else if (purcell_cmd->parsed()) {
      cmd_purcell(config, out);
    } else if (simulate_cmd->parsed()) {
      cmd_simulate(config, out, protocol, options);
    } else if (fit_cmd->parsed()) {
      cmd_fit(have_config ? &config : nullptr, out, model, input, t1_resonant, kappa, fit_resonator,
              pulse_duration);
    } else if (reproduce_cmd->parsed()) {
      cmd_reproduce(config, out, options);
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
