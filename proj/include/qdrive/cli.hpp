#pragma once

// Command-line front end: configuration ingestion, command dispatch and file
// emission. Config files and flags share one flat key space; flag names are
// the keys with '_' replaced by '-'.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdrive/analysis.hpp"
#include "qdrive/engine.hpp"
#include "qdrive/errors.hpp"
#include "qdrive/io.hpp"
#include "qdrive/lattice_map.hpp"
#include "qdrive/observables.hpp"
#include "qdrive/plot.hpp"
#include "qdrive/protocols.hpp"

namespace qdrive::cli {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// Invalid configuration; maps to exit status 2.
class UsageError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class Command { Evolve, ScanDuration, ScanEta, ScanDt, MinTime, Resources, Qsl, Lattice };

inline const std::vector<std::pair<Command, std::string>>& command_names() {
  static const std::vector<std::pair<Command, std::string>> names = {
      {Command::Evolve, "evolve"},       {Command::ScanDuration, "scan-duration"}, {Command::ScanEta, "scan-eta"},
      {Command::ScanDt, "scan-dt"},      {Command::MinTime, "min-time"},           {Command::Resources, "resources"},
      {Command::Qsl, "qsl"},             {Command::Lattice, "lattice"}};
  return names;
}

inline std::string to_string(Command c) {
  for (const auto& [k, n] : command_names()) {
    if (k == c) return n;
  }
  return "?";
}

inline Command parse_command(const std::string& s) {
  for (const auto& [k, n] : command_names()) {
    if (n == s) return k;
  }
  std::string all;
  for (const auto& p : command_names()) all += (all.empty() ? "" : ", ") + p.second;
  throw UsageError("unknown command '" + s + "' (expected one of: " + all + ")");
}

// ---------------------------------------------------------------------------
// Key registry

enum class KeyType { Number, Integer, Bool, String, NumberList };

struct KeySpec {
  std::string name;
  KeyType type;
  std::string help;
};

inline const std::vector<KeySpec>& key_registry() {
  static const std::vector<KeySpec> keys = {
      {"command", KeyType::String, "command to run"},
      {"protocol", KeyType::String, "protocol family"},
      {"omega", KeyType::Number, "coupling omega"},
      {"alpha", KeyType::Number, "power-law exponent"},
      {"delta", KeyType::Number, "sinusoid amplitude of linear-sin"},
      {"eta_sq", KeyType::Number, "adiabaticity parameter eta^2 of rc-eta"},
      {"epsilon", KeyType::Number, "target infidelity scale of roland-cerf"},
      {"T", KeyType::Number, "duration in natural units"},
      {"gamma_m", KeyType::Number, "finite kick amplitude of composite"},
      {"gamma0", KeyType::Number, "sweep amplitude"},
      {"counterdiabatic", KeyType::Bool, "add the counterdiabatic sigma_y term"},
      {"omega_correction", KeyType::Bool, "superadiabatic coupling correction"},
      {"printed_form", KeyType::Bool, "alternative superadiabatic-linear detuning"},
      {"target", KeyType::Number, "fidelity target"},
      {"t_min", KeyType::Number, "smallest duration of the scan"},
      {"t_max", KeyType::Number, "largest duration of the scan"},
      {"t_step", KeyType::Number, "duration step of the scan"},
      {"resolution", KeyType::Number, "grid step of the minimum-time search"},
      {"eta_sq_list", KeyType::NumberList, "eta^2 values"},
      {"dt_min", KeyType::Number, "smallest relative duration error"},
      {"dt_max", KeyType::Number, "largest relative duration error"},
      {"dt_step", KeyType::Number, "step of the relative duration error"},
      {"axis", KeyType::String, "coupling axis: initial, peak or average"},
      {"grid", KeyType::NumberList, "explicit coupling grid"},
      {"grid_min", KeyType::Number, "smallest coupling of the log grid"},
      {"grid_max", KeyType::Number, "largest coupling of the log grid"},
      {"grid_points", KeyType::Integer, "points of the log grid"},
      {"lz_target", KeyType::Number, "fidelity target of the Landau-Zener reference"},
      {"v0", KeyType::Number, "lattice depth in recoil energies"},
      {"q", KeyType::Number, "quasimomentum in units of hbar k"},
      {"force", KeyType::Number, "lattice force"},
      {"d_l", KeyType::Number, "lattice constant"},
      {"validity_bound", KeyType::Number, "depth above which the two-level model is flagged"},
      {"rel_tol", KeyType::Number, "integrator relative tolerance"},
      {"max_step_tau", KeyType::Number, "integrator step cap in tau"},
      {"samples", KeyType::Integer, "trajectory sample count"},
      {"out", KeyType::String, "output directory"},
      {"plot", KeyType::Bool, "also write SVG plots"},
      {"jobs", KeyType::Integer, "worker threads (default QDRIVE_JOBS)"},
  };
  return keys;
}

inline const KeySpec* find_key(const std::string& name) {
  for (const auto& k : key_registry()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

inline std::string flag_name(const std::string& key) {
  if (key.size() == 1) return "-" + key;
  std::string f = "--" + key;
  for (char& c : f) {
    if (c == '_') c = '-';
  }
  return f;
}

// ---------------------------------------------------------------------------
// Families and per-command key sets

struct FamilyKeys {
  std::string name;
  std::vector<std::string> required;
  std::vector<std::string> optional;
  bool fixed_duration = false;
  bool smooth = true;
};

inline const std::vector<FamilyKeys>& families() {
  static const std::vector<FamilyKeys> f = {
      {"linear-lz", {"omega", "T"}, {"counterdiabatic"}},
      {"power-law", {"alpha", "omega", "T"}, {"counterdiabatic"}},
      {"linear-sin", {"delta", "omega", "T"}, {"counterdiabatic"}},
      {"tangent", {"omega", "T"}, {"counterdiabatic"}},
      {"roland-cerf", {"epsilon", "omega"}, {"counterdiabatic"}, true},
      {"rc-eta", {"eta_sq", "omega", "T"}, {"counterdiabatic"}},
      {"composite", {"omega"}, {"gamma_m", "gamma0"}, true, false},
      {"superadiabatic-linear", {"omega", "T"}, {"omega_correction", "printed_form"}, false, false},
      {"superadiabatic-tangent", {"omega", "T"}, {"omega_correction"}, false, false},
  };
  return f;
}

inline const FamilyKeys& family_keys(const std::string& name) {
  for (const auto& f : families()) {
    if (f.name == name) return f;
  }
  std::string all;
  for (const auto& f : families()) all += (all.empty() ? "" : ", ") + f.name;
  throw UsageError("unknown protocol '" + name + "' (expected one of: " + all + ")");
}

inline const std::vector<std::string>& common_keys() {
  static const std::vector<std::string> k = {"command", "out", "plot", "jobs", "rel_tol", "max_step_tau", "samples"};
  return k;
}

struct CommandKeys {
  bool uses_protocol;
  /// Family duration is swept by the command, so T must not be given.
  bool sweeps_duration;
  std::vector<std::string> required;
  std::vector<std::string> optional;
  std::vector<std::string> allowed_families;
};

inline CommandKeys command_keys(Command c) {
  switch (c) {
    case Command::Evolve: return {true, false, {"protocol"}, {}, {}};
    case Command::ScanDuration: return {true, true, {"protocol"}, {"t_min", "t_max", "t_step"}, {}};
    case Command::MinTime: return {true, true, {"protocol", "target"}, {"t_min", "t_max", "resolution"}, {}};
    case Command::ScanEta:
      return {false, false, {"omega"}, {"eta_sq_list", "t_min", "t_max", "t_step", "target"}, {}};
    case Command::ScanDt:
      return {true,
              false,
              {"protocol"},
              {"dt_min", "dt_max", "dt_step"},
              {"superadiabatic-linear", "superadiabatic-tangent"}};
    case Command::Resources:
      return {false,
              false,
              {"protocol"},
              {"axis", "grid", "grid_min", "grid_max", "grid_points", "lz_target"},
              {"linear-lz", "superadiabatic-linear", "superadiabatic-tangent"}};
    case Command::Qsl: return {false, false, {"omega"}, {"gamma0", "gamma_m"}, {}};
    case Command::Lattice: return {false, false, {}, {"v0", "q", "gamma0", "force", "d_l", "T", "validity_bound"}, {}};
  }
  return {};
}

// ---------------------------------------------------------------------------
// RunConfig

struct RunConfig {
  Command command = Command::Evolve;
  /// Validated key/value set, including defaults-free user input only.
  json values = json::object();
  IntegratorConfig integrator{};
  std::filesystem::path out_dir = ".";
  bool plot = false;
  int jobs = 1;

  bool has(const std::string& k) const { return values.contains(k); }
  double num(const std::string& k) const { return values.at(k).get<double>(); }
  double num_or(const std::string& k, double d) const { return has(k) ? num(k) : d; }
  int integer_or(const std::string& k, int d) const { return has(k) ? values.at(k).get<int>() : d; }
  bool flag_or(const std::string& k, bool d) const { return has(k) ? values.at(k).get<bool>() : d; }
  std::string str(const std::string& k) const { return values.at(k).get<std::string>(); }
  std::string str_or(const std::string& k, const std::string& d) const { return has(k) ? str(k) : d; }
  std::vector<double> list(const std::string& k) const { return values.at(k).get<std::vector<double>>(); }
};

namespace detail {

inline void check_type(const std::string& key, const json& v) {
  const KeySpec* spec = find_key(key);
  bool ok = false;
  switch (spec->type) {
    case KeyType::Number: ok = v.is_number(); break;
    case KeyType::Integer: ok = v.is_number_integer(); break;
    case KeyType::Bool: ok = v.is_boolean(); break;
    case KeyType::String: ok = v.is_string(); break;
    case KeyType::NumberList:
      ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
      break;
  }
  if (!ok) throw UsageError("config key '" + key + "' has the wrong type: " + v.dump());
}

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& e : v) s += (s.empty() ? "" : ", ") + e;
  return s;
}

}  // namespace detail

/// Rejects keys that are not part of the registry, listing all of them.
inline void reject_unknown_keys(const json& j, const std::string& origin) {
  if (!j.is_object()) throw UsageError(origin + ": configuration must be a JSON object");
  std::vector<std::string> unknown;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!find_key(it.key())) unknown.push_back(it.key());
  }
  if (!unknown.empty()) throw UsageError(origin + ": unknown config keys: " + detail::join(unknown));
}

/// Reads a JSON config file; an empty file is an empty config.
inline json load_config_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw UsageError("config file not found: " + path.string());
  const std::string text = io::read_file(path);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  reject_unknown_keys(j, path.string());
  return j;
}

/// Merges file values with overrides (overrides win) and validates the result
/// against the command and protocol family.
inline RunConfig make_config(const json& file_values, const json& overrides) {
  reject_unknown_keys(file_values, "config");
  reject_unknown_keys(overrides, "command line");
  json merged = file_values;
  for (auto it = overrides.begin(); it != overrides.end(); ++it) merged[it.key()] = it.value();
  for (auto it = merged.begin(); it != merged.end(); ++it) detail::check_type(it.key(), it.value());

  if (!merged.contains("command")) throw UsageError("no command given");
  RunConfig cfg;
  cfg.command = parse_command(merged["command"].get<std::string>());
  const CommandKeys ck = command_keys(cfg.command);

  std::set<std::string> allowed(common_keys().begin(), common_keys().end());
  allowed.insert(ck.required.begin(), ck.required.end());
  allowed.insert(ck.optional.begin(), ck.optional.end());
  std::vector<std::string> required = ck.required;

  if (ck.uses_protocol && merged.contains("protocol")) {
    const std::string fam = merged["protocol"].get<std::string>();
    const FamilyKeys& fk = family_keys(fam);
    if (!ck.allowed_families.empty() &&
        std::find(ck.allowed_families.begin(), ck.allowed_families.end(), fam) == ck.allowed_families.end()) {
      throw UsageError("command " + to_string(cfg.command) + " does not accept protocol " + fam +
                       " (expected one of: " + detail::join(ck.allowed_families) + ")");
    }
    if (ck.sweeps_duration && fk.fixed_duration) {
      throw UsageError("protocol " + fam + " has a fixed duration and cannot be used with " + to_string(cfg.command));
    }
    for (const auto& k : fk.required) {
      if (ck.sweeps_duration && k == "T") continue;
      allowed.insert(k);
      required.push_back(k);
    }
    allowed.insert(fk.optional.begin(), fk.optional.end());
  }
  if (cfg.command == Command::Resources && merged.contains("protocol")) {
    family_keys(merged["protocol"].get<std::string>());
    const auto& fams = ck.allowed_families;
    const std::string fam = merged["protocol"].get<std::string>();
    if (std::find(fams.begin(), fams.end(), fam) == fams.end()) {
      throw UsageError("command resources does not accept protocol " + fam + " (expected one of: " +
                       detail::join(fams) + ")");
    }
  }

  std::vector<std::string> extra;
  for (auto it = merged.begin(); it != merged.end(); ++it) {
    if (!allowed.count(it.key())) extra.push_back(it.key());
  }
  if (!extra.empty()) {
    std::string ctx = to_string(cfg.command);
    if (ck.uses_protocol && merged.contains("protocol")) ctx += " with protocol " + merged["protocol"].get<std::string>();
    throw UsageError("keys not accepted by " + ctx + ": " + detail::join(extra));
  }
  std::vector<std::string> missing;
  for (const auto& k : required) {
    if (!merged.contains(k)) missing.push_back(k);
  }
  if (!missing.empty()) throw UsageError("missing required keys for " + to_string(cfg.command) + ": " + detail::join(missing));

  cfg.values = merged;
  cfg.integrator.rel_tol = cfg.num_or("rel_tol", cfg.integrator.rel_tol);
  cfg.integrator.max_step_tau = cfg.num_or("max_step_tau", cfg.integrator.max_step_tau);
  cfg.integrator.sample_count = cfg.integer_or("samples", cfg.integrator.sample_count);
  try {
    cfg.integrator.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  cfg.out_dir = cfg.str_or("out", ".");
  cfg.plot = cfg.flag_or("plot", false);
  cfg.jobs = cfg.integer_or("jobs", default_jobs());
  if (cfg.jobs < 1) throw UsageError("jobs must be >= 1");
  if (cfg.has("axis")) {
    const std::string a = cfg.str("axis");
    if (a != "initial" && a != "peak" && a != "average") throw UsageError("axis must be initial, peak or average");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Schedule construction

/// Schedule of the configured family for duration T (ignored by fixed-duration families).
inline ControlSchedule build_schedule(const RunConfig& cfg, std::optional<double> duration = std::nullopt) {
  const std::string fam = cfg.str("protocol");
  const double t = duration ? *duration : cfg.num_or("T", 0.0);
  const double w = cfg.num("omega");
  ControlSchedule s;
  if (fam == "linear-lz") {
    s = linear_lz(w, t);
  } else if (fam == "power-law") {
    s = power_law(cfg.num("alpha"), w, t);
  } else if (fam == "linear-sin") {
    s = linear_plus_sin(cfg.num("delta"), w, t);
  } else if (fam == "tangent") {
    s = tangent(w, t);
  } else if (fam == "roland-cerf") {
    s = roland_cerf(cfg.num("epsilon"), w);
  } else if (fam == "rc-eta") {
    const double e2 = cfg.num("eta_sq");
    if (!(e2 > 0.0)) throw InvalidArgument("eta_sq must be positive");
    s = rc_eta(std::sqrt(e2), w, t);
  } else if (fam == "composite") {
    std::optional<double> gm;
    if (cfg.has("gamma_m")) gm = cfg.num("gamma_m");
    s = composite_pulse(w, gm, cfg.num_or("gamma0", kGamma0));
  } else {
    SuperadiabaticOptions o;
    o.omega_correction = cfg.flag_or("omega_correction", true);
    o.printed_linear_form = cfg.flag_or("printed_form", false);
    s = fam == "superadiabatic-linear" ? superadiabatic_linear(w, t, o) : superadiabatic_tangent(w, t, o);
  }
  if (cfg.flag_or("counterdiabatic", false)) s = counterdiabatic_construct(s);
  return s;
}

inline ScheduleFactory schedule_factory(const RunConfig& cfg) {
  return [cfg](double t) { return build_schedule(cfg, t); };
}

// ---------------------------------------------------------------------------
// Running

struct RunResult {
  std::vector<std::filesystem::path> files;
  /// Short human-readable result printed to stdout.
  std::string summary;
};

namespace detail {

class Emitter {
 public:
  explicit Emitter(const RunConfig& cfg) : cfg_(cfg) {}

  void file(const std::string& name, const std::string& content) {
    const auto path = cfg_.out_dir / name;
    io::write_file_atomic(path, content);
    files_.push_back(path);
  }

  void svg(const std::string& name, const std::vector<plot::Line>& lines, const plot::Axes& axes) {
    if (cfg_.plot) file(name, plot::svg(lines, axes));
  }

  std::vector<std::filesystem::path> files() const { return files_; }

 private:
  const RunConfig& cfg_;
  std::vector<std::filesystem::path> files_;
};

inline plot::Line scan_line(const std::string& name, const std::vector<ScanRecord>& rows, bool by_value) {
  plot::Line l{name, {}, {}};
  for (const auto& r : rows) {
    l.x.push_back(by_value ? r.value : r.duration);
    l.y.push_back(r.final_fidelity);
  }
  return l;
}

inline std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

inline RunResult run(const RunConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  const std::string started_at = detail::iso_utc_now();
  detail::Emitter out(cfg);
  ScanOptions scan{cfg.integrator, cfg.jobs};
  std::string summary;

  switch (cfg.command) {
    case Command::Evolve: {
      const ControlSchedule s = build_schedule(cfg);
      const Trajectory traj = evolve(s, cfg.integrator);
      out.file("trajectory.csv", io::trajectory_csv(traj, s));
      out.file("waveform.csv", io::waveform_csv(s));
      const auto fid = fidelity_series(traj, s);
      const auto pd = diabatic_probability_series(traj);
      out.svg("trajectory.svg", {{"F(tau)", fid.taus, fid.values}, {"P_diab(tau)", pd.taus, pd.values}},
              {s.label, "tau", "probability"});
      summary = "final_fidelity " + io::number(fid.values.back());
      break;
    }
    case Command::ScanDuration: {
      const auto grid = uniform_grid(cfg.num_or("t_min", 0.1), cfg.num_or("t_max", 20.0), cfg.num_or("t_step", 0.1));
      auto rows = fidelity_vs_duration(schedule_factory(cfg), grid, scan);
      out.file("scan.csv", io::scan_csv(rows));
      out.svg("scan.svg", {detail::scan_line(cfg.str("protocol"), rows, false)}, {"final fidelity", "T", "F_fin"});
      summary = std::to_string(rows.size()) + " durations";
      break;
    }
    case Command::MinTime: {
      MinDurationSearch search;
      search.t_min = cfg.num_or("t_min", search.t_min);
      search.t_max = cfg.num_or("t_max", search.t_max);
      search.resolution = cfg.num_or("resolution", search.resolution);
      const double target = cfg.num("target");
      const double t = min_duration_for_fidelity(schedule_factory(cfg), target, search, scan);
      io::CsvWriter w({"protocol", "target", "min_duration"});
      w.row({cfg.str("protocol"), io::number(target), io::number(t)});
      out.file("min_time.csv", w.str());
      summary = "min_duration " + io::number(t);
      break;
    }
    case Command::ScanEta: {
      const std::vector<double> etas = cfg.has("eta_sq_list") ? cfg.list("eta_sq_list")
                                                              : std::vector<double>{0.1, 0.2, 0.235294, 0.249};
      const auto grid = uniform_grid(cfg.num_or("t_min", 0.05), cfg.num_or("t_max", 12.0), cfg.num_or("t_step", 0.05));
      const auto res = eta_scan(etas, cfg.num("omega"), grid, cfg.num_or("target", 0.9), scan);
      out.file("scan.csv", io::scan_csv(res.surface));
      io::CsvWriter w({"eta_sq", "t_target"});
      for (std::size_t i = 0; i < etas.size(); ++i) {
        w.row({io::number(etas[i]), res.t_target[i] ? io::number(*res.t_target[i]) : ""});
      }
      out.file("t_target.csv", w.str());
      std::vector<plot::Line> lines;
      for (std::size_t i = 0; i < etas.size(); ++i) {
        std::vector<ScanRecord> block(res.surface.begin() + static_cast<std::ptrdiff_t>(i * grid.size()),
                                      res.surface.begin() + static_cast<std::ptrdiff_t>((i + 1) * grid.size()));
        lines.push_back(detail::scan_line("eta^2=" + io::number(etas[i]), block, false));
      }
      out.svg("scan.svg", lines, {"rc-eta final fidelity", "T", "F_fin"});
      summary = std::to_string(etas.size()) + " eta^2 values";
      break;
    }
    case Command::ScanDt: {
      const auto grid = uniform_grid(cfg.num_or("dt_min", 0.0), cfg.num_or("dt_max", 1.0), cfg.num_or("dt_step", 0.1));
      const auto kind = cfg.str("protocol") == "superadiabatic-linear" ? SuperadiabaticKind::Linear
                                                                        : SuperadiabaticKind::Tangent;
      const auto rows = duration_mismatch_scan(cfg.num("omega"), cfg.num("T"), grid,
                                               cfg.flag_or("omega_correction", true), kind, scan);
      out.file("scan.csv", io::scan_csv(rows));
      out.svg("scan.svg", {detail::scan_line(cfg.str("protocol"), rows, true)}, {"duration mismatch", "dT_rel", "F_fin"});
      summary = std::to_string(rows.size()) + " mismatch values";
      break;
    }
    case Command::Resources: {
      const std::string fam = cfg.str("protocol");
      const ResourceFamily rf = fam == "linear-lz"               ? ResourceFamily::LandauZener
                                : fam == "superadiabatic-linear" ? ResourceFamily::SuperadiabaticLinear
                                                                 : ResourceFamily::SuperadiabaticTangent;
      const std::string a = cfg.str_or("axis", "peak");
      const CouplingAxis axis = a == "initial" ? CouplingAxis::Initial
                                : a == "peak"  ? CouplingAxis::Peak
                                               : CouplingAxis::Average;
      const std::vector<double> grid =
          cfg.has("grid") ? cfg.list("grid")
                          : log_grid(cfg.num_or("grid_min", 0.1), cfg.num_or("grid_max", 5.0), cfg.integer_or("grid_points", 12));
      ResourceOptions ro;
      ro.lz_target = cfg.num_or("lz_target", ro.lz_target);
      ro.scan = scan;
      const auto pts = resource_curves(rf, axis, grid, ro);
      out.file("resources.csv", io::resource_csv(pts, axis));
      plot::Line l{fam, {}, {}};
      for (const auto& p : pts) {
        l.x.push_back(p.coupling_axis_value);
        l.y.push_back(p.min_duration);
      }
      out.svg("resources.svg", {l}, {"minimal duration", std::string(to_string(axis)) + " coupling", "T", true, true});
      summary = std::to_string(pts.size()) + " resource points";
      break;
    }
    case Command::Qsl: {
      const double w = cfg.num("omega");
      const double g0 = cfg.num_or("gamma0", kGamma0);
      double t0 = 0.0;
      if (cfg.has("gamma_m")) {
        const double gm = cfg.num("gamma_m");
        if (!(gm > 0.0)) throw InvalidArgument("gamma_m must be positive");
        t0 = std::numbers::pi / (4.0 * gm);
      }
      const double t = qsl_time(w, g0, t0);
      io::CsvWriter csv({"omega", "gamma0", "t0", "qsl_time"});
      csv.row({io::number(w), io::number(g0), io::number(t0), io::number(t)});
      out.file("qsl.csv", csv.str());
      summary = "qsl_time " + io::number(t);
      break;
    }
    case Command::Lattice: {
      io::CsvWriter csv({"quantity", "value"});
      const double g0 = cfg.num_or("gamma0", kGamma0);
      if (cfg.has("v0")) {
        const auto c = lattice::depth_to_coupling(cfg.num("v0"), cfg.num_or("validity_bound", lattice::kDefaultValidityBound));
        csv.row({"v0", io::number(cfg.num("v0"))});
        csv.row({"omega", io::number(c.omega)});
        csv.row({"validity_warning", c.validity_warning ? "1" : "0"});
        summary += "omega " + io::number(c.omega) + (c.validity_warning ? " (outside two-level validity)" : "") + "\n";
      }
      if (cfg.has("q")) {
        const double g = lattice::quasimomentum_to_gamma(cfg.num("q"), g0);
        csv.row({"q", io::number(cfg.num("q"))});
        csv.row({"gamma", io::number(g)});
        summary += "gamma " + io::number(g) + "\n";
      }
      if (cfg.has("force")) {
        const double tb = lattice::bloch_period(cfg.num("force"), cfg.num_or("d_l", 1.0));
        csv.row({"bloch_period", io::number(tb)});
        summary += "bloch_period " + io::number(tb) + "\n";
      }
      if (cfg.has("T")) {
        const double sec = lattice::natural_time_to_seconds(cfg.num("T"));
        csv.row({"T", io::number(cfg.num("T"))});
        csv.row({"seconds", io::number(sec)});
        summary += "seconds " + io::number(sec) + "\n";
      }
      if (summary.empty()) throw UsageError("lattice: give at least one of v0, q, force, T");
      summary.pop_back();
      out.file("lattice.csv", csv.str());
      break;
    }
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  json manifest;
  manifest["tool"] = "qdrive";
  manifest["version"] = kVersion;
  manifest["command"] = to_string(cfg.command);
  manifest["config"] = cfg.values;
  manifest["jobs"] = cfg.jobs;
  manifest["started_at"] = started_at;
  manifest["wall_time_seconds"] = wall;
  json files = json::array();
  for (const auto& f : out.files()) files.push_back(f.filename().string());
  manifest["files"] = files;
  io::write_file_atomic(cfg.out_dir / "manifest.json", manifest.dump(2) + "\n");

  RunResult r{out.files(), summary};
  r.files.push_back(cfg.out_dir / "manifest.json");
  return r;
}

// ---------------------------------------------------------------------------
// Entry point

inline json error_record(int status, const std::string& kind, const std::string& message) {
  return json{{"status", "error"}, {"exit_code", status}, {"kind", kind}, {"message", message}};
}

/// Parses argv, runs the command and returns the process exit status:
/// 0 success, 1 numerical failure, 2 usage error. Errors are reported as one
/// JSON object on `err`.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"qdrive: two-level sweep protocol simulator", "qdrive"};
  app.set_version_flag("--version", kVersion);
  std::string command;
  std::string config_path;
  app.add_option("command", command, "one of: evolve, scan-duration, scan-eta, scan-dt, min-time, resources, qsl, lattice");
  app.add_option("--config", config_path, "JSON config file; flags override its values");

  std::map<std::string, std::string> scalars;
  std::map<std::string, std::vector<double>> lists;
  std::map<std::string, bool> bools;
  std::map<std::string, CLI::Option*> opts;
  for (const auto& k : key_registry()) {
    if (k.name == "command") continue;
    const std::string f = flag_name(k.name);
    switch (k.type) {
      case KeyType::Bool:
        bools[k.name] = false;
        opts[k.name] = app.add_flag(f + "{true}," + "!--no-" + f.substr(2), bools[k.name], k.help);
        break;
      case KeyType::NumberList:
        lists[k.name];
        opts[k.name] = app.add_option(f, lists[k.name], k.help)->delimiter(',');
        break;
      default:
        scalars[k.name];
        opts[k.name] = app.add_option(f, scalars[k.name], k.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_record(2, "usage", e.what()).dump() << "\n";
    return 2;
  }

  try {
    json file_values = config_path.empty() ? json::object() : load_config_file(config_path);
    json overrides = json::object();
    if (!command.empty()) overrides["command"] = command;
    for (const auto& [key, opt] : opts) {
      if (opt->count() == 0) continue;
      const KeySpec* spec = find_key(key);
      switch (spec->type) {
        case KeyType::Bool: overrides[key] = bools[key]; break;
        case KeyType::NumberList: overrides[key] = lists[key]; break;
        case KeyType::String: overrides[key] = scalars[key]; break;
        case KeyType::Integer: {
          std::size_t pos = 0;
          long v = 0;
          try {
            v = std::stol(scalars[key], &pos);
          } catch (const std::exception&) {
            pos = 0;
          }
          if (pos == 0 || pos != scalars[key].size()) throw UsageError(flag_name(key) + " expects an integer");
          overrides[key] = v;
          break;
        }
        case KeyType::Number: {
          std::size_t pos = 0;
          double v = 0.0;
          try {
            v = std::stod(scalars[key], &pos);
          } catch (const std::exception&) {
            pos = 0;
          }
          if (pos == 0 || pos != scalars[key].size()) throw UsageError(flag_name(key) + " expects a number");
          overrides[key] = v;
          break;
        }
      }
    }
    const RunConfig cfg = make_config(file_values, overrides);
    const RunResult r = run(cfg);
    if (!r.summary.empty()) out << r.summary << "\n";
    return 0;
  } catch (const InvalidArgument& e) {
    err << error_record(2, "usage", e.what()).dump() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    json rec = error_record(1, "numerical", e.what());
    rec["tau"] = e.tau();
    err << rec.dump() << "\n";
    return 1;
  } catch (const TargetUnreachedError& e) {
    json rec = error_record(1, "target_unreached", e.what());
    rec["best_fidelity"] = e.best_fidelity();
    rec["best_duration"] = e.best_duration();
    err << rec.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << error_record(1, "error", e.what()).dump() << "\n";
    return 1;
  }
}

}  // namespace qdrive::cli
