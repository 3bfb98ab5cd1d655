#pragma once

// Scenario configuration: an INI-like text format.
//
//   file     := { line }
//   line     := blank | comment | section | entry
//   comment  := ('#' | ';') text
//   section  := '[' name ']'
//   entry    := key '=' value          (value may be a comma-separated list)
//
// Keys outside any section belong to [run]. Keys are case sensitive.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sscool/error.hpp"
#include "sscool/params.hpp"
#include "sscool/protocol.hpp"

namespace sscool {

enum class Scenario { fig_timerate, fig_parabola, fig_dynamics, fig_chain, pulsed, robustness, custom };

inline const std::vector<std::pair<Scenario, std::string>>& scenario_names() {
  static const std::vector<std::pair<Scenario, std::string>> names = {
      {Scenario::fig_timerate, "fig-timerate"}, {Scenario::fig_parabola, "fig-parabola"},
      {Scenario::fig_dynamics, "fig-dynamics"}, {Scenario::fig_chain, "fig-chain"},
      {Scenario::pulsed, "pulsed"},             {Scenario::robustness, "robustness"},
      {Scenario::custom, "custom"},
  };
  return names;
}

inline std::string to_string(Scenario s) {
  for (const auto& [k, name] : scenario_names()) {
    if (k == s) return name;
  }
  return "?";
}

inline std::optional<Scenario> parse_scenario(std::string_view name) {
  for (const auto& [k, n] : scenario_names()) {
    if (n == name) return k;
  }
  return std::nullopt;
}

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct IniEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct IniDocument {
  std::map<std::string, std::vector<IniEntry>> sections;
  std::vector<std::string> errors;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

inline std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_integer(const std::string& s) {
  long long v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> parse_unsigned(const std::string& s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return v;
}

inline std::vector<double> linspace(double a, double b, int points) {
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i) out[i] = points == 1 ? a : a + (b - a) * i / (points - 1);
  return out;
}

}  // namespace detail

inline IniDocument parse_ini(std::string_view text) {
  IniDocument doc;
  std::string section = "run";
  std::set<std::string> seen_keys;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        doc.errors.push_back(where + "malformed section header '" + line + "'");
        continue;
      }
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      doc.sections[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      doc.errors.push_back(where + "expected 'key = value', got '" + line + "'");
      continue;
    }
    IniEntry e{detail::trim(std::string_view(line).substr(0, eq)), detail::trim(std::string_view(line).substr(eq + 1)),
               line_no};
    if (e.key.empty()) {
      doc.errors.push_back(where + "empty key");
      continue;
    }
    if (!seen_keys.insert(section + "." + e.key).second) {
      doc.errors.push_back(where + "duplicate key " + section + "." + e.key);
      continue;
    }
    doc.sections[section].push_back(std::move(e));
  }
  return doc;
}

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct SolverSettings {
  std::vector<int> cutoffs;
  double dt = 0.0;  // 0: TimeGrid::default_dt
  double t_end = 0.0;
  double sample_every = 0.0;
  int trajectories = 0;
  unsigned threads = 0;  // 0: hardware concurrency
  int localization_depth = 3;
  double truncation_threshold = 1e-4;
  bool numeric = true;
};

struct ProtocolSettings {
  std::vector<int> targets{2, 1, 1};
  GateModel gate = GateModel::stark_shift;
  double initial_mean_n = 2.0;
};

struct ChainSettings {
  int n_ions = 3;
  int addressed_ion = 0;
  double omega_c_offset = 0.15;  // Omega_c = nu_2 / 2 + offset unless Omega_c is given
};

struct ScenarioConfig {
  Scenario scenario = Scenario::custom;
  PhysicalParams params;
  std::optional<SweepAxis> sweep;
  std::optional<SweepAxis> series;  // outer loop over a second parameter
  SolverSettings solver;
  ProtocolSettings protocol;
  ChainSettings chain;
  std::uint64_t master_seed = 1;
  std::string output;
  bool omega_prescription = false;  // Omega^2 = Gamma nu eta at every point
  bool chain_omega_c_from_modes = false;
};

inline const std::vector<std::string>& param_names() {
  static const std::vector<std::string> names = {"Omega", "Omega_c", "Delta", "delta", "Gamma",
                                                 "Gamma1", "Gamma2", "nu", "eta"};
  return names;
}

inline bool is_param_name(const std::string& name) {
  const auto& n = param_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

/// Sets a parameter by name; "Gamma" splits symmetrically.
inline void set_param(PhysicalParams& p, const std::string& name, double v) {
  if (name == "Omega") p.Omega = v;
  else if (name == "Omega_c") p.Omega_c = v;
  else if (name == "Delta") p.Delta = v;
  else if (name == "delta") p.delta = v;
  else if (name == "Gamma") p.set_Gamma(v);
  else if (name == "Gamma1") p.Gamma1 = v;
  else if (name == "Gamma2") p.Gamma2 = v;
  else if (name == "nu") p.nu = v;
  else if (name == "eta") p.eta = v;
  else throw std::invalid_argument("unknown parameter " + name);
}

inline bool is_sweep_scenario(Scenario s) {
  return s == Scenario::fig_timerate || s == Scenario::fig_parabola || s == Scenario::robustness ||
         s == Scenario::custom;
}

/// Defaults taken from the figure captions and our documented choices.
inline ScenarioConfig scenario_defaults(Scenario s) {
  ScenarioConfig c;
  c.scenario = s;
  PhysicalParams& p = c.params;
  switch (s) {
    case Scenario::fig_parabola:
      p.set_Gamma(10.0);
      p.Omega = 0.1;
      p.Omega_c = 0.5;
      p.eta = 0.05;
      c.sweep = SweepAxis{"Omega_c", detail::linspace(0.35, 0.65, 25)};
      c.series = SweepAxis{"eta", {0.05, 0.1}};
      c.solver.cutoffs = {10};
      break;
    case Scenario::fig_timerate:
      p.set_Gamma(10.0);
      p.Delta = 10.0;
      p.Omega_c = 0.5;
      p.eta = 0.05;
      c.omega_prescription = true;
      c.sweep = SweepAxis{"eta", {0.02, 0.05, 0.1}};
      c.solver.cutoffs = {6};
      break;
    case Scenario::robustness:
      p.set_Gamma(10.0);
      p.Delta = 10.0;
      p.Omega_c = 0.5;
      p.eta = 0.05;
      c.omega_prescription = true;
      c.sweep = SweepAxis{"Omega_c", {0.45, 0.5, 0.55}};
      c.solver.cutoffs = {8};
      break;
    case Scenario::fig_dynamics:
      p.set_Gamma(6.0);
      p.Omega = 1.0;
      p.Omega_c = 0.5;
      p.eta = 0.1;
      c.solver.cutoffs = {8};
      c.solver.trajectories = 500;
      c.solver.t_end = 400.0;
      c.solver.sample_every = 5.0;
      break;
    case Scenario::fig_chain:
      p.set_Gamma(6.0);
      p.Omega = 1.0;
      p.eta = 0.1;
      c.chain_omega_c_from_modes = true;
      c.solver.cutoffs = {7, 6, 5};
      c.solver.trajectories = 100;
      c.solver.t_end = 600.0;
      c.solver.sample_every = 10.0;
      c.solver.dt = 0.2;
      c.solver.localization_depth = 5;
      break;
    case Scenario::pulsed:
      p.set_Gamma(1.0);
      p.Omega = 0.5;
      p.eta = 0.05;
      c.solver.cutoffs = {25};
      break;
    case Scenario::custom:
      c.solver.cutoffs = {10};
      c.solver.numeric = false;
      break;
  }
  return c;
}

/// Parses and fully validates a configuration; every violation is collected
/// into a single ConfigError.
inline ScenarioConfig validate_config(std::string_view text) {
  IniDocument doc = parse_ini(text);
  std::vector<std::string> errors = doc.errors;
  const auto find = [&](const std::string& section, const std::string& key) -> const IniEntry* {
    auto it = doc.sections.find(section);
    if (it == doc.sections.end()) return nullptr;
    for (const auto& e : it->second) {
      if (e.key == key) return &e;
    }
    return nullptr;
  };
  const auto where = [](const IniEntry& e, const std::string& section) {
    return "line " + std::to_string(e.line) + ": " + section + "." + e.key;
  };

  // Section and key vocabulary.
  static const std::map<std::string, std::set<std::string>> allowed = {
      {"run", {"scenario", "master_seed", "output"}},
      {"params", {"Omega", "Omega_c", "Delta", "delta", "Gamma", "Gamma1", "Gamma2", "nu", "eta"}},
      {"sweep", {"axis", "start", "stop", "points", "values"}},
      {"series", {}},
      {"solver",
       {"cutoffs", "dt", "t_end", "sample_every", "trajectories", "threads", "localization_depth",
        "truncation_threshold", "numeric"}},
      {"protocol", {"targets", "gate", "initial_mean_n"}},
      {"chain", {"n_ions", "addressed_ion", "omega_c_offset"}},
  };
  for (const auto& [section, entries] : doc.sections) {
    auto it = allowed.find(section);
    if (it == allowed.end()) {
      errors.push_back("unknown section [" + section + "]");
      continue;
    }
    if (section == "series") continue;
    for (const auto& e : entries) {
      if (!it->second.count(e.key)) errors.push_back(where(e, section) + ": unknown key");
    }
  }

  const IniEntry* scen = find("run", "scenario");
  std::string valid_names;
  for (const auto& [k, n] : scenario_names()) valid_names += (valid_names.empty() ? "" : ", ") + n;
  if (!scen) {
    errors.push_back("run.scenario is required (one of: " + valid_names + ")");
    throw ConfigError(errors);
  }
  const auto kind = parse_scenario(scen->value);
  if (!kind) {
    errors.push_back(where(*scen, "run") + ": unknown scenario '" + scen->value + "' (valid: " + valid_names + ")");
    throw ConfigError(errors);
  }
  ScenarioConfig c = scenario_defaults(*kind);

  const auto number = [&](const IniEntry& e, const std::string& section) -> std::optional<double> {
    auto v = detail::parse_number(e.value);
    if (!v) errors.push_back(where(e, section) + ": '" + e.value + "' is not a number");
    else if (!std::isfinite(*v)) errors.push_back(where(e, section) + ": must be finite");
    return v;
  };
  const auto integer = [&](const IniEntry& e, const std::string& section) -> std::optional<long long> {
    auto v = detail::parse_integer(e.value);
    if (!v) errors.push_back(where(e, section) + ": '" + e.value + "' is not an integer");
    return v;
  };
  const auto number_list = [&](const IniEntry& e, const std::string& section) -> std::optional<std::vector<double>> {
    std::vector<double> out;
    for (const auto& item : detail::split_list(e.value)) {
      auto v = detail::parse_number(item);
      if (!v || !std::isfinite(*v)) {
        errors.push_back(where(e, section) + ": '" + item + "' is not a finite number");
        return std::nullopt;
      }
      out.push_back(*v);
    }
    return out;
  };
  const auto int_list = [&](const IniEntry& e, const std::string& section) -> std::optional<std::vector<int>> {
    std::vector<int> out;
    for (const auto& item : detail::split_list(e.value)) {
      auto v = detail::parse_integer(item);
      if (!v) {
        errors.push_back(where(e, section) + ": '" + item + "' is not an integer");
        return std::nullopt;
      }
      out.push_back(static_cast<int>(*v));
    }
    return out;
  };

  // [run]
  if (const IniEntry* e = find("run", "master_seed")) {
    if (auto v = detail::parse_unsigned(e->value)) c.master_seed = *v;
    else errors.push_back(where(*e, "run") + ": '" + e->value + "' is not a nonnegative integer");
  }
  if (const IniEntry* e = find("run", "output")) c.output = e->value;

  // [params]: Gamma first so Gamma1/Gamma2 can refine it.
  bool nu_given = false;
  for (const char* key : {"Gamma", "Omega", "Omega_c", "Delta", "delta", "Gamma1", "Gamma2", "nu", "eta"}) {
    if (const IniEntry* e = find("params", key)) {
      if (auto v = number(*e, "params")) {
        set_param(c.params, key, *v);
        if (std::string(key) == "Omega") c.omega_prescription = false;
        if (std::string(key) == "Omega_c") c.chain_omega_c_from_modes = false;
        if (std::string(key) == "nu") nu_given = true;
      }
    }
  }
  if (c.scenario == Scenario::custom && !nu_given) errors.emplace_back("params.nu is required for scenario custom");

  // [sweep]
  if (doc.sections.count("sweep")) {
    if (!is_sweep_scenario(c.scenario)) {
      errors.push_back("[sweep] is not supported by scenario " + to_string(c.scenario));
    } else {
      SweepAxis axis;
      const IniEntry* name = find("sweep", "axis");
      if (!name) errors.emplace_back("sweep.axis is required when [sweep] is present");
      else if (!is_param_name(name->value)) errors.push_back(where(*name, "sweep") + ": unknown parameter '" + name->value + "'");
      else axis.name = name->value;
      const IniEntry* values = find("sweep", "values");
      const IniEntry* start = find("sweep", "start");
      const IniEntry* stop = find("sweep", "stop");
      const IniEntry* points = find("sweep", "points");
      if (values) {
        if (start || stop || points) errors.emplace_back("sweep: give either values or start/stop/points, not both");
        if (auto v = number_list(*values, "sweep")) {
          if (v->empty()) errors.emplace_back("sweep.values is empty");
          axis.values = *v;
        }
      } else {
        if (!start || !stop || !points) {
          errors.emplace_back("sweep needs start, stop and points (or values)");
        } else {
          auto a = number(*start, "sweep");
          auto b = number(*stop, "sweep");
          auto n = integer(*points, "sweep");
          if (n && *n < 2) errors.push_back(where(*points, "sweep") + ": points must be >= 2");
          if (a && b && n && *n >= 2) axis.values = detail::linspace(*a, *b, static_cast<int>(*n));
        }
      }
      c.sweep = axis;
    }
  }

  // [series]
  if (auto it = doc.sections.find("series"); it != doc.sections.end()) {
    if (!is_sweep_scenario(c.scenario)) {
      errors.push_back("[series] is not supported by scenario " + to_string(c.scenario));
    } else if (it->second.size() != 1) {
      errors.emplace_back("[series] must contain exactly one parameter list");
    } else {
      const IniEntry& e = it->second.front();
      if (!is_param_name(e.key)) errors.push_back(where(e, "series") + ": unknown parameter");
      else if (c.sweep && c.sweep->name == e.key) errors.push_back(where(e, "series") + ": same parameter as the sweep axis");
      else if (auto v = number_list(e, "series")) c.series = SweepAxis{e.key, *v};
    }
  } else if (c.series && c.sweep && c.series->name == c.sweep->name) {
    c.series.reset();
  }

  // [solver]
  if (const IniEntry* e = find("solver", "cutoffs")) {
    if (auto v = int_list(*e, "solver")) {
      c.solver.cutoffs = *v;
      for (int k : *v) {
        if (k < 2) errors.push_back(where(*e, "solver") + ": every cutoff must be >= 2");
      }
    }
  }
  const auto positive = [&](const char* key, double& target) {
    if (const IniEntry* e = find("solver", key)) {
      if (auto v = number(*e, "solver")) {
        if (!(*v > 0.0)) errors.push_back(where(*e, "solver") + ": must be > 0");
        target = *v;
      }
    }
  };
  positive("dt", c.solver.dt);
  positive("t_end", c.solver.t_end);
  positive("sample_every", c.solver.sample_every);
  positive("truncation_threshold", c.solver.truncation_threshold);
  if (const IniEntry* e = find("solver", "trajectories")) {
    if (auto v = integer(*e, "solver")) {
      if (*v < 1) errors.push_back(where(*e, "solver") + ": must be >= 1");
      c.solver.trajectories = static_cast<int>(*v);
    }
  }
  if (const IniEntry* e = find("solver", "threads")) {
    if (auto v = integer(*e, "solver")) {
      if (*v < 0) errors.push_back(where(*e, "solver") + ": must be >= 0");
      c.solver.threads = static_cast<unsigned>(std::max<long long>(0, *v));
    }
  }
  if (const IniEntry* e = find("solver", "localization_depth")) {
    if (auto v = integer(*e, "solver")) {
      if (*v < 0 || *v > 20) errors.push_back(where(*e, "solver") + ": must be in [0, 20]");
      c.solver.localization_depth = static_cast<int>(*v);
    }
  }
  if (const IniEntry* e = find("solver", "numeric")) {
    if (e->value == "true") c.solver.numeric = true;
    else if (e->value == "false") c.solver.numeric = false;
    else errors.push_back(where(*e, "solver") + ": expected true or false");
  }

  // [protocol]
  if (doc.sections.count("protocol") && c.scenario != Scenario::pulsed) {
    errors.emplace_back("[protocol] is only used by scenario pulsed");
  }
  if (const IniEntry* e = find("protocol", "targets")) {
    if (auto v = int_list(*e, "protocol")) {
      if (v->empty()) errors.push_back(where(*e, "protocol") + ": needs at least one target");
      for (int n : *v) {
        if (n < 1) errors.push_back(where(*e, "protocol") + ": targets must be >= 1");
      }
      c.protocol.targets = *v;
    }
  }
  if (const IniEntry* e = find("protocol", "gate")) {
    if (e->value == "stark-shift") c.protocol.gate = GateModel::stark_shift;
    else if (e->value == "exact") c.protocol.gate = GateModel::exact_two_level;
    else errors.push_back(where(*e, "protocol") + ": expected stark-shift or exact");
  }
  if (const IniEntry* e = find("protocol", "initial_mean_n")) {
    if (auto v = number(*e, "protocol")) {
      if (*v < 0.0) errors.push_back(where(*e, "protocol") + ": must be >= 0");
      c.protocol.initial_mean_n = *v;
    }
  }

  // [chain]
  if (doc.sections.count("chain") && c.scenario != Scenario::fig_chain) {
    errors.emplace_back("[chain] is only used by scenario fig-chain");
  }
  if (const IniEntry* e = find("chain", "n_ions")) {
    if (auto v = integer(*e, "chain")) {
      if (*v < 1 || *v > 10) errors.push_back(where(*e, "chain") + ": must be in [1, 10]");
      c.chain.n_ions = static_cast<int>(*v);
    }
  }
  if (const IniEntry* e = find("chain", "addressed_ion")) {
    if (auto v = integer(*e, "chain")) c.chain.addressed_ion = static_cast<int>(*v);
  }
  if (const IniEntry* e = find("chain", "omega_c_offset")) {
    if (auto v = number(*e, "chain")) c.chain.omega_c_offset = *v;
  }

  // Cross-field checks.
  for (const auto& v : c.params.violations()) errors.push_back("params: " + v);
  const auto check_axis = [&](const SweepAxis& axis, const char* what) {
    for (double x : axis.values) {
      PhysicalParams p = c.params;
      set_param(p, axis.name, x);
      for (const auto& v : p.violations()) {
        errors.push_back(std::string(what) + " value " + format_double(x) + " of " + axis.name + ": " + v);
        return;
      }
    }
  };
  if (c.sweep && !c.sweep->name.empty()) check_axis(*c.sweep, "sweep");
  if (c.series) check_axis(*c.series, "series");
  if (c.scenario == Scenario::fig_chain) {
    if (static_cast<int>(c.solver.cutoffs.size()) != c.chain.n_ions) {
      errors.emplace_back("solver.cutoffs needs one entry per chain mode (" + std::to_string(c.chain.n_ions) + ")");
    }
    if (c.chain.addressed_ion < 0 || c.chain.addressed_ion >= c.chain.n_ions) {
      errors.emplace_back("chain.addressed_ion out of range");
    }
  } else if (c.solver.cutoffs.size() != 1) {
    errors.emplace_back("solver.cutoffs must be a single value for a single-mode scenario");
  }
  if (c.scenario == Scenario::pulsed && !(c.params.Gamma() > 0.0)) {
    errors.emplace_back("params: pulsed reset needs Gamma > 0");
  }
  if ((c.scenario == Scenario::pulsed || c.scenario == Scenario::fig_timerate) && !(c.params.eta > 0.0) &&
      !(c.sweep && c.sweep->name == "eta")) {
    errors.emplace_back("params: eta must be > 0 for scenario " + to_string(c.scenario));
  }

  if (!errors.empty()) throw ConfigError(errors);
  return c;
}

/// Canonical text of a resolved configuration; feeding it back to
/// validate_config reproduces the same configuration.
inline std::string dump_config(const ScenarioConfig& c) {
  std::ostringstream out;
  const auto list = [](const auto& values) {
    std::string s;
    for (const auto& v : values) {
      if (!s.empty()) s += ", ";
      if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>) s += format_double(v);
      else s += std::to_string(v);
    }
    return s;
  };
  out << "[run]\n";
  out << "scenario = " << to_string(c.scenario) << "\n";
  out << "master_seed = " << c.master_seed << "\n";
  if (!c.output.empty()) out << "output = " << c.output << "\n";
  out << "[params]\n";
  const PhysicalParams& p = c.params;
  if (!c.omega_prescription) out << "Omega = " << format_double(p.Omega) << "\n";
  if (!c.chain_omega_c_from_modes) out << "Omega_c = " << format_double(p.Omega_c) << "\n";
  out << "Delta = " << format_double(p.Delta) << "\n";
  out << "delta = " << format_double(p.delta) << "\n";
  out << "Gamma1 = " << format_double(p.Gamma1) << "\n";
  out << "Gamma2 = " << format_double(p.Gamma2) << "\n";
  out << "nu = " << format_double(p.nu) << "\n";
  out << "eta = " << format_double(p.eta) << "\n";
  if (c.sweep) {
    out << "[sweep]\naxis = " << c.sweep->name << "\nvalues = " << list(c.sweep->values) << "\n";
  }
  if (c.series) out << "[series]\n" << c.series->name << " = " << list(c.series->values) << "\n";
  out << "[solver]\n";
  out << "cutoffs = " << list(c.solver.cutoffs) << "\n";
  if (c.solver.dt > 0.0) out << "dt = " << format_double(c.solver.dt) << "\n";
  if (c.solver.t_end > 0.0) out << "t_end = " << format_double(c.solver.t_end) << "\n";
  if (c.solver.sample_every > 0.0) out << "sample_every = " << format_double(c.solver.sample_every) << "\n";
  if (c.solver.trajectories > 0) out << "trajectories = " << c.solver.trajectories << "\n";
  out << "localization_depth = " << c.solver.localization_depth << "\n";
  out << "truncation_threshold = " << format_double(c.solver.truncation_threshold) << "\n";
  out << "numeric = " << (c.solver.numeric ? "true" : "false") << "\n";
  if (c.scenario == Scenario::pulsed) {
    out << "[protocol]\ntargets = " << list(c.protocol.targets) << "\n";
    out << "gate = " << (c.protocol.gate == GateModel::stark_shift ? "stark-shift" : "exact") << "\n";
    out << "initial_mean_n = " << format_double(c.protocol.initial_mean_n) << "\n";
  }
  if (c.scenario == Scenario::fig_chain) {
    out << "[chain]\nn_ions = " << c.chain.n_ions << "\naddressed_ion = " << c.chain.addressed_ion << "\n";
    out << "omega_c_offset = " << format_double(c.chain.omega_c_offset) << "\n";
  }
  return out.str();
}

}  // namespace sscool
