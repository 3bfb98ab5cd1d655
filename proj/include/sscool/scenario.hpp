#pragma once

// Named reproductions of the cooling experiments and their CSV output.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sscool/config.hpp"
#include "sscool/dynamics.hpp"
#include "sscool/model.hpp"
#include "sscool/protocol.hpp"
#include "sscool/rates.hpp"
#include "sscool/rng.hpp"

namespace sscool {

enum class Provenance { numeric, analytic };

inline const char* to_string(Provenance p) { return p == Provenance::numeric ? "numeric" : "analytic"; }

struct ResultRow {
  double axis_value = 0.0;
  std::string observable;
  double value = 0.0;
  double std_error = 0.0;
  Provenance provenance = Provenance::numeric;
};

struct ResultTable {
  std::string axis_name;
  std::vector<ResultRow> rows;
  std::vector<std::string> notes;  // written as comment lines

  void add(double axis, std::string observable, double value, Provenance prov, double se = 0.0) {
    if (!std::isfinite(value) || !std::isfinite(se)) {
      notes.push_back("skipped non-finite " + observable + " at " + axis_name + " = " + format_double(axis));
      return;
    }
    rows.push_back({axis, std::move(observable), value, se, prov});
  }

  std::vector<const ResultRow*> select(const std::string& observable, Provenance prov) const {
    std::vector<const ResultRow*> out;
    for (const auto& r : rows) {
      if (r.observable == observable && r.provenance == prov) out.push_back(&r);
    }
    return out;
  }
};

/// '#'-prefixed resolved config, then `axis_value,observable,value,std_error,provenance`.
inline void write_csv(std::ostream& out, const ScenarioConfig& config, const ResultTable& table) {
  std::istringstream cfg(dump_config(config));
  for (std::string line; std::getline(cfg, line);) out << "# " << line << '\n';
  out << "# ; axis: " << table.axis_name << '\n';
  for (const auto& n : table.notes) out << "# ; " << n << '\n';
  out << "axis_value,observable,value,std_error,provenance\n";
  for (const auto& r : table.rows) {
    out << format_double(r.axis_value) << ',' << r.observable << ',' << format_double(r.value) << ','
        << format_double(r.std_error) << ',' << to_string(r.provenance) << '\n';
  }
}

namespace detail {

/// Runs fn(i) for i in [0, n) on up to `threads` workers; the first error
/// (by index) is rethrown.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::string series_suffix(const ScenarioConfig& c, double value) {
  return c.series ? "@" + c.series->name + "=" + format_double(value) : "";
}

/// Applies sweep/series values and the Omega^2 = Gamma nu eta prescription.
inline PhysicalParams point_params(const ScenarioConfig& c, const SweepAxis* series, double sv, double av) {
  PhysicalParams p = c.params;
  if (series) set_param(p, series->name, sv);
  if (c.sweep) set_param(p, c.sweep->name, av);
  if (c.omega_prescription) p.Omega = std::sqrt(p.Gamma() * p.nu * p.eta);
  return p;
}

inline QuantumState minus_fock(const HilbertLayout& layout, std::span<const int> fock) {
  return QuantumState::product(layout, dressed_minus(layout.internal_dim()), fock);
}

inline TruncationMonitor monitor_of(const ScenarioConfig& c) {
  TruncationMonitor m;
  m.threshold = c.solver.truncation_threshold;
  return m;
}

/// Steady-state mean phonon number of the single-mode continuous scheme.
inline double numeric_steady_n(const PhysicalParams& p, int cutoff, const TruncationMonitor& monitor) {
  const HilbertLayout layout(3, {cutoff});
  const Operator h = three_level_rot_H(p, layout);
  const auto jumps = dissipators(p, layout);
  const SteadyStateResult ss = steady_state(h, jumps);
  monitor.check(layout, ss.state.populations(), std::numeric_limits<double>::infinity());
  return expectation(ss.state, number(layout, 0)).real();
}

struct Point {
  std::size_t series_index;
  double series_value;
  double axis_value;
};

inline std::vector<Point> sweep_points(const ScenarioConfig& c) {
  std::vector<Point> out;
  const std::vector<double> sv = c.series ? c.series->values : std::vector<double>{0.0};
  const std::vector<double> av = c.sweep ? c.sweep->values : std::vector<double>{0.0};
  for (std::size_t s = 0; s < sv.size(); ++s) {
    for (double a : av) out.push_back({s, sv[s], a});
  }
  return out;
}

inline ResultTable run_parabola(const ScenarioConfig& c) {
  ResultTable t;
  t.axis_name = c.sweep->name;
  const auto pts = sweep_points(c);
  std::vector<double> numeric(pts.size(), std::numeric_limits<double>::quiet_NaN());
  const auto monitor = monitor_of(c);
  if (c.solver.numeric) {
    parallel_for(pts.size(), c.solver.threads, [&](std::size_t i) {
      const PhysicalParams p = point_params(c, c.series ? &*c.series : nullptr, pts[i].series_value, pts[i].axis_value);
      numeric[i] = numeric_steady_n(p, c.solver.cutoffs[0], monitor);
    });
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const PhysicalParams p = point_params(c, c.series ? &*c.series : nullptr, pts[i].series_value, pts[i].axis_value);
    const std::string sfx = series_suffix(c, pts[i].series_value);
    if (c.solver.numeric) t.add(pts[i].axis_value, "mean_n" + sfx, numeric[i], Provenance::numeric);
    t.add(pts[i].axis_value, "mean_n" + sfx, rate_coefficients(p).n_ss, Provenance::analytic);
  }
  return t;
}

/// Horizon and sampling used to measure T_C for one fig-timerate point.
struct TimerateGrid {
  double t_end;
  double sample_every;
};

inline TimerateGrid timerate_grid(const ScenarioConfig& c, const PhysicalParams& p) {
  const double w_line = p.eta * p.Omega_c / 8.0;
  const double t_end = c.solver.t_end > 0.0 ? c.solver.t_end : 5.0 * std::log(100.0) / w_line;
  const double every = c.solver.sample_every > 0.0 ? c.solver.sample_every : gate_time(p) / 20.0;
  return {t_end, every};
}

inline ResultTable run_timerate(const ScenarioConfig& c) {
  ResultTable t;
  t.axis_name = c.sweep->name;
  const auto pts = sweep_points(c);
  std::vector<double> inv_tc(pts.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> failures(pts.size());
  const auto monitor = monitor_of(c);
  if (c.solver.numeric) {
    parallel_for(pts.size(), c.solver.threads, [&](std::size_t i) {
      const PhysicalParams p = point_params(c, c.series ? &*c.series : nullptr, pts[i].series_value, pts[i].axis_value);
      const HilbertLayout layout(3, {c.solver.cutoffs[0]});
      const int one[1] = {1};
      const TimerateGrid g = timerate_grid(c, p);
      const double dt = c.solver.dt > 0.0 ? c.solver.dt : g.sample_every;
      MasterOptions opt;
      opt.monitor = monitor;
      opt.probe_positivity = false;
      const TimeSeries ts = evolve_master(three_level_rot_H(p, layout), dissipators(p, layout),
                                          minus_fock(layout, one).as_density(),
                                          TimeGrid::with_sampling(0.0, g.t_end, dt, g.sample_every), opt);
      try {
        inv_tc[i] = 1.0 / cooling_time(ts, 1.0, 0.01);
      } catch (const SolverError& e) {
        failures[i] = e.what();
      }
    });
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const PhysicalParams p = point_params(c, c.series ? &*c.series : nullptr, pts[i].series_value, pts[i].axis_value);
    const std::string sfx = series_suffix(c, pts[i].series_value);
    const double x = pts[i].axis_value;
    if (!failures[i].empty()) t.notes.push_back(t.axis_name + " = " + format_double(x) + ": " + failures[i]);
    if (c.solver.numeric) t.add(x, "inv_cooling_time" + sfx, inv_tc[i], Provenance::numeric);
    t.add(x, "W_eighth" + sfx, p.eta * p.Omega_c / 8.0, Provenance::analytic);
    t.add(x, "inv_gate_time" + sfx, 1.0 / gate_time(p), Provenance::analytic);
    t.add(x, "W_rate_eq" + sfx, cooling_rate(p), Provenance::analytic);
  }
  if (c.omega_prescription) t.notes.emplace_back("Omega^2 = Gamma nu eta at every point");
  t.notes.emplace_back("inv_cooling_time: 1/T_C, T_C from <n> = 1 to <n> = 0.01, start |-,1>");
  t.notes.emplace_back("inv_gate_time: eta Omega_c / pi, inverse half Rabi period of the gate");
  return t;
}

inline ResultTable run_robustness(const ScenarioConfig& c) {
  ResultTable t;
  t.axis_name = c.sweep->name;
  const auto pts = sweep_points(c);
  std::vector<double> numeric(pts.size(), std::numeric_limits<double>::quiet_NaN());
  const auto monitor = monitor_of(c);
  if (c.solver.numeric) {
    parallel_for(pts.size(), c.solver.threads, [&](std::size_t i) {
      const PhysicalParams p = point_params(c, c.series ? &*c.series : nullptr, pts[i].series_value, pts[i].axis_value);
      numeric[i] = numeric_steady_n(p, c.solver.cutoffs[0], monitor);
    });
  }
  // Reference: the point at Omega_c = nu/2 (or the middle of the axis).
  for (std::size_t s = 0; s < (c.series ? c.series->values.size() : 1); ++s) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].series_index == s) idx.push_back(i);
    }
    std::size_t ref = idx[idx.size() / 2];
    for (std::size_t i : idx) {
      const PhysicalParams p = point_params(c, c.series ? &*c.series : nullptr, pts[i].series_value, pts[i].axis_value);
      if (c.sweep->name == "Omega_c" && std::abs(p.Omega_c - 0.5 * p.nu) < 1e-12) ref = i;
    }
    const PhysicalParams p0 = point_params(c, c.series ? &*c.series : nullptr, pts[ref].series_value, pts[ref].axis_value);
    const RateCoefficients r0 = rate_coefficients(p0);
    for (std::size_t i : idx) {
      const PhysicalParams p = point_params(c, c.series ? &*c.series : nullptr, pts[i].series_value, pts[i].axis_value);
      const RateCoefficients r = rate_coefficients(p);
      const std::string sfx = series_suffix(c, pts[i].series_value);
      const double x = pts[i].axis_value;
      t.add(x, "W" + sfx, r.W, Provenance::analytic);
      t.add(x, "mean_n" + sfx, r.n_ss, Provenance::analytic);
      t.add(x, "rel_change_W" + sfx, (r.W - r0.W) / r0.W, Provenance::analytic);
      t.add(x, "rel_change_mean_n" + sfx, (r.n_ss - r0.n_ss) / r0.n_ss, Provenance::analytic);
      if (c.solver.numeric) {
        t.add(x, "mean_n" + sfx, numeric[i], Provenance::numeric);
        t.add(x, "rel_change_mean_n" + sfx, (numeric[i] - numeric[ref]) / numeric[ref], Provenance::numeric);
      }
    }
  }
  if (c.omega_prescription) t.notes.emplace_back("Omega^2 = Gamma nu eta at every point");
  return t;
}

inline ResultTable run_custom(const ScenarioConfig& c) {
  ResultTable t;
  t.axis_name = c.sweep ? c.sweep->name : "point";
  const auto pts = sweep_points(c);
  std::vector<double> numeric(pts.size(), std::numeric_limits<double>::quiet_NaN());
  const auto monitor = monitor_of(c);
  if (c.solver.numeric) {
    parallel_for(pts.size(), c.solver.threads, [&](std::size_t i) {
      const PhysicalParams p = point_params(c, c.series ? &*c.series : nullptr, pts[i].series_value, pts[i].axis_value);
      numeric[i] = numeric_steady_n(p, c.solver.cutoffs[0], monitor);
    });
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const PhysicalParams p = point_params(c, c.series ? &*c.series : nullptr, pts[i].series_value, pts[i].axis_value);
    const std::string sfx = series_suffix(c, pts[i].series_value);
    const double x = pts[i].axis_value;
    const RateCoefficients r = rate_coefficients(p);
    t.add(x, "A_minus" + sfx, r.A_minus, Provenance::analytic);
    t.add(x, "A_plus" + sfx, r.A_plus, Provenance::analytic);
    t.add(x, "W" + sfx, r.W, Provenance::analytic);
    if (r.cooling) t.add(x, "mean_n" + sfx, r.n_ss, Provenance::analytic);
    else t.notes.push_back("no cooling (A_- <= A_+) at " + t.axis_name + " = " + format_double(x));
    if (p.Omega != 0.0) {
      const ValidityReport v = validity(p);
      t.add(x, "ratio_gamma" + sfx, v.gamma_ratio, Provenance::analytic);
      t.add(x, "ratio_nu" + sfx, v.nu_ratio, Provenance::analytic);
      t.add(x, "ratio_delta" + sfx, v.delta_ratio, Provenance::analytic);
    }
    if (c.solver.numeric) t.add(x, "mean_n" + sfx, numeric[i], Provenance::numeric);
  }
  return t;
}

inline double dynamics_dt(const ScenarioConfig& c, const PhysicalParams& p) {
  return c.solver.dt > 0.0 ? c.solver.dt : TimeGrid::default_dt(p);
}

inline ResultTable run_dynamics(const ScenarioConfig& c) {
  ResultTable t;
  t.axis_name = "t";
  const PhysicalParams& p = c.params;
  const HilbertLayout layout(3, {c.solver.cutoffs[0]});
  const int one[1] = {1};
  const QuantumState psi0 = minus_fock(layout, one);
  const Hamiltonian h(three_level_rot_H(p, layout));
  const auto jumps = dissipators(p, layout);
  const TimeGrid grid = TimeGrid::with_sampling(0.0, c.solver.t_end, dynamics_dt(c, p), c.solver.sample_every);

  EnsembleOptions eopt;
  eopt.threads = c.solver.threads;
  eopt.mc.localization_depth = c.solver.localization_depth;
  eopt.mc.keep_final_state = false;
  eopt.monitor = monitor_of(c);
  const auto seeds = ensemble_seeds(c.master_seed, static_cast<std::size_t>(c.solver.trajectories));
  const TrajectoryEnsemble ens = ensemble_run(h, jumps, psi0, grid, seeds, eopt);

  const auto& times = ens.mean.times;
  const auto& n = ens.mean.channel("n_0");
  const auto& se = ens.error("n_0");
  for (std::size_t s = 0; s < times.size(); ++s) t.add(times[s], "mean_n", n[s], Provenance::numeric, se[s]);

  if (c.solver.numeric) {
    MasterOptions mopt;
    mopt.monitor = monitor_of(c);
    mopt.probe_positivity = false;
    const TimeSeries me = evolve_master(h, jumps, psi0.as_density(), grid, mopt);
    for (std::size_t s = 0; s < me.times.size(); ++s) {
      t.add(me.times[s], "mean_n_master", me.channel("n_0")[s], Provenance::numeric);
    }
  }
  // Lamb-Dicke rate equation from P(1) = 1.
  std::vector<double> p0(kDefaultRateEqNmax + 1, 0.0);
  p0[1] = 1.0;
  const RateEquationSeries rs = rate_eq_evolve(p0, p, grid);
  for (std::size_t s = 0; s < rs.times.size(); ++s) t.add(rs.times[s], "mean_n_rate_eq", rs.mean[s], Provenance::analytic);
  t.notes.push_back("gate time pi/(eta Omega_c) = " + format_double(gate_time(p)));
  t.notes.push_back("initial state |->|1>");
  return t;
}

inline PhysicalParams chain_params(const ScenarioConfig& c, const ChainSpec& chain) {
  PhysicalParams p = c.params;
  if (c.chain_omega_c_from_modes) {
    const double nu2 = chain.mode_freqs.size() > 1 ? chain.mode_freqs[1] : chain.mode_freqs[0];
    p.Omega_c = 0.5 * nu2 + c.chain.omega_c_offset;
  }
  return p;
}

inline ResultTable run_chain(const ScenarioConfig& c) {
  ResultTable t;
  t.axis_name = "t";
  const ChainSpec chain = chain_modes(c.chain.n_ions, c.params.nu, c.params.eta);
  const PhysicalParams p = chain_params(c, chain);
  ModelConfig mc;
  mc.addressed_ion = c.chain.addressed_ion;
  const ChainModel model = chain_H(chain, p, mc, c.solver.cutoffs);
  const HilbertLayout& layout = model.H.layout();
  const std::vector<int> ones(layout.num_modes(), 1);
  const QuantumState psi0 = minus_fock(layout, ones);
  const Hamiltonian h(model.H);
  const TimeGrid grid = TimeGrid::with_sampling(0.0, c.solver.t_end, dynamics_dt(c, p), c.solver.sample_every);

  EnsembleOptions eopt;
  eopt.threads = c.solver.threads;
  eopt.mc.localization_depth = c.solver.localization_depth;
  eopt.mc.keep_final_state = false;
  eopt.monitor = monitor_of(c);
  const auto seeds = ensemble_seeds(c.master_seed, static_cast<std::size_t>(c.solver.trajectories));
  const TrajectoryEnsemble ens = ensemble_run(h, model.jumps, psi0, grid, seeds, eopt);
  for (int m = 0; m < layout.num_modes(); ++m) {
    const std::string name = "n_" + std::to_string(m);
    const auto& n = ens.mean.channel(name);
    const auto& se = ens.error(name);
    for (std::size_t s = 0; s < n.size(); ++s) {
      t.add(ens.mean.times[s], "mean_n_mode" + std::to_string(m + 1), n[s], Provenance::numeric, se[s]);
    }
  }
  t.notes.push_back("Omega_c = " + format_double(p.Omega_c));
  for (int m = 0; m < layout.num_modes(); ++m) {
    t.notes.push_back("mode " + std::to_string(m + 1) + ": nu = " + format_double(chain.mode_freqs[m]) +
                      ", eta = " + format_double(model.etas[m]));
  }
  t.notes.push_back("initial state |-> with every mode in |1>");
  return t;
}

inline ResultTable run_pulsed_scenario(const ScenarioConfig& c) {
  ResultTable t;
  t.axis_name = "cycle";
  const PhysicalParams& p = c.params;
  const HilbertLayout layout(2, {c.solver.cutoffs[0]});
  const int zero[1] = {0};
  Vector down = Vector::Zero(2);
  down(level::down) = 1.0;
  const QuantumState rho0 = c.protocol.initial_mean_n > 0.0
                                ? thermal_state(layout, down, 0, c.protocol.initial_mean_n, zero)
                                : QuantumState::basis(layout, level::down, zero).as_density();
  std::vector<PulseSequence> schedule;
  for (int n : c.protocol.targets) schedule.push_back(build_cycle(p, n));
  PulsedOptions opt;
  opt.gate = c.protocol.gate;
  opt.dt = c.solver.dt;
  opt.master.monitor = monitor_of(c);
  opt.master.probe_positivity = false;
  const PulsedResult r = run_schedule(rho0, schedule, p, opt);
  const auto& n = r.per_cycle.channel("n_0");
  for (std::size_t k = 0; k < n.size(); ++k) t.add(static_cast<double>(k), "mean_n", n[k], Provenance::numeric);
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    t.add(static_cast<double>(k + 1), "stark_gate_duration", schedule[k].pulses[1].duration, Provenance::analytic);
  }
  t.notes.push_back("gate time pi/(eta Omega) = " + format_double(std::numbers::pi / (p.eta * p.Omega)));
  return t;
}

}  // namespace detail

inline ResultTable run_scenario(const ScenarioConfig& c) {
  switch (c.scenario) {
    case Scenario::fig_parabola: return detail::run_parabola(c);
    case Scenario::fig_timerate: return detail::run_timerate(c);
    case Scenario::robustness: return detail::run_robustness(c);
    case Scenario::custom: return detail::run_custom(c);
    case Scenario::fig_dynamics: return detail::run_dynamics(c);
    case Scenario::fig_chain: return detail::run_chain(c);
    case Scenario::pulsed: return detail::run_pulsed_scenario(c);
  }
  throw std::logic_error("unhandled scenario");
}

}  // namespace sscool
