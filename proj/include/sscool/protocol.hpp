#pragma once

// Pulsed Stark-shift-gate cooling.
//
// Minimal level model: a two-level ion whose bare states |down>, |up> store
// the internal state between stages. A carrier pulse maps |down> -> |->
// before the gate and |+> -> |up> after it; both are applied as ideal
// instantaneous rotations. The gate moves |-, n> -> |+, n-1>, and the reset
// stage decays |up> -> |down> at rate 2 Gamma without touching the phonons.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "sscool/dynamics.hpp"
#include "sscool/model.hpp"
#include "sscool/operator.hpp"
#include "sscool/params.hpp"

namespace sscool {

enum class PulseKind { carrier_pi, stark_gate, dissipative_wait };

inline const char* to_string(PulseKind k) {
  switch (k) {
    case PulseKind::carrier_pi: return "carrier-pi";
    case PulseKind::stark_gate: return "stark-gate";
    case PulseKind::dissipative_wait: return "dissipative-wait";
  }
  return "?";
}

struct Pulse {
  PulseKind kind = PulseKind::carrier_pi;
  double duration = 0.0;
  int target_n = 0;  // Fock level the stark gate is timed for

  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (!(duration > 0.0) || !std::isfinite(duration)) out.emplace_back("pulse duration must be > 0");
    if (kind == PulseKind::stark_gate && target_n < 1) out.emplace_back("stark gate needs target_n >= 1");
    return out;
  }
};

struct PulseSequence {
  std::vector<Pulse> pulses;
  int cycle_count = 1;

  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (pulses.empty()) out.emplace_back("pulse sequence is empty");
    if (cycle_count < 1) out.emplace_back("cycle_count must be >= 1");
    for (const auto& p : pulses) {
      for (auto& v : p.violations()) out.push_back(std::move(v));
    }
    return out;
  }
};

/// pi / (eta nu sqrt(n)): full |-, n> -> |+, n-1> transfer under the
/// Stark-shift Hamiltonian, whose matrix element is (eta nu / 2) sqrt(n).
inline double stark_gate_duration(const PhysicalParams& p, int target_n) {
  if (target_n < 1) throw std::invalid_argument("target_n must be >= 1");
  if (!(p.eta > 0.0)) throw std::invalid_argument("stark gate needs eta > 0");
  return std::numbers::pi / (p.eta * p.nu * std::sqrt(static_cast<double>(target_n)));
}

/// Reset waits 5 lifetimes of |up>, leaving at most e^-5 of its population.
inline double reset_duration(const PhysicalParams& p) {
  if (!(p.Gamma() > 0.0)) throw std::invalid_argument("reset needs Gamma > 0");
  return 5.0 / (2.0 * p.Gamma());
}

/// Nominal carrier pi time pi / (2 Omega); falls back to pi / (2 nu) when Omega = 0.
inline double carrier_duration(const PhysicalParams& p) {
  const double rabi = p.Omega != 0.0 ? std::abs(p.Omega) : p.nu;
  return std::numbers::pi / (2.0 * rabi);
}

inline PulseSequence build_cycle(const PhysicalParams& p, int target_n, int cycle_count = 1) {
  if (target_n < 1) throw std::invalid_argument("target_n must be >= 1");
  PulseSequence seq;
  seq.cycle_count = cycle_count;
  seq.pulses = {
      {PulseKind::carrier_pi, carrier_duration(p), 0},
      {PulseKind::stark_gate, stark_gate_duration(p, target_n), target_n},
      {PulseKind::carrier_pi, carrier_duration(p), 0},
      {PulseKind::dissipative_wait, reset_duration(p), 0},
  };
  return seq;
}

enum class GateModel { stark_shift, exact_two_level };

struct PulsedOptions {
  GateModel gate = GateModel::stark_shift;
  double dt = 0.0;  // 0: TimeGrid::default_dt
  MasterOptions master;
};

struct PulsedResult {
  TimeSeries per_cycle;  // sample 0 is the initial state, then one sample after every cycle
  QuantumState final_state;
};

namespace detail {

/// Storage-to-dressed map: |down> -> |->, |up> -> |+>.
inline Matrix carrier_map() {
  Matrix v(2, 2);
  v.col(level::down) = dressed_minus(2);
  v.col(level::up) = dressed_plus(2);
  return v;
}

}  // namespace detail

/// Runs every cycle of every sequence in order.
inline PulsedResult run_schedule(const QuantumState& state0, const std::vector<PulseSequence>& schedule,
                                 const PhysicalParams& p, const PulsedOptions& opt = {}) {
  const HilbertLayout& layout = state0.layout();
  detail::require_layout(layout, 2, 1, "run_pulsed");
  if (auto v = state0.violations(); !v.empty()) throw std::invalid_argument("initial state: " + v.front());
  for (const auto& seq : schedule) {
    if (auto v = seq.violations(); !v.empty()) throw std::invalid_argument("pulse sequence: " + v.front());
  }
  const double dt = opt.dt > 0.0 ? opt.dt : TimeGrid::default_dt(p);

  const Operator map_in = embed_internal(layout, detail::carrier_map());
  const Operator map_out = map_in.adjoint();
  const Operator reset_jump = std::sqrt(2.0 * p.Gamma()) * transition(layout, level::down, level::up);
  const Operator idle = Operator(layout, Matrix::Zero(layout.dim(), layout.dim()));
  const std::vector<Operator> reset_jumps{reset_jump};
  const std::vector<Operator> no_jumps;
  const Hamiltonian gate_h = opt.gate == GateModel::stark_shift
                                 ? Hamiltonian(stark_shift_H(p, layout))
                                 : Hamiltonian(layout, TwoLevelLabHamiltonian(p, layout));

  Matrix rho = state0.density_matrix();
  bool mapped_in = false;
  double clock = 0.0;
  PulsedResult out{TimeSeries{}, state0.as_density()};
  detail::record_density(out.per_cycle, layout, rho, clock);
  const auto run_stage = [&](const Hamiltonian& h, const std::vector<Operator>& jumps, double duration) {
    const TimeGrid grid{0.0, duration, dt, 1 << 30};
    TimeSeries ts = evolve_master(h, jumps, QuantumState::from_density(layout, rho), grid, opt.master);
    rho = ts.final_state->rho();
  };

  for (const auto& seq : schedule) {
    for (int c = 0; c < seq.cycle_count; ++c) {
      for (const auto& pulse : seq.pulses) {
        switch (pulse.kind) {
          case PulseKind::carrier_pi: {
            const Operator& u = mapped_in ? map_out : map_in;
            rho = u.matrix() * rho * u.matrix().adjoint();
            mapped_in = !mapped_in;
            break;
          }
          case PulseKind::stark_gate:
            run_stage(gate_h, no_jumps, pulse.duration);
            break;
          case PulseKind::dissipative_wait:
            run_stage(Hamiltonian(idle), reset_jumps, pulse.duration);
            break;
        }
        clock += pulse.duration;
      }
      detail::record_density(out.per_cycle, layout, rho, clock);
    }
  }
  out.per_cycle.final_state = QuantumState::from_density(layout, rho);
  out.final_state = *out.per_cycle.final_state;
  return out;
}

inline PulsedResult run_pulsed(const QuantumState& state0, const PulseSequence& sequence, const PhysicalParams& p,
                               const PulsedOptions& opt = {}) {
  return run_schedule(state0, {sequence}, p, opt);
}

/// Population of |down, n-1> after one cycle timed for n, started from |down, n>.
inline double cycle_transfer(const PhysicalParams& p, int n, int cutoff, const PulsedOptions& opt = {}) {
  const HilbertLayout layout(2, {cutoff});
  const int fock[1] = {n};
  const int target[1] = {n - 1};
  const PulsedResult r = run_pulsed(QuantumState::basis(layout, level::down, fock), build_cycle(p, n), p, opt);
  return r.final_state.rho()(layout.index(level::down, target), layout.index(level::down, target)).real();
}

}  // namespace sscool
