// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sscool/sscool.hpp"

using namespace sscool;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ScenarioConfig load(const std::string& name) {
  std::ifstream in(std::string(SSCOOL_CONFIG_DIR) + "/" + name);
  std::ostringstream s;
  s << in.rdbuf();
  return validate_config(s.str());
}

std::map<double, const ResultRow*> by_axis(const ResultTable& t, const std::string& obs, Provenance prov) {
  std::map<double, const ResultRow*> out;
  for (const ResultRow* r : t.select(obs, prov)) out[r->axis_value] = r;
  return out;
}

double argmin_axis(const ResultTable& t, const std::string& obs, Provenance prov) {
  double best = std::numeric_limits<double>::infinity();
  double at = std::numeric_limits<double>::quiet_NaN();
  for (const ResultRow* r : t.select(obs, prov)) {
    if (r->value < best) {
      best = r->value;
      at = r->axis_value;
    }
  }
  return at;
}

PhysicalParams fig3(double eta) {
  PhysicalParams p;
  p.set_Gamma(10.0);
  p.Omega = 0.1;
  p.Omega_c = 0.5;
  p.eta = eta;
  return p;
}

constexpr double kFig3Analytic = 9.783e-7;

Verdict criterion1() {
  ScenarioConfig c = load("fig-parabola.ini");
  c.series.reset();
  c.params.eta = 1.0 / 20.0;
  const ResultTable t = run_scenario(c);
  const double num = argmin_axis(t, "mean_n", Provenance::numeric);
  const double ana = argmin_axis(t, "mean_n", Provenance::analytic);
  const bool ok = std::abs(num - 0.5) <= 0.05 * 0.5 && std::abs(ana - 0.5) <= 0.02 * 0.5;
  return {ok, "numeric argmin " + fmt("%.4f", num) + ", analytic argmin " + fmt("%.4f", ana) + " (target 0.5)"};
}

Verdict criterion2() {
  const int cutoff = load("fig-parabola.ini").solver.cutoffs[0];
  TruncationMonitor mon;
  std::vector<double> rel;
  std::string detail;
  for (double eta : {1.0 / 10.0, 1.0 / 20.0, 1.0 / 40.0}) {
    const double n = detail::numeric_steady_n(fig3(eta), cutoff, mon);
    rel.push_back(std::abs(n - kFig3Analytic) / kFig3Analytic);
    detail += "eta=" + fmt("%.4g", eta) + ": n=" + fmt("%.4g", n) + " rel=" + fmt("%.3g", rel.back()) + "; ";
  }
  const bool monotone = rel[0] > rel[1] && rel[1] > rel[2];
  const bool ok = rel[1] <= 0.30 && monotone;
  return {ok, detail + (monotone ? "monotone" : "not monotone") + ", limit 0.30 at eta=1/20"};
}

Verdict criterion3() {
  std::mt19937_64 rng(20240601);
  const auto u = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  int tested = 0;
  double worst = 0.0;
  while (tested < 1000) {
    PhysicalParams p;
    p.Gamma1 = u(0.0, 10.0);
    p.Gamma2 = u(0.01, 10.0);
    p.Omega = u(0.01, 2.0);
    p.Omega_c = u(0.1, 2.0);
    p.Delta = u(-5.0, 15.0);
    p.nu = u(0.5, 2.0);
    p.eta = u(0.0, 0.2);
    if (!(A_minus(p) > A_plus(p))) continue;
    ++tested;
    const double a = A_plus(p) / (A_minus(p) - A_plus(p));
    worst = std::max(worst, std::abs(n_final_explicit(p) - a) / std::abs(a));
  }
  const PhysicalParams p = fig3(0.05);
  std::vector<double> p0(12, 0.0);
  p0[1] = 1.0;
  const auto rs = rate_eq_evolve(p0, p, TimeGrid{0.0, 200.0, 0.1, 100});
  const double diff = std::abs(rs.mean.back() - n_final(p));
  const bool ok = worst <= 1e-10 && diff <= 1e-8;
  return {ok, "worst relative ratio/explicit gap " + fmt("%.3g", worst) + " over 1000 draws, rate-eq stationary gap " +
                  fmt("%.3g", diff)};
}

struct DynamicsRun {
  ResultTable table;
  double gate_time;
};

const DynamicsRun& dynamics() {
  static const DynamicsRun run = [] {
    const ScenarioConfig c = load("fig-dynamics.ini");
    return DynamicsRun{run_scenario(c), gate_time(c.params)};
  }();
  return run;
}

Verdict criterion4() {
  const auto& t = dynamics().table;
  const auto mc = by_axis(t, "mean_n", Provenance::numeric);
  const auto me = by_axis(t, "mean_n_master", Provenance::numeric);
  double worst_z = 0.0;
  int bad = 0;
  for (const auto& [x, r] : mc) {
    const auto it = me.find(x);
    if (it == me.end()) return {false, "missing master sample at t=" + fmt("%g", x)};
    const double diff = std::abs(r->value - it->second->value);
    if (r->std_error == 0.0) {
      if (diff > 1e-12) ++bad;
      continue;
    }
    const double z = diff / r->std_error;
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++bad;
  }
  return {bad == 0, std::to_string(mc.size()) + " samples, max |z| " + fmt("%.2f", worst_z) + ", " +
                        std::to_string(bad) + " beyond 3 SE"};
}

double first_crossing(const std::map<double, const ResultRow*>& series, double level) {
  double prev_t = 0.0;
  double prev_n = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [x, r] : series) {
    if (!std::isnan(prev_n) && prev_n > level && r->value <= level) {
      return prev_t + (prev_n - level) / (prev_n - r->value) * (x - prev_t);
    }
    prev_t = x;
    prev_n = r->value;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Verdict criterion5() {
  const auto& t = dynamics().table;
  constexpr double kGate = 62.5;
  const double tm = first_crossing(by_axis(t, "mean_n_master", Provenance::numeric), 0.1);
  const double tc = first_crossing(by_axis(t, "mean_n", Provenance::numeric), 0.1);
  const double ratio = tm / kGate;
  const bool ok = std::isfinite(tm) && ratio >= 0.5 && ratio <= 10.0;
  return {ok, "<n> = 0.1 at t = " + fmt("%.1f", tm) + " (master), " + fmt("%.1f", tc) + " (trajectories); " +
                  fmt("%.2f", ratio) + " gate times of 62.5"};
}

Verdict criterion6() {
  const ResultTable t = run_scenario(load("fig-timerate.ini"));
  const auto inv = by_axis(t, "inv_cooling_time", Provenance::numeric);
  const auto line = by_axis(t, "W_eighth", Provenance::analytic);
  bool ok = inv.size() == 3 && line.size() == 3;
  std::string detail;
  for (const auto& [eta, r] : line) {
    const auto it = inv.find(eta);
    if (it == inv.end()) {
      ok = false;
      detail += "eta=" + fmt("%g", eta) + ": no T_C; ";
      continue;
    }
    const double ratio = it->second->value / r->value;
    ok = ok && ratio >= 1.0 / 3.0 && ratio <= 3.0;
    detail += "eta=" + fmt("%g", eta) + ": ratio " + fmt("%.3f", ratio) + "; ";
  }
  return {ok, detail + "allowed [1/3, 3]"};
}

Verdict criterion7() {
  const ResultTable t = run_scenario(load("robustness.ini"));
  bool ok = true;
  std::string detail;
  for (const auto& [obs, prov, label] : {std::tuple{"rel_change_W", Provenance::analytic, "W"},
                                         std::tuple{"rel_change_mean_n", Provenance::analytic, "n"},
                                         std::tuple{"rel_change_mean_n", Provenance::numeric, "n numeric"}}) {
    for (const ResultRow* r : t.select(obs, prov)) {
      if (std::abs(r->axis_value - 0.5) < 1e-12) continue;
      ok = ok && std::abs(r->value) < 0.5;
      detail += std::string(label) + "@" + fmt("%g", r->axis_value) + " " + fmt("%+.0f%%", 100.0 * r->value) + "; ";
    }
  }
  return {ok, detail + "limit 50%"};
}

Verdict criterion8() {
  PhysicalParams p;
  p.nu = 1.0;
  p.Omega = 0.5;
  p.eta = 0.05;
  p.delta = 0.0;
  const HilbertLayout layout(2, {8});
  const double tg = stark_gate_duration(p, 1);
  const TwoLevelLabHamiltonian lab(p, layout);
  const Hamiltonian exact(layout, [lab](double t) { return lab(t); });
  const Hamiltonian ideal(stark_shift_H(p, layout));
  const std::vector<Operator> none;
  const TimeGrid grid{0.0, tg, 0.01, 1 << 30};
  const int zero[1] = {0};
  const int one[1] = {1};
  const auto pop = [&](const Hamiltonian& h, const QuantumState& s0, const Vector& internal, int n) {
    const int f[1] = {n};
    const Vector target = QuantumState::product(layout, internal, f).ket();
    const TimeSeries ts = evolve_master(h, none, s0.as_density(), grid);
    return (target.adjoint() * ts.final_state->rho() * target)(0, 0).real();
  };
  const auto start = QuantumState::product(layout, dressed_minus(2), one);
  const double p_exact = pop(exact, start, dressed_plus(2), 0);
  const double p_ideal = pop(ideal, start, dressed_plus(2), 0);
  const double leak = 1.0 - pop(exact, QuantumState::product(layout, dressed_minus(2), zero), dressed_minus(2), 0);
  const bool ok = p_exact >= 0.95 && std::abs(p_exact - p_ideal) <= 0.05 && leak <= p.eta * p.eta;
  return {ok, "P(+,0) exact " + fmt("%.4f", p_exact) + ", ideal " + fmt("%.4f", p_ideal) + ", dark-state leakage " +
                  fmt("%.2e", leak) + " (limit " + fmt("%.2e", p.eta * p.eta) + ")"};
}

Verdict criterion9() {
  PhysicalParams p;
  p.set_Gamma(10.0);
  p.nu = 1.0;
  p.Delta = 0.0;
  p.Omega_c = 0.5;
  p.eta = 0.05;
  double lo = 0.1;
  double hi = 20.0;
  const auto cools = [&](double omega) {
    p.Omega = omega;
    return cooling_rate(p) > 0.0;
  };
  if (!cools(lo) || cools(hi)) return {false, "bracket does not straddle the sign change"};
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (cools(mid) ? lo : hi) = mid;
  }
  const double root = 0.5 * (lo + hi);
  const double th = cooling_region_threshold(p);
  const double ref = std::sqrt(409.0 / 12.0);
  const bool ok = std::abs(root - th) <= 1e-6 && std::abs(th - ref) <= 1e-6;
  return {ok, "bisection " + fmt("%.9f", root) + ", inequality " + fmt("%.9f", th) + ", sqrt(409/12) " +
                  fmt("%.9f", ref)};
}

Verdict criterion10() {
  std::string detail;
  bool ok = true;
  // Master-equation runs across the model families.
  double worst_trace = 0.0;
  double worst_herm = 0.0;
  {
    PhysicalParams p;
    p.set_Gamma(6.0);
    p.Omega = 1.0;
    p.Omega_c = 0.5;
    p.eta = 0.1;
    const HilbertLayout layout(3, {8});
    const int one[1] = {1};
    const auto psi = detail::minus_fock(layout, one);
    for (Integrator mode : {Integrator::exact, Integrator::rk4}) {
      MasterOptions opt;
      opt.integrator = mode;
      const auto ts = evolve_master(three_level_rot_H(p, layout), dissipators(p, layout), psi.as_density(),
                                    TimeGrid{0.0, 50.0, 0.01, 100}, opt);
      worst_trace = std::max(worst_trace, ts.diagnostics.max_trace_error);
      worst_herm = std::max(worst_herm, ts.diagnostics.max_hermiticity_error);
    }
    const ChainSpec chain = chain_modes(3, 1.0, 0.1);
    PhysicalParams pc = p;
    pc.Omega_c = 0.5 * chain.mode_freqs[1] + 0.15;
    const ChainModel m = chain_H(chain, pc, {}, {3, 3, 3});
    const std::vector<int> ones{1, 1, 1};
    MasterOptions opt;
    opt.integrator = Integrator::rk4;
    opt.monitor.enabled = false;  // conservation only; cutoffs are deliberately small
    const auto ts = evolve_master(m.H, m.jumps, detail::minus_fock(m.H.layout(), ones).as_density(),
                                  TimeGrid{0.0, 10.0, 0.01, 100}, opt);
    worst_trace = std::max(worst_trace, ts.diagnostics.max_trace_error);
    worst_herm = std::max(worst_herm, ts.diagnostics.max_hermiticity_error);
  }
  ok = ok && worst_trace <= 1e-8 && worst_herm <= 1e-10;
  detail += "trace " + fmt("%.1e", worst_trace) + ", hermiticity " + fmt("%.1e", worst_herm) + "; ";

  std::vector<double> p0(41, 0.0);
  p0[3] = 1.0;
  PhysicalParams pr = fig3(0.05);
  pr.Omega = 1.0;
  const auto rs = rate_eq_evolve(p0, pr, TimeGrid{0.0, 100.0, 0.1, 10});
  ok = ok && rs.max_norm_error <= 1e-10;
  detail += "rate-eq norm " + fmt("%.1e", rs.max_norm_error) + "; ";

  ScenarioConfig c = load("fig-dynamics.ini");
  c.solver.trajectories = 16;
  c.solver.t_end = 60.0;
  const auto csv = [](ScenarioConfig cfg, unsigned threads) {
    cfg.solver.threads = threads;
    std::ostringstream out;
    write_csv(out, cfg, run_scenario(cfg));
    return out.str();
  };
  const std::string a = csv(c, 1);
  const bool same = a == csv(c, 1) && a == csv(c, 4);
  ok = ok && same;
  detail += same ? "CSV byte-identical across reruns and thread counts" : "CSV differs between reruns";
  return {ok, detail};
}

Verdict criterion11() {
  const ScenarioConfig c = load("fig-chain.ini");
  const ResultTable t = run_scenario(c);
  bool ok = true;
  std::string detail;
  constexpr std::size_t kWindow = 10;
  for (int m = 1; m <= c.chain.n_ions; ++m) {
    const auto series = by_axis(t, "mean_n_mode" + std::to_string(m), Provenance::numeric);
    if (series.size() <= kWindow) return {false, "too few samples"};
    const double start = series.begin()->second->value;
    double sum = 0.0;
    auto it = series.end();
    for (std::size_t k = 0; k < kWindow; ++k) sum += (--it)->second->value;
    const double tail = sum / kWindow;
    ok = ok && tail < start;
    detail += "mode " + std::to_string(m) + ": " + fmt("%.3f", start) + " -> " + fmt("%.3f", tail) + "; ";
  }
  return {ok, detail + "tail window " + std::to_string(kWindow) + " samples, " +
                  std::to_string(c.solver.trajectories) + " trajectories"};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},  {5, criterion5},  {6, criterion6},
      {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}, {11, criterion11},
  };
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
