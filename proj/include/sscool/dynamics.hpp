#pragma once

// Time evolution and steady states of the Lindblad master equation
//   d rho/dt = -i[H, rho] + sum_k (L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho})
// and its quantum-jump unraveling.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sscool/error.hpp"
#include "sscool/operator.hpp"
#include "sscool/params.hpp"
#include "sscool/rng.hpp"

namespace sscool {

struct TimeGrid {
  double t0 = 0.0;
  double t1 = 1.0;
  double dt = 0.01;
  int sample_stride = 1;

  /// 0.05 / (fastest rate among nu, Omega, Omega_c, Gamma, |Delta|).
  static double default_dt(const PhysicalParams& p) {
    const double fastest = std::max({p.nu, std::abs(p.Omega), std::abs(p.Omega_c), p.Gamma(), std::abs(p.Delta)});
    return 0.05 / fastest;
  }

  /// Grid over [t0, t1] with at most `dt` per step and samples roughly every `sample_every`.
  static TimeGrid with_sampling(double t0, double t1, double dt, double sample_every) {
    TimeGrid g{t0, t1, dt, 1};
    g.sample_stride = std::max(1, static_cast<int>(std::llround(sample_every / g.step())));
    return g;
  }

  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (!(std::isfinite(t0) && std::isfinite(t1))) out.emplace_back("time bounds must be finite");
    if (!(t1 > t0)) out.emplace_back("t1 must exceed t0");
    if (!(dt > 0.0) || !std::isfinite(dt)) out.emplace_back("dt must be > 0");
    if (sample_stride < 1) out.emplace_back("sample_stride must be >= 1");
    return out;
  }

  void validate() const {
    if (auto v = violations(); !v.empty()) throw std::invalid_argument("invalid time grid: " + v.front());
  }

  std::int64_t steps() const {
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((t1 - t0) / dt - 1e-9)));
  }
  /// Actual step: (t1 - t0) / steps(), never larger than dt.
  double step() const { return (t1 - t0) / static_cast<double>(steps()); }
  double time_at(std::int64_t k) const { return k == steps() ? t1 : t0 + static_cast<double>(k) * step(); }
  bool is_sample(std::int64_t k) const { return k % sample_stride == 0 || k == steps(); }

  std::vector<std::int64_t> sample_steps() const {
    std::vector<std::int64_t> out;
    for (std::int64_t k = 0; k <= steps(); ++k) {
      if (is_sample(k)) out.push_back(k);
    }
    return out;
  }
};

/// Possibly time-dependent Hamiltonian.
class Hamiltonian {
 public:
  Hamiltonian(Operator h)  // NOLINT(google-explicit-constructor)
      : layout_(h.layout()), constant_(std::move(h)) {}

  Hamiltonian(HilbertLayout layout, std::function<Operator(double)> fn)
      : layout_(std::move(layout)), fn_(std::move(fn)) {}

  bool time_dependent() const noexcept { return static_cast<bool>(fn_); }
  const HilbertLayout& layout() const noexcept { return layout_; }

  Matrix at(double t) const {
    if (!fn_) return constant_->matrix();
    Operator h = fn_(t);
    require_same_layout(layout_, h.layout());
    return h.matrix();
  }

  const Operator& constant() const {
    if (!constant_) throw std::logic_error("Hamiltonian is time dependent");
    return *constant_;
  }

 private:
  HilbertLayout layout_;
  std::optional<Operator> constant_;
  std::function<Operator(double)> fn_;
};

struct SolverDiagnostics {
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;  // smallest eigenvalue over sampled density matrices
  int refinements = 0;          // RK4 step halvings triggered by the Richardson check
};

struct TimeSeries {
  std::vector<double> times;
  std::map<std::string, std::vector<double>> channels;
  std::optional<QuantumState> final_state;
  SolverDiagnostics diagnostics;

  const std::vector<double>& channel(const std::string& name) const {
    auto it = channels.find(name);
    if (it == channels.end()) throw std::out_of_range("no channel named '" + name + "'");
    return it->second;
  }
};

namespace detail {

inline std::string internal_label(int internal_dim, int k) {
  if (internal_dim == 2) return k == 0 ? "down" : "up";
  if (internal_dim == 3) {
    static const char* names[3] = {"g1", "g2", "e"};
    return names[k];
  }
  return std::to_string(k);
}

/// Mean phonon numbers, top-level populations, internal populations and
/// dressed |+->, from product-basis populations plus the sum of rho_{0s,1s}.
inline void record_observables(TimeSeries& ts, const HilbertLayout& layout, const Eigen::VectorXd& pop,
                               cplx coherence01) {
  const Index md = layout.motional_dim();
  for (int m = 0; m < layout.num_modes(); ++m) {
    const int top = layout.cutoff(m) - 1;
    double n = 0.0;
    double p_top = 0.0;
    for (Index i = 0; i < layout.dim(); ++i) {
      const int f = layout.fock_of(i, m);
      n += f * pop(i);
      if (f == top) p_top += pop(i);
    }
    ts.channels["n_" + std::to_string(m)].push_back(n);
    ts.channels["top_" + std::to_string(m)].push_back(p_top);
  }
  double p01[2] = {0.0, 0.0};
  for (int k = 0; k < layout.internal_dim(); ++k) {
    const double p = pop.segment(k * md, md).sum();
    if (k < 2) p01[k] = p;
    ts.channels["p_" + internal_label(layout.internal_dim(), k)].push_back(p);
  }
  ts.channels["p_plus"].push_back(0.5 * (p01[0] + p01[1]) + coherence01.real());
  ts.channels["p_minus"].push_back(0.5 * (p01[0] + p01[1]) - coherence01.real());
}

inline void record_density(TimeSeries& ts, const HilbertLayout& layout, const Matrix& rho, double t) {
  const Index md = layout.motional_dim();
  ts.times.push_back(t);
  record_observables(ts, layout, rho.diagonal().real(), rho.block(0, md, md, md).diagonal().sum());
}

inline void record_ket(TimeSeries& ts, const HilbertLayout& layout, const Vector& psi, double t) {
  const Index md = layout.motional_dim();
  const double norm2 = psi.squaredNorm();
  ts.times.push_back(t);
  const cplx coh = psi.segment(0, md).cwiseProduct(psi.segment(md, md).conjugate()).sum() / norm2;
  record_observables(ts, layout, psi.cwiseAbs2() / norm2, coh);
}

inline Matrix jump_sum(const HilbertLayout& layout, std::span<const Operator> jumps) {
  Matrix s = Matrix::Zero(layout.dim(), layout.dim());
  for (const auto& l : jumps) {
    require_same_layout(layout, l.layout());
    s.noalias() += l.matrix().adjoint() * l.matrix();
  }
  return s;
}

inline bool all_zero(std::span<const Operator> jumps) {
  return std::all_of(jumps.begin(), jumps.end(), [](const Operator& l) { return l.matrix().isZero(0.0); });
}

/// -i (H_eff rho - rho H_eff^dag) + sum L rho L^dag.
inline Matrix lindblad_rhs(const Matrix& h_eff, std::span<const Matrix> jumps, const Matrix& rho) {
  Matrix out = -kI * (h_eff * rho - rho * h_eff.adjoint());
  for (const auto& l : jumps) out.noalias() += l * rho * l.adjoint();
  return out;
}

inline void symmetrize(Matrix& rho) {
  Matrix h = 0.5 * (rho + rho.adjoint());
  rho = std::move(h);
}

}  // namespace detail

/// Vectorized Lindblad generator (column stacking: vec(A X B) = (B^T (x) A) vec(X)).
inline Matrix liouvillian_matrix(const Operator& h, std::span<const Operator> jumps) {
  const HilbertLayout& layout = h.layout();
  const Index d = layout.dim();
  const Matrix h_eff = h.matrix() - 0.5 * kI * detail::jump_sum(layout, jumps);
  const Matrix h_eff_conj = h_eff.conjugate();
  Matrix lv = Matrix::Zero(d * d, d * d);
  // -i (I (x) H_eff) + i (conj(H_eff) (x) I)
  for (Index b = 0; b < d; ++b) {
    lv.block(b * d, b * d, d, d) += -kI * h_eff;
    for (Index c = 0; c < d; ++c) {
      const cplx v = kI * h_eff_conj(b, c);
      if (v == cplx{}) continue;
      for (Index k = 0; k < d; ++k) lv(b * d + k, c * d + k) += v;
    }
  }
  for (const auto& l : jumps) {
    const Matrix& lm = l.matrix();
    const Matrix lc = lm.conjugate();
    for (Index b = 0; b < d; ++b) {
      for (Index c = 0; c < d; ++c) {
        if (lc(b, c) == cplx{}) continue;
        lv.block(b * d, c * d, d, d) += lc(b, c) * lm;
      }
    }
  }
  return lv;
}

enum class Integrator { automatic, rk4, exact };

struct MasterOptions {
  Integrator integrator = Integrator::automatic;
  Index propagator_max_dim = 24;  // largest d for the d^2 x d^2 exact propagator
  int richardson_interval = 100;
  double richardson_tol = 1e-7;
  int max_refinements = 10;
  bool probe_positivity = true;
  TruncationMonitor monitor;
};

namespace detail {

class MasterRecorder {
 public:
  MasterRecorder(TimeSeries& ts, const HilbertLayout& layout, const MasterOptions& opt)
      : ts_(ts), layout_(layout), opt_(opt) {}

  void step_done(Matrix& rho) {
    symmetrize(rho);
    ts_.diagnostics.max_hermiticity_error = std::max(ts_.diagnostics.max_hermiticity_error, hermiticity_error(rho));
  }

  void sample(const Matrix& rho, double t) {
    const double tr_err = std::abs(rho.trace() - cplx{1.0});
    ts_.diagnostics.max_trace_error = std::max(ts_.diagnostics.max_trace_error, tr_err);
    if (opt_.probe_positivity) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
      ts_.diagnostics.min_eigenvalue = std::min(ts_.diagnostics.min_eigenvalue, es.eigenvalues().minCoeff());
    }
    record_density(ts_, layout_, rho, t);
    opt_.monitor.check(layout_, rho.diagonal().real(), t);
  }

 private:
  TimeSeries& ts_;
  const HilbertLayout& layout_;
  const MasterOptions& opt_;
};

}  // namespace detail

/// Integrate the master equation on `grid`, sampling observables every
/// `grid.sample_stride` steps.
///
/// Time-independent problems are propagated exactly between samples (unitary
/// conjugation without jumps; exponential of the vectorized generator when
/// d <= propagator_max_dim). Everything else uses fixed-step RK4 with a
/// half-step Richardson check every `richardson_interval` steps; a failed
/// check halves the step for the rest of the run.
inline TimeSeries evolve_master(const Hamiltonian& h, std::span<const Operator> jumps, const QuantumState& rho0,
                                const TimeGrid& grid, const MasterOptions& opt = {}) {
  grid.validate();
  const HilbertLayout& layout = h.layout();
  require_same_layout(layout, rho0.layout());
  for (const auto& l : jumps) require_same_layout(layout, l.layout());
  if (auto v = rho0.violations(); !v.empty()) throw std::invalid_argument("initial state: " + v.front());

  TimeSeries ts;
  detail::MasterRecorder rec(ts, layout, opt);
  Matrix rho = rho0.density_matrix();
  detail::symmetrize(rho);
  rec.sample(rho, grid.t0);

  const Index d = layout.dim();
  const bool no_jumps = detail::all_zero(jumps);
  Integrator mode = opt.integrator;
  if (mode == Integrator::automatic) {
    mode = (!h.time_dependent() && (no_jumps || d <= opt.propagator_max_dim)) ? Integrator::exact : Integrator::rk4;
  }
  if (mode == Integrator::exact && h.time_dependent()) {
    throw std::invalid_argument("exact propagation needs a time-independent Hamiltonian");
  }

  const auto samples = grid.sample_steps();

  if (mode == Integrator::exact) {
    // Propagators keyed by interval length in steps (at most two distinct lengths).
    std::map<std::int64_t, Matrix> cache;
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    if (no_jumps) es.compute(h.constant().matrix());
    const Matrix lv = no_jumps ? Matrix() : liouvillian_matrix(h.constant(), jumps);
    for (std::size_t s = 1; s < samples.size(); ++s) {
      const std::int64_t len = samples[s] - samples[s - 1];
      auto it = cache.find(len);
      if (it == cache.end()) {
        const double tau = grid.time_at(samples[s]) - grid.time_at(samples[s - 1]);
        Matrix prop;
        if (no_jumps) {
          Vector ph(d);
          for (Index k = 0; k < d; ++k) ph(k) = std::exp(-kI * es.eigenvalues()(k) * tau);
          prop = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
        } else {
          prop = (lv * tau).exp();
        }
        it = cache.emplace(len, std::move(prop)).first;
      }
      if (no_jumps) {
        rho = it->second * rho * it->second.adjoint();
      } else {
        Eigen::Map<Vector> v(rho.data(), d * d);
        Vector next = it->second * v;
        v = next;
      }
      rec.step_done(rho);
      rec.sample(rho, grid.time_at(samples[s]));
    }
    ts.final_state = QuantumState::from_density(layout, rho);
    return ts;
  }

  // RK4
  std::vector<Matrix> lmats;
  for (const auto& l : jumps) lmats.push_back(l.matrix());
  const Matrix decay = detail::jump_sum(layout, jumps);
  const auto h_eff = [&](double t) -> Matrix { return h.at(t) - 0.5 * kI * decay; };
  const auto rk4 = [&](const Matrix& r, double t, double dt) -> Matrix {
    const Matrix h0 = h_eff(t);
    const Matrix hm = h.time_dependent() ? h_eff(t + 0.5 * dt) : h0;
    const Matrix h1 = h.time_dependent() ? h_eff(t + dt) : h0;
    const Matrix k1 = detail::lindblad_rhs(h0, lmats, r);
    const Matrix k2 = detail::lindblad_rhs(hm, lmats, r + 0.5 * dt * k1);
    const Matrix k3 = detail::lindblad_rhs(hm, lmats, r + 0.5 * dt * k2);
    const Matrix k4 = detail::lindblad_rhs(h1, lmats, r + dt * k3);
    return r + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  const double base = grid.step();
  int substeps = 1;
  const std::int64_t n = grid.steps();
  for (std::int64_t k = 0; k < n; ++k) {
    const double t = grid.time_at(k);
    if (opt.richardson_interval > 0 && k % opt.richardson_interval == 0) {
      while (true) {
        const double hs = base / substeps;
        const Matrix full = rk4(rho, t, hs);
        const Matrix half = rk4(rk4(rho, t, 0.5 * hs), t + 0.5 * hs, 0.5 * hs);
        if ((full - half).cwiseAbs().maxCoeff() <= opt.richardson_tol) break;
        if (ts.diagnostics.refinements >= opt.max_refinements) {
          throw SolverError("step-size underflow: Richardson check still failing at dt = " + std::to_string(hs));
        }
        substeps *= 2;
        ++ts.diagnostics.refinements;
      }
    }
    const double hs = base / substeps;
    for (int s = 0; s < substeps; ++s) {
      rho = rk4(rho, t + s * hs, hs);
      rec.step_done(rho);
    }
    if (grid.is_sample(k + 1)) rec.sample(rho, grid.time_at(k + 1));
  }
  ts.final_state = QuantumState::from_density(layout, rho);
  return ts;
}

inline TimeSeries evolve_master(const Hamiltonian& h, const std::vector<Operator>& jumps, const QuantumState& rho0,
                                const TimeGrid& grid, const MasterOptions& opt = {}) {
  return evolve_master(h, std::span<const Operator>(jumps), rho0, grid, opt);
}

enum class SteadyStateMethod { null_space, long_time };

struct SteadyStateResult {
  QuantumState state;
  double residual;  // Frobenius norm of the generator applied to the state
  SteadyStateMethod method;
};

struct SteadyStateOptions {
  std::optional<SteadyStateMethod> method;  // unset: null space when d <= null_space_max_dim
  Index null_space_max_dim = 64;
  double degeneracy_rcond = 1e-13;
  // long-time fallback
  std::optional<QuantumState> initial_state;
  double window = 10.0;
  double tolerance = 1e-10;
  int max_windows = 2000;
};

/// ||L(rho)||_F for the Lindblad generator.
inline double liouvillian_residual(const Operator& h, std::span<const Operator> jumps, const Matrix& rho) {
  std::vector<Matrix> lmats;
  for (const auto& l : jumps) lmats.push_back(l.matrix());
  const Matrix h_eff = h.matrix() - 0.5 * kI * detail::jump_sum(h.layout(), jumps);
  return detail::lindblad_rhs(h_eff, lmats, rho).norm();
}

inline SteadyStateResult steady_state(const Operator& h, std::span<const Operator> jumps,
                                      const SteadyStateOptions& opt = {}) {
  const HilbertLayout& layout = h.layout();
  const Index d = layout.dim();
  for (const auto& l : jumps) require_same_layout(layout, l.layout());
  const SteadyStateMethod method = opt.method.value_or(
      d <= opt.null_space_max_dim ? SteadyStateMethod::null_space : SteadyStateMethod::long_time);

  if (method == SteadyStateMethod::null_space) {
    if (d > opt.null_space_max_dim) throw std::invalid_argument("dimension exceeds null-space budget");
    Matrix lv = liouvillian_matrix(h, jumps);
    // Replace the rho_00 equation by the trace condition.
    lv.row(0).setZero();
    for (Index i = 0; i < d; ++i) lv(0, i * d + i) = 1.0;
    Vector rhs = Vector::Zero(d * d);
    rhs(0) = 1.0;
    Eigen::PartialPivLU<Matrix> lu(lv);
    // The rcond estimate alone misses exactly singular systems; small pivots catch them.
    const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double rcond = std::min(lu.rcond(), pivots.minCoeff() / pivots.maxCoeff());
    if (!(rcond > opt.degeneracy_rcond)) {
      throw SolverError("degenerate steady state: Liouvillian kernel has dimension > 1 (rcond = " +
                        std::to_string(rcond) + ")");
    }
    Vector x = lu.solve(rhs);
    Matrix rho = Eigen::Map<Matrix>(x.data(), d, d);
    detail::symmetrize(rho);
    rho /= rho.trace();
    const double res = liouvillian_residual(h, jumps, rho);
    return {QuantumState::from_density(layout, std::move(rho)), res, SteadyStateMethod::null_space};
  }

  if (!opt.initial_state) throw std::invalid_argument("long-time steady state needs an initial state");
  QuantumState current = opt.initial_state->as_density();
  MasterOptions mopt;
  mopt.probe_positivity = false;
  mopt.monitor.enabled = false;
  const Hamiltonian ham(h);
  for (int w = 0; w < opt.max_windows; ++w) {
    const TimeGrid g{0.0, opt.window, std::min(opt.window, 0.05 / std::max(1.0, h.matrix().cwiseAbs().maxCoeff())), 1 << 30};
    TimeSeries ts = evolve_master(ham, jumps, current, g, mopt);
    const Matrix& next = ts.final_state->rho();
    const double change = (next - current.rho()).cwiseAbs().maxCoeff();
    current = *ts.final_state;
    if (change <= opt.tolerance) {
      const double res = liouvillian_residual(h, jumps, current.rho());
      return {current, res, SteadyStateMethod::long_time};
    }
  }
  throw SolverError("long-time steady state did not converge");
}

inline SteadyStateResult steady_state(const Operator& h, const std::vector<Operator>& jumps,
                                      const SteadyStateOptions& opt = {}) {
  return steady_state(h, std::span<const Operator>(jumps), opt);
}

// ---------------------------------------------------------------------------
// Quantum jumps

struct JumpRecord {
  double time;
  int channel;
};

struct Trajectory {
  std::uint64_t seed = 0;
  TimeSeries series;
  std::vector<JumpRecord> jumps;
};

struct McOptions {
  int localization_depth = 3;  // halvings of dt used to localize a jump
  bool keep_final_state = true;
};

/// Non-Hermitian drift H_eff = H - i/2 sum L^dag L stepped on a dyadic
/// sub-grid of dt / 2^depth. Read-only after construction; shared by all
/// trajectories of an ensemble.
class JumpPropagator {
 public:
  JumpPropagator(const Hamiltonian& h, std::span<const Operator> jumps, const TimeGrid& grid, int depth)
      : h_(h), depth_(depth), h_min_(grid.step() / static_cast<double>(std::int64_t{1} << depth)), t0_(grid.t0) {
    if (depth < 0 || depth > 20) throw std::invalid_argument("localization depth out of range");
    const HilbertLayout& layout = h.layout();
    for (const auto& l : jumps) {
      require_same_layout(layout, l.layout());
      jumps_.push_back(l.matrix());
    }
    decay_ = detail::jump_sum(layout, jumps);
    if (!h.time_dependent()) {
      const Matrix h_eff = h.constant().matrix() - 0.5 * kI * decay_;
      levels_.push_back((h_eff * (-kI * h_min_)).exp());
      for (int j = 1; j <= depth_; ++j) levels_.push_back(levels_.back() * levels_.back());
    }
  }

  int depth() const noexcept { return depth_; }
  double time_of(std::int64_t units) const { return t0_ + static_cast<double>(units) * h_min_; }
  std::span<const Matrix> jump_matrices() const { return jumps_; }

  /// Advance psi from unit position `pos` by 2^level units.
  Vector step(const Vector& psi, std::int64_t pos, int level) const {
    if (!h_.time_dependent()) return levels_[level] * psi;
    const double t = time_of(pos);
    const double dt = h_min_ * static_cast<double>(std::int64_t{1} << level);
    const auto f = [&](double tt, const Vector& v) -> Vector {
      return -kI * ((h_.at(tt) - 0.5 * kI * decay_) * v);
    };
    const Vector k1 = f(t, psi);
    const Vector k2 = f(t + 0.5 * dt, psi + 0.5 * dt * k1);
    const Vector k3 = f(t + 0.5 * dt, psi + 0.5 * dt * k2);
    const Vector k4 = f(t + dt, psi + dt * k3);
    return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

 private:
  const Hamiltonian& h_;
  int depth_;
  double h_min_;
  double t0_;
  std::vector<Matrix> jumps_;
  Matrix decay_;
  std::vector<Matrix> levels_;
};

namespace detail {

inline Trajectory run_trajectory(const JumpPropagator& prop, const HilbertLayout& layout, const Vector& psi0,
                                 const TimeGrid& grid, std::uint64_t seed, const McOptions& opt) {
  Trajectory traj;
  traj.seed = seed;
  TrajectoryRng rng(seed);
  Vector psi = psi0;
  double threshold = rng.uniform_open0();
  const int depth = prop.depth();
  const std::int64_t per_step = std::int64_t{1} << depth;
  int cap = depth;
  std::int64_t pos = 0;
  record_ket(traj.series, layout, psi, grid.t0);

  const auto jumps = prop.jump_matrices();
  const std::int64_t n = grid.steps();
  for (std::int64_t k = 0; k < n; ++k) {
    const std::int64_t target = (k + 1) * per_step;
    while (pos < target) {
      int j = cap;
      while (j > 0 && (pos % (std::int64_t{1} << j) != 0 || pos + (std::int64_t{1} << j) > target)) --j;
      Vector cand = prop.step(psi, pos, j);
      const double n2 = cand.squaredNorm();
      if (!std::isfinite(n2)) throw SolverError("non-finite state norm (step too large)");
      if (n2 > threshold) {
        psi = std::move(cand);
        pos += std::int64_t{1} << j;
        continue;
      }
      if (j > 0) {
        cap = j - 1;
        continue;
      }
      // Jump at the end of the minimal step.
      psi = std::move(cand);
      pos += 1;
      if (n2 < 1e-280) throw SolverError("state norm underflow between samples (step too large)");
      std::vector<double> w(jumps.size());
      std::vector<Vector> out(jumps.size());
      double total = 0.0;
      for (std::size_t c = 0; c < jumps.size(); ++c) {
        out[c] = jumps[c] * psi;
        total += w[c] = out[c].squaredNorm();
      }
      if (!(total > 0.0)) throw SolverError("norm decayed but no jump channel is active");
      const double pick = rng.uniform() * total;
      std::size_t ch = jumps.size();
      double acc = 0.0;
      for (std::size_t c = 0; c < jumps.size(); ++c) {
        if (w[c] == 0.0) continue;
        acc += w[c];
        ch = c;
        if (pick < acc) break;
      }
      psi = out[ch] / std::sqrt(w[ch]);
      traj.jumps.push_back({prop.time_of(pos), static_cast<int>(ch)});
      threshold = rng.uniform_open0();
      cap = depth;
    }
    if (grid.is_sample(k + 1)) record_ket(traj.series, layout, psi, grid.time_at(k + 1));
  }
  if (opt.keep_final_state) traj.series.final_state = QuantumState::from_ket(layout, psi / psi.norm());
  return traj;
}

}  // namespace detail

/// One quantum-jump trajectory (waiting-time method): the unnormalized state
/// follows H_eff until its squared norm falls below a pre-drawn uniform
/// threshold; the jump channel is drawn proportional to ||L_k psi||^2.
inline Trajectory mc_evolve(const Hamiltonian& h, std::span<const Operator> jumps, const QuantumState& psi0,
                            const TimeGrid& grid, std::uint64_t seed, const McOptions& opt = {}) {
  grid.validate();
  require_same_layout(h.layout(), psi0.layout());
  if (auto v = psi0.violations(); !v.empty()) throw std::invalid_argument("initial state: " + v.front());
  JumpPropagator prop(h, jumps, grid, opt.localization_depth);
  return detail::run_trajectory(prop, h.layout(), psi0.ket(), grid, seed, opt);
}

inline Trajectory mc_evolve(const Hamiltonian& h, const std::vector<Operator>& jumps, const QuantumState& psi0,
                            const TimeGrid& grid, std::uint64_t seed, const McOptions& opt = {}) {
  return mc_evolve(h, std::span<const Operator>(jumps), psi0, grid, seed, opt);
}

struct TrajectoryEnsemble {
  std::vector<std::uint64_t> seeds;      // ascending
  std::vector<Trajectory> trajectories;  // same order as seeds
  TimeSeries mean;
  std::map<std::string, std::vector<double>> standard_error;

  const std::vector<double>& error(const std::string& name) const {
    auto it = standard_error.find(name);
    if (it == standard_error.end()) throw std::out_of_range("no channel named '" + name + "'");
    return it->second;
  }
};

struct EnsembleOptions {
  McOptions mc;
  unsigned threads = 0;  // 0: hardware concurrency
  TruncationMonitor monitor;  // applied to the ensemble-mean top-level populations
};

/// Mean and standard error (sample sigma / sqrt(N)) over trajectories, always
/// accumulated in ascending seed order.
inline TrajectoryEnsemble aggregate(std::vector<Trajectory> trajs) {
  std::sort(trajs.begin(), trajs.end(), [](const Trajectory& a, const Trajectory& b) { return a.seed < b.seed; });
  TrajectoryEnsemble ens;
  const auto n = static_cast<double>(trajs.size());
  ens.mean.times = trajs.front().series.times;
  for (const auto& [name, first] : trajs.front().series.channels) {
    std::vector<double> mean(first.size(), 0.0);
    std::vector<double> se(first.size(), 0.0);
    for (std::size_t s = 0; s < first.size(); ++s) {
      double sum = 0.0;
      for (const auto& t : trajs) sum += t.series.channels.at(name)[s];
      const double m = sum / n;
      double ss = 0.0;
      for (const auto& t : trajs) {
        const double dv = t.series.channels.at(name)[s] - m;
        ss += dv * dv;
      }
      mean[s] = m;
      se[s] = trajs.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    }
    ens.mean.channels.emplace(name, std::move(mean));
    ens.standard_error.emplace(name, std::move(se));
  }
  for (const auto& t : trajs) ens.seeds.push_back(t.seed);
  ens.trajectories = std::move(trajs);
  return ens;
}

inline TrajectoryEnsemble ensemble_run(const Hamiltonian& h, std::span<const Operator> jumps,
                                       const QuantumState& psi0, const TimeGrid& grid,
                                       std::span<const std::uint64_t> seeds, const EnsembleOptions& opt = {}) {
  if (seeds.empty()) throw std::invalid_argument("ensemble needs at least one seed");
  grid.validate();
  require_same_layout(h.layout(), psi0.layout());
  if (auto v = psi0.violations(); !v.empty()) throw std::invalid_argument("initial state: " + v.front());
  const JumpPropagator prop(h, jumps, grid, opt.mc.localization_depth);

  std::vector<std::optional<Trajectory>> results(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        results[i] = detail::run_trajectory(prop, h.layout(), psi0.ket(), grid, seeds[i], opt.mc);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, seeds.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const TruncationError&) {
      throw;
    } catch (const std::exception& e) {
      throw SolverError("trajectory with seed " + std::to_string(seeds[i]) + ": " + e.what());
    }
  }
  std::vector<Trajectory> trajs;
  trajs.reserve(seeds.size());
  for (auto& r : results) trajs.push_back(std::move(*r));
  TrajectoryEnsemble ens = aggregate(std::move(trajs));

  const HilbertLayout& layout = h.layout();
  if (opt.monitor.enabled) {
    for (int m = 0; m < layout.num_modes(); ++m) {
      const auto& top = ens.mean.channel("top_" + std::to_string(m));
      for (std::size_t s = 0; s < top.size(); ++s) {
        if (top[s] > opt.monitor.threshold) throw TruncationError(ens.mean.times[s], m, top[s]);
      }
    }
  }
  return ens;
}

inline TrajectoryEnsemble ensemble_run(const Hamiltonian& h, const std::vector<Operator>& jumps,
                                       const QuantumState& psi0, const TimeGrid& grid,
                                       const std::vector<std::uint64_t>& seeds, const EnsembleOptions& opt = {}) {
  return ensemble_run(h, std::span<const Operator>(jumps), psi0, grid, std::span<const std::uint64_t>(seeds), opt);
}

/// Duration from the last downward crossing of n_start to the first crossing
/// of n_end that follows it, with linear interpolation between samples.
inline double cooling_time(const TimeSeries& series, double n_start = 1.0, double n_end = 0.01,
                           const std::string& channel = "n_0") {
  const auto& t = series.times;
  const auto& n = series.channel(channel);
  if (t.size() != n.size() || t.size() < 2) throw std::invalid_argument("series too short");
  const auto cross = [&](std::size_t k, double level) {
    if (n[k] == n[k + 1]) return t[k + 1];
    const double f = std::clamp((n[k] - level) / (n[k] - n[k + 1]), 0.0, 1.0);
    return t[k] + f * (t[k + 1] - t[k]);
  };
  // A series that starts at n_start up to rounding counts as crossing it at t0.
  const double start_level = n_start * (1.0 - 1e-9);
  std::optional<std::size_t> k_end;
  for (std::size_t k = 0; k + 1 < n.size(); ++k) {
    if (n[k] > n_end && n[k + 1] <= n_end) {
      k_end = k;
      break;
    }
  }
  if (!k_end) throw SolverError("cooling_time: n_end threshold never reached");
  std::optional<std::size_t> k_start;
  for (std::size_t k = 0; k <= *k_end; ++k) {
    if (n[k] >= start_level && n[k + 1] < n_start) k_start = k;
  }
  if (!k_start) throw SolverError("cooling_time: series never crosses n_start before n_end");
  return cross(*k_end, n_end) - cross(*k_start, n_start);
}

}  // namespace sscool
