#pragma once

// Hamiltonians and jump operators of the Stark-shift-gate cooling schemes.
//
// Internal level conventions
//   two-level model:   0 = |down>, 1 = |up>, bare sigma_+ = |up><down|
//   three-level model: 0 = |g1>, 1 = |g2>, 2 = |e>
// Dressed states |+-> = (|0> +- |1>)/sqrt(2) in both models; |+> is the state
// coupled to |e> and the upper dressed state of the cooling drive.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sscool/operator.hpp"
#include "sscool/params.hpp"

namespace sscool {

namespace level {
inline constexpr int down = 0;
inline constexpr int up = 1;
inline constexpr int g1 = 0;
inline constexpr int g2 = 1;
inline constexpr int e = 2;
}  // namespace level

enum class CouplingOrder { exact_exponential, first_order };

struct ModelConfig {
  CouplingOrder coupling_order = CouplingOrder::exact_exponential;
  bool include_recoil = false;
  double recoil_eta = 0.0;  // Lamb-Dicke parameter of the |g_i> <-> |e> photons when recoil is on
  std::optional<int> addressed_ion;
};

/// Largest eta accepted by the first-order coupling.
inline constexpr double kFirstOrderEtaLimit = 0.25;

inline Vector dressed_plus(int internal_dim) {
  Vector v = Vector::Zero(internal_dim);
  v(0) = v(1) = 1.0 / std::numbers::sqrt2;
  return v;
}

inline Vector dressed_minus(int internal_dim) {
  Vector v = Vector::Zero(internal_dim);
  v(0) = 1.0 / std::numbers::sqrt2;
  v(1) = -1.0 / std::numbers::sqrt2;
  return v;
}

namespace detail {

inline void require_layout(const HilbertLayout& layout, int internal_dim, int modes, const char* who) {
  if (layout.internal_dim() != internal_dim || layout.num_modes() != modes) {
    throw LayoutError(std::string(who) + ": needs internal_dim " + std::to_string(internal_dim) +
                      " and " + std::to_string(modes) + " mode(s)");
  }
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

/// Motional factor of the cooling coupling: prod_m exp(i eta_m (a_m + a_m^dagger)),
/// or its first-order expansion 1 + i sum_m eta_m (a_m + a_m^dagger).
inline Matrix motional_coupling(const HilbertLayout& layout, std::span<const double> etas, CouplingOrder order) {
  const int modes = layout.num_modes();
  if (order == CouplingOrder::first_order) {
    Matrix k = Matrix::Identity(layout.motional_dim(), layout.motional_dim());
    for (int m = 0; m < modes; ++m) {
      if (std::abs(etas[m]) > kFirstOrderEtaLimit) {
        throw std::invalid_argument("first-order coupling rejected for eta > 0.25");
      }
      const Matrix a = ladder_matrix(layout.cutoff(m));
      Matrix x = a + a.adjoint();
      Matrix lifted = Matrix::Identity(1, 1);
      for (int q = 0; q < modes; ++q) {
        lifted = kron(lifted, q == m ? x : Matrix(Matrix::Identity(layout.cutoff(q), layout.cutoff(q))));
      }
      k += kI * etas[m] * lifted;
    }
    return k;
  }
  Matrix k = Matrix::Identity(1, 1);
  for (int m = 0; m < modes; ++m) k = kron(k, displacement_matrix(layout.cutoff(m), cplx{etas[m], 0.0}));
  return k;
}

/// Shared by the single-mode and chain builders so that a degenerate chain
/// reproduces the single-mode Hamiltonian bit for bit.
inline Operator three_level_hamiltonian(const HilbertLayout& layout, const PhysicalParams& p,
                                        std::span<const double> mode_freqs, std::span<const double> etas,
                                        const ModelConfig& config) {
  const Index md = layout.motional_dim();
  Matrix h = Matrix::Zero(layout.dim(), layout.dim());
  for (Index i = 0; i < layout.dim(); ++i) {
    double diag = 0.0;
    for (int m = 0; m < layout.num_modes(); ++m) diag += mode_freqs[m] * layout.fock_of(i, m);
    if (layout.internal_of(i) == level::e) diag += p.Delta;
    h(i, i) = diag;
  }
  for (Index s = 0; s < md; ++s) {
    for (int g : {level::g1, level::g2}) {
      h(g * md + s, level::e * md + s) -= p.Omega;
      h(level::e * md + s, g * md + s) -= p.Omega;
    }
  }
  const Matrix k = motional_coupling(layout, etas, config.coupling_order);
  h.block(level::g1 * md, level::g2 * md, md, md) += p.Omega_c * k;
  h.block(level::g2 * md, level::g1 * md, md, md) += p.Omega_c * k.adjoint();
  return Operator(layout, std::move(h));
}

inline std::vector<Operator> three_level_jumps(const HilbertLayout& layout, const PhysicalParams& p,
                                               std::span<const double> recoil_etas, const ModelConfig& config) {
  if (p.Gamma1 < 0.0 || p.Gamma2 < 0.0) throw std::invalid_argument("decay rates must be >= 0");
  const double rates[2] = {2.0 * p.Gamma1, 2.0 * p.Gamma2};
  const int targets[2] = {level::g1, level::g2};
  std::vector<Operator> out;
  for (int c = 0; c < 2; ++c) {
    Operator base = transition(layout, targets[c], level::e);
    if (!config.include_recoil) {
      out.push_back(std::sqrt(rates[c]) * base);
      continue;
    }
    // Recoil along +-k with equal weight; sum of L^dagger L is unchanged.
    for (double sign : {1.0, -1.0}) {
      std::vector<Matrix> factors;
      for (int m = 0; m < layout.num_modes(); ++m) {
        factors.push_back(displacement_matrix(layout.cutoff(m), cplx{sign * recoil_etas[m], 0.0}));
      }
      Matrix internal = Matrix::Zero(layout.internal_dim(), layout.internal_dim());
      internal(targets[c], level::e) = std::sqrt(0.5 * rates[c]);
      out.push_back(tensor_embed(layout, internal, factors));
    }
  }
  return out;
}

}  // namespace detail

/// Two-level ion in a traveling wave, interaction picture w.r.t. atom and phonons:
/// H(t) = Omega (sigma_+ exp(i eta [a e^{-i nu t} + a^dag e^{i nu t}] - i delta t) + h.c.).
class TwoLevelLabHamiltonian {
 public:
  TwoLevelLabHamiltonian(const PhysicalParams& p, HilbertLayout layout, const ModelConfig& config = {})
      : p_(p), layout_(std::move(layout)) {
    detail::require_layout(layout_, 2, 1, "two_level_lab_H");
    const double eta[1] = {p.eta};
    k0_ = detail::motional_coupling(layout_, eta, config.coupling_order);
  }

  const HilbertLayout& layout() const noexcept { return layout_; }

  Operator operator()(double t) const {
    const Index n = layout_.motional_dim();
    // exp(i eta X(t)) = R exp(i eta X(0)) R^dag with R = exp(i nu t a^dag a).
    Matrix k(n, n);
    for (Index c = 0; c < n; ++c) {
      for (Index r = 0; r < n; ++r) k(r, c) = k0_(r, c) * std::exp(kI * (p_.nu * t * static_cast<double>(r - c)));
    }
    const cplx drive = p_.Omega * std::exp(-kI * p_.delta * t);
    Matrix h = Matrix::Zero(2 * n, 2 * n);
    h.block(level::up * n, level::down * n, n, n) = drive * k;
    h.block(level::down * n, level::up * n, n, n) = std::conj(drive) * k.adjoint();
    return Operator(layout_, std::move(h));
  }

 private:
  PhysicalParams p_;
  HilbertLayout layout_;
  Matrix k0_;
};

inline Operator two_level_lab_H(const PhysicalParams& p, const HilbertLayout& layout, double t,
                                const ModelConfig& config = {}) {
  return TwoLevelLabHamiltonian(p, layout, config)(t);
}

/// Resonant Stark-shift-gate Hamiltonian (i eta nu / 2)(s_+ a - s_- a^dag), s_+ = |+><-|.
inline Operator stark_shift_H(const PhysicalParams& p, const HilbertLayout& layout) {
  detail::require_layout(layout, 2, 1, "stark_shift_H");
  const Matrix sp = dressed_plus(2) * dressed_minus(2).adjoint();
  const Matrix a = ladder_matrix(layout.cutoff(0));
  const Matrix term = detail::kron(sp, a);
  const cplx c = kI * (0.5 * p.eta * p.nu);
  return Operator(layout, c * term + std::conj(c) * term.adjoint());
}

/// Three-level continuous scheme in the frame rotating with all three lasers.
inline Operator three_level_rot_H(const PhysicalParams& p, const HilbertLayout& layout,
                                  const ModelConfig& config = {}) {
  detail::require_layout(layout, 3, 1, "three_level_rot_H");
  const double freqs[1] = {p.nu};
  const double etas[1] = {p.eta};
  return detail::three_level_hamiltonian(layout, p, freqs, etas, config);
}

/// L_1 = sqrt(2 Gamma1)|g1><e|, L_2 = sqrt(2 Gamma2)|g2><e|.
inline std::vector<Operator> dissipators(const PhysicalParams& p, const HilbertLayout& layout,
                                         const ModelConfig& config = {}) {
  if (layout.internal_dim() != 3) throw LayoutError("dissipators: needs internal_dim 3");
  std::vector<double> recoil(layout.num_modes(), config.recoil_eta);
  return detail::three_level_jumps(layout, p, recoil, config);
}

/// Axial normal modes of a linear Coulomb crystal in a harmonic trap.
struct ChainSpec {
  int n_ions = 0;
  double nu1 = 1.0;
  std::vector<double> mode_freqs;  // ascending
  Eigen::MatrixXd mode_matrix;     // (ion j, mode m) participation b_{j,m}
  double eta_base = 0.0;

  /// eta_{j,m} = eta_base * b_{j,m} * sqrt(nu1 / nu_m).
  double eta(int ion, int mode) const {
    return eta_base * mode_matrix(ion, mode) * std::sqrt(nu1 / mode_freqs.at(mode));
  }

  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    const auto m = static_cast<Index>(mode_freqs.size());
    if (mode_matrix.rows() != n_ions || mode_matrix.cols() != m) {
      out.emplace_back("mode matrix shape does not match ion/mode count");
      return out;
    }
    if (!std::is_sorted(mode_freqs.begin(), mode_freqs.end())) out.emplace_back("mode frequencies not ascending");
    const Eigen::MatrixXd gram = mode_matrix.transpose() * mode_matrix;
    if ((gram - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-10) {
      out.emplace_back("mode matrix columns are not orthonormal");
    }
    return out;
  }
};

inline constexpr int kMaxChainIons = 10;

/// Equilibrium positions (units of the length scale (e^2/(4 pi eps0 m nu^2))^{1/3})
/// and the axial Hessian, diagonalized into normal modes.
inline ChainSpec chain_modes(int n_ions, double nu1, double eta_base = 0.0) {
  if (n_ions < 1 || n_ions > kMaxChainIons) throw std::invalid_argument("unsupported ion number");
  if (!(nu1 > 0.0)) throw std::invalid_argument("nu1 must be > 0");
  const int n = n_ions;
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i) u(i) = 2.0 * (i - 0.5 * (n - 1)) / std::pow(n, 0.56);

  const auto hessian = [n](const Eigen::VectorXd& x) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double c = 2.0 / std::pow(std::abs(x(i) - x(j)), 3);
        a(i, i) += c;
        a(i, j) = -c;
      }
    }
    return a;
  };

  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd force(n);
    for (int i = 0; i < n; ++i) {
      double f = u(i);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double r = u(i) - u(j);
        f -= (r > 0 ? 1.0 : -1.0) / (r * r);
      }
      force(i) = f;
    }
    if (force.cwiseAbs().maxCoeff() < 1e-14) break;
    u -= hessian(u).ldlt().solve(force);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian(u));
  ChainSpec spec;
  spec.n_ions = n;
  spec.nu1 = nu1;
  spec.eta_base = eta_base;
  spec.mode_matrix = es.eigenvectors();
  for (int m = 0; m < n; ++m) {
    spec.mode_freqs.push_back(nu1 * std::sqrt(es.eigenvalues()(m)));
    // Sign convention: positive component sum, or positive last-ion component for antisymmetric modes.
    auto col = spec.mode_matrix.col(m);
    const double s = col.sum();
    if (s < -1e-12 || (std::abs(s) <= 1e-12 && col(n - 1) < 0.0)) col = -col;
  }
  return spec;
}

struct ChainModel {
  Operator H;
  std::vector<Operator> jumps;
  std::vector<double> etas;  // per-mode Lamb-Dicke parameters of the addressed ion
};

inline constexpr Index kDefaultDimensionBudget = 1024;

/// Addressed three-level ion j in a chain, coupled to every mode m with eta_{j,m}.
inline ChainModel chain_H(const ChainSpec& chain, const PhysicalParams& p, const ModelConfig& config,
                          std::vector<int> cutoffs, Index budget = kDefaultDimensionBudget) {
  if (auto v = chain.violations(); !v.empty()) throw std::invalid_argument("invalid chain: " + v.front());
  if (static_cast<int>(cutoffs.size()) != static_cast<int>(chain.mode_freqs.size())) {
    throw LayoutError("chain_H needs one cutoff per mode");
  }
  HilbertLayout layout(3, std::move(cutoffs));
  if (layout.dim() > budget) {
    throw std::invalid_argument("chain dimension " + std::to_string(layout.dim()) + " exceeds budget " +
                                std::to_string(budget));
  }
  const int ion = config.addressed_ion.value_or(0);
  if (ion < 0 || ion >= chain.n_ions) throw std::invalid_argument("addressed ion out of range");
  std::vector<double> etas;
  std::vector<double> recoil;
  for (int m = 0; m < layout.num_modes(); ++m) {
    etas.push_back(chain.eta(ion, m));
    recoil.push_back(config.recoil_eta * chain.mode_matrix(ion, m) * std::sqrt(chain.nu1 / chain.mode_freqs[m]));
  }
  Operator h = detail::three_level_hamiltonian(layout, p, chain.mode_freqs, etas, config);
  auto jumps = detail::three_level_jumps(layout, p, recoil, config);
  return ChainModel{std::move(h), std::move(jumps), std::move(etas)};
}

}  // namespace sscool
