#pragma once

// Truncated Fock-space and multi-level operator algebra.
//
// Basis ordering: internal state is the most significant factor, followed by
// the motional modes in order, so
//   index = internal * (N_0 N_1 ... N_{M-1}) + n_0 * (N_1 ... N_{M-1}) + ... + n_{M-1}.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sscool/error.hpp"

namespace sscool {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr cplx kI{0.0, 1.0};

class HilbertLayout {
 public:
  HilbertLayout(int internal_dim, std::vector<int> mode_cutoffs)
      : internal_dim_(internal_dim), cutoffs_(std::move(mode_cutoffs)) {
    if (internal_dim_ < 2) throw LayoutError("internal_dim must be >= 2");
    for (int c : cutoffs_) {
      if (c < 2) throw LayoutError("every Fock cutoff must be >= 2");
    }
    strides_.assign(cutoffs_.size(), 1);
    motional_dim_ = 1;
    for (std::size_t m = cutoffs_.size(); m-- > 0;) {
      strides_[m] = motional_dim_;
      motional_dim_ *= cutoffs_[m];
    }
  }

  int internal_dim() const noexcept { return internal_dim_; }
  const std::vector<int>& mode_cutoffs() const noexcept { return cutoffs_; }
  int num_modes() const noexcept { return static_cast<int>(cutoffs_.size()); }
  int cutoff(int mode) const { return cutoffs_.at(check_mode(mode)); }
  Index motional_dim() const noexcept { return motional_dim_; }
  Index dim() const noexcept { return internal_dim_ * motional_dim_; }
  Index stride(int mode) const { return strides_.at(check_mode(mode)); }

  int internal_of(Index i) const noexcept { return static_cast<int>(i / motional_dim_); }
  int fock_of(Index i, int mode) const {
    return static_cast<int>((i / strides_[check_mode(mode)]) % cutoffs_[mode]);
  }

  Index index(int internal, std::span<const int> fock) const {
    if (internal < 0 || internal >= internal_dim_) throw LayoutError("internal index out of range");
    if (fock.size() != cutoffs_.size()) throw LayoutError("Fock occupation list has wrong length");
    Index i = internal * motional_dim_;
    for (std::size_t m = 0; m < cutoffs_.size(); ++m) {
      if (fock[m] < 0 || fock[m] >= cutoffs_[m]) throw LayoutError("Fock index out of range");
      i += fock[m] * strides_[m];
    }
    return i;
  }

  int check_mode(int mode) const {
    if (mode < 0 || mode >= num_modes()) {
      throw LayoutError("mode index " + std::to_string(mode) + " out of range");
    }
    return mode;
  }

  friend bool operator==(const HilbertLayout& a, const HilbertLayout& b) {
    return a.internal_dim_ == b.internal_dim_ && a.cutoffs_ == b.cutoffs_;
  }

 private:
  int internal_dim_;
  std::vector<int> cutoffs_;
  std::vector<Index> strides_;
  Index motional_dim_ = 1;
};

inline void require_same_layout(const HilbertLayout& a, const HilbertLayout& b) {
  if (!(a == b)) throw LayoutError("layout mismatch");
}

/// Max absolute entry of M - M^dagger.
inline double hermiticity_error(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Dense operator on a layout.
class Operator {
 public:
  explicit Operator(HilbertLayout layout)
      : layout_(std::move(layout)), m_(Matrix::Zero(layout_.dim(), layout_.dim())) {}

  Operator(HilbertLayout layout, Matrix m) : layout_(std::move(layout)), m_(std::move(m)) {
    if (m_.rows() != layout_.dim() || m_.cols() != layout_.dim()) {
      throw LayoutError("matrix size does not match layout dimension");
    }
  }

  static Operator identity(const HilbertLayout& layout) {
    return Operator(layout, Matrix::Identity(layout.dim(), layout.dim()));
  }

  const HilbertLayout& layout() const noexcept { return layout_; }
  const Matrix& matrix() const noexcept { return m_; }
  Matrix& matrix() noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }

  Operator adjoint() const { return Operator(layout_, m_.adjoint()); }
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_error(m_) <= tol; }

  Operator& operator+=(const Operator& o) {
    require_same_layout(layout_, o.layout_);
    m_ += o.m_;
    return *this;
  }
  Operator& operator-=(const Operator& o) {
    require_same_layout(layout_, o.layout_);
    m_ -= o.m_;
    return *this;
  }
  Operator& operator*=(cplx s) {
    m_ *= s;
    return *this;
  }

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(Operator a, cplx s) { return a *= s; }
  friend Operator operator*(cplx s, Operator a) { return a *= s; }
  friend Operator operator*(const Operator& a, const Operator& b) {
    require_same_layout(a.layout_, b.layout_);
    return Operator(a.layout_, a.m_ * b.m_);
  }

 private:
  HilbertLayout layout_;
  Matrix m_;
};

inline Operator adjoint(const Operator& op) { return op.adjoint(); }

inline Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

/// Lift a single-mode matrix (cutoff x cutoff) to the full layout.
inline Operator embed_mode(const HilbertLayout& layout, int mode, const Matrix& single) {
  layout.check_mode(mode);
  const int n = layout.cutoff(mode);
  if (single.rows() != n || single.cols() != n) throw LayoutError("single-mode matrix has wrong size");
  const Index stride = layout.stride(mode);
  const Index d = layout.dim();
  Matrix m = Matrix::Zero(d, d);
  for (Index col = 0; col < d; ++col) {
    const int nc = layout.fock_of(col, mode);
    const Index base = col - nc * stride;
    for (int nr = 0; nr < n; ++nr) {
      const cplx v = single(nr, nc);
      if (v != cplx{}) m(base + nr * stride, col) = v;
    }
  }
  return Operator(layout, std::move(m));
}

/// Lift an internal_dim x internal_dim matrix to the full layout (identity on modes).
inline Operator embed_internal(const HilbertLayout& layout, const Matrix& internal) {
  const int k = layout.internal_dim();
  if (internal.rows() != k || internal.cols() != k) throw LayoutError("internal matrix has wrong size");
  const Index md = layout.motional_dim();
  Matrix m = Matrix::Zero(layout.dim(), layout.dim());
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const cplx v = internal(i, j);
      if (v == cplx{}) continue;
      for (Index s = 0; s < md; ++s) m(i * md + s, j * md + s) = v;
    }
  }
  return Operator(layout, std::move(m));
}

/// Kronecker product: internal factor first, then one matrix per mode.
inline Operator tensor_embed(const HilbertLayout& layout, const Matrix& internal,
                             std::span<const Matrix> per_mode) {
  if (static_cast<int>(per_mode.size()) != layout.num_modes()) {
    throw LayoutError("tensor_embed needs one factor per mode");
  }
  if (internal.rows() != layout.internal_dim() || internal.cols() != layout.internal_dim()) {
    throw LayoutError("internal factor has wrong size");
  }
  Matrix acc = internal;
  for (int m = 0; m < layout.num_modes(); ++m) {
    const Matrix& f = per_mode[m];
    if (f.rows() != layout.cutoff(m) || f.cols() != layout.cutoff(m)) {
      throw LayoutError("mode factor has wrong size");
    }
    Matrix next(acc.rows() * f.rows(), acc.cols() * f.cols());
    for (Index i = 0; i < acc.rows(); ++i) {
      for (Index j = 0; j < acc.cols(); ++j) {
        next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = acc(i, j) * f;
      }
    }
    acc = std::move(next);
  }
  return Operator(layout, std::move(acc));
}

/// Single-mode ladder operator on a cutoff-N Fock space: <n-1|a|n> = sqrt(n).
inline Matrix ladder_matrix(int cutoff) {
  Matrix a = Matrix::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline Operator annihilation(const HilbertLayout& layout, int mode) {
  return embed_mode(layout, mode, ladder_matrix(layout.cutoff(mode)));
}

inline Operator creation(const HilbertLayout& layout, int mode) {
  return annihilation(layout, mode).adjoint();
}

inline Operator number(const HilbertLayout& layout, int mode) {
  layout.check_mode(mode);
  Matrix m = Matrix::Zero(layout.dim(), layout.dim());
  for (Index i = 0; i < layout.dim(); ++i) m(i, i) = layout.fock_of(i, mode);
  return Operator(layout, std::move(m));
}

/// |i><j| on the internal factor, identity on the modes.
inline Operator transition(const HilbertLayout& layout, int i, int j) {
  const int k = layout.internal_dim();
  if (i < 0 || j < 0 || i >= k || j >= k) throw LayoutError("internal transition index out of range");
  Matrix t = Matrix::Zero(k, k);
  t(i, j) = 1.0;
  return embed_internal(layout, t);
}

namespace detail {

// exp(iX) for Hermitian X.
inline Matrix expi_hermitian(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(x);
  if (es.info() != Eigen::Success) throw SolverError("eigendecomposition failed");
  const Eigen::VectorXd& w = es.eigenvalues();
  Vector phases(w.size());
  for (Index k = 0; k < w.size(); ++k) phases(k) = std::exp(kI * w(k));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

/// exp(i(z a + z* a^dagger)) from the generator truncated at `cutoff` levels:
/// exactly unitary, with matrix elements accurate away from the top levels.
inline Matrix displacement_matrix(int cutoff, cplx z) {
  const Matrix a = ladder_matrix(cutoff);
  const Matrix x = z * a + std::conj(z) * a.adjoint();
  return detail::expi_hermitian(x);
}

inline Operator displacement_factor(const HilbertLayout& layout, int mode, cplx z) {
  return embed_mode(layout, mode, displacement_matrix(layout.cutoff(mode), z));
}

enum class StateKind { ket, density };

/// Pure ket or density matrix on a layout.
class QuantumState {
 public:
  static QuantumState from_ket(HilbertLayout layout, Vector psi) {
    if (psi.size() != layout.dim()) throw LayoutError("ket size does not match layout");
    QuantumState s(std::move(layout), StateKind::ket);
    s.ket_ = std::move(psi);
    return s;
  }

  static QuantumState from_density(HilbertLayout layout, Matrix rho) {
    if (rho.rows() != layout.dim() || rho.cols() != layout.dim()) {
      throw LayoutError("density matrix size does not match layout");
    }
    QuantumState s(std::move(layout), StateKind::density);
    s.rho_ = std::move(rho);
    return s;
  }

  /// Product basis ket |internal> (x) |n_0, n_1, ...>.
  static QuantumState basis(const HilbertLayout& layout, int internal, std::span<const int> fock) {
    Vector psi = Vector::Zero(layout.dim());
    psi(layout.index(internal, fock)) = 1.0;
    return from_ket(layout, std::move(psi));
  }

  /// Internal amplitudes (length internal_dim) times a Fock basis state.
  static QuantumState product(const HilbertLayout& layout, const Vector& internal,
                              std::span<const int> fock) {
    if (internal.size() != layout.internal_dim()) throw LayoutError("internal amplitude size mismatch");
    Vector psi = Vector::Zero(layout.dim());
    for (int k = 0; k < layout.internal_dim(); ++k) psi(layout.index(k, fock)) = internal(k);
    return from_ket(layout, std::move(psi));
  }

  const HilbertLayout& layout() const noexcept { return layout_; }
  StateKind kind() const noexcept { return kind_; }
  bool is_ket() const noexcept { return kind_ == StateKind::ket; }
  const Vector& ket() const {
    if (!is_ket()) throw LayoutError("state is a density matrix, not a ket");
    return ket_;
  }
  const Matrix& rho() const {
    if (is_ket()) throw LayoutError("state is a ket, not a density matrix");
    return rho_;
  }

  Matrix density_matrix() const { return is_ket() ? Matrix(ket_ * ket_.adjoint()) : rho_; }
  QuantumState as_density() const { return from_density(layout_, density_matrix()); }

  /// Diagonal of the density matrix in the product basis.
  Eigen::VectorXd populations() const {
    if (is_ket()) return ket_.cwiseAbs2();
    return rho_.diagonal().real();
  }

  /// Empty when the state satisfies the ket/density invariants.
  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (is_ket()) {
      if (std::abs(ket_.norm() - 1.0) > 1e-10) out.emplace_back("ket is not normalized");
      return out;
    }
    if (hermiticity_error(rho_) > 1e-10) out.emplace_back("density matrix is not Hermitian");
    if (std::abs(rho_.trace() - cplx{1.0}) > 1e-8) out.emplace_back("density matrix trace is not 1");
    const Matrix h = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8) out.emplace_back("density matrix has a negative eigenvalue");
    return out;
  }

  void validate() const {
    auto v = violations();
    if (!v.empty()) throw LayoutError("invalid state: " + v.front());
  }

 private:
  QuantumState(HilbertLayout layout, StateKind kind) : layout_(std::move(layout)), kind_(kind) {}

  HilbertLayout layout_;
  StateKind kind_;
  Vector ket_;
  Matrix rho_;
};

/// Thermal occupation of one mode, Fock states elsewhere given by `fock`
/// (the entry for `mode` is ignored), internal state `internal` (a ket).
inline QuantumState thermal_state(const HilbertLayout& layout, const Vector& internal, int mode,
                                  double mean_n, std::span<const int> fock) {
  layout.check_mode(mode);
  if (mean_n < 0.0) throw LayoutError("thermal mean occupation must be >= 0");
  const int n_cut = layout.cutoff(mode);
  std::vector<double> p(n_cut);
  const double ratio = mean_n / (1.0 + mean_n);
  double norm = 0.0;
  for (int n = 0; n < n_cut; ++n) norm += p[n] = std::pow(ratio, n);
  Matrix rho = Matrix::Zero(layout.dim(), layout.dim());
  std::vector<int> occ(fock.begin(), fock.end());
  for (int n = 0; n < n_cut; ++n) {
    occ[mode] = n;
    const Vector psi = QuantumState::product(layout, internal, occ).ket();
    rho += (p[n] / norm) * psi * psi.adjoint();
  }
  return QuantumState::from_density(layout, std::move(rho));
}

inline cplx expectation(const QuantumState& state, const Operator& op) {
  require_same_layout(state.layout(), op.layout());
  if (state.is_ket()) return state.ket().dot(op.matrix() * state.ket());
  return (state.rho().transpose().cwiseProduct(op.matrix())).sum();
}

/// Population of the highest kept Fock level of `mode`.
inline double top_level_population(const QuantumState& state, int mode) {
  const HilbertLayout& layout = state.layout();
  const int top = layout.cutoff(mode) - 1;
  const Eigen::VectorXd pop = state.populations();
  double p = 0.0;
  for (Index i = 0; i < layout.dim(); ++i) {
    if (layout.fock_of(i, mode) == top) p += pop(i);
  }
  return p;
}

struct TruncationMonitor {
  double threshold = 1e-4;
  bool enabled = true;

  /// Throws TruncationError when any mode's top level exceeds the threshold.
  void check(const HilbertLayout& layout, const Eigen::VectorXd& populations, double time) const {
    if (!enabled) return;
    for (int m = 0; m < layout.num_modes(); ++m) {
      const int top = layout.cutoff(m) - 1;
      double p = 0.0;
      for (Index i = 0; i < layout.dim(); ++i) {
        if (layout.fock_of(i, m) == top) p += populations(i);
      }
      if (p > threshold) throw TruncationError(time, m, p);
    }
  }
};

}  // namespace sscool
