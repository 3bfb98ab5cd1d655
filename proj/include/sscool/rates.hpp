#pragma once

// Closed-form Lamb-Dicke rate theory of the continuous scheme.
//
// Gamma below always means Gamma1 + Gamma2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "sscool/dynamics.hpp"
#include "sscool/error.hpp"
#include "sscool/params.hpp"

#if !defined(NDEBUG) && !defined(SSCOOL_CROSSCHECK)
#define SSCOOL_CROSSCHECK 1
#endif

namespace sscool {

namespace detail {

inline double a_minus_denominator(double gamma, double omega, double nu, double delta_e, double omega_c) {
  const double detune = nu - 2.0 * omega_c;
  const double bracket = 2.0 * omega * omega + detune * (delta_e - nu + omega_c);
  return gamma * gamma * detune * detune + bracket * bracket;
}

inline double a_minus_at(const PhysicalParams& p, double nu) {
  const double gamma = p.Gamma();
  const double den = a_minus_denominator(gamma, p.Omega, nu, p.Delta, p.Omega_c);
  const double num = 2.0 * gamma * p.Omega * p.Omega * p.Omega_c * p.Omega_c;
  if (p.Omega == 0.0 || p.Omega_c == 0.0) return 0.0;  // no repump or no cooling drive
  if (den == 0.0) throw std::domain_error("rate coefficient has a singular denominator");
  return num / den;
}

}  // namespace detail

/// Phonon-loss rate density A_-.
inline double A_minus(const PhysicalParams& p) { return detail::a_minus_at(p, p.nu); }

/// Phonon-gain rate density A_+ = A_-(nu -> -nu).
inline double A_plus(const PhysicalParams& p) { return detail::a_minus_at(p, -p.nu); }

/// Explicit rational form of the steady-state occupation.
inline double n_final_explicit(const PhysicalParams& p) {
  const double g = p.Gamma();
  const double w = p.Omega;
  const double oc = p.Omega_c;
  const double num = detail::a_minus_denominator(g, w, p.nu, p.Delta, oc);
  const double den =
      4.0 * p.nu * (2.0 * oc * g * g + (p.Delta + 3.0 * oc) * (p.nu * p.nu + 2.0 * (oc * (p.Delta + oc) - w * w)));
  return num / den;
}

/// Steady-state mean phonon number A_+ / (A_- - A_+); throws in the heating regime.
inline double n_final(const PhysicalParams& p) {
  const double am = A_minus(p);
  const double ap = A_plus(p);
  if (!(am > ap)) throw std::domain_error("no cooling: A_- <= A_+");
  const double n = ap / (am - ap);
#if SSCOOL_CROSSCHECK
  const double alt = n_final_explicit(p);
  if (std::abs(alt - n) > 1e-8 * std::max(std::abs(n), 1e-300)) {
    throw std::logic_error("n_final: ratio and explicit forms disagree");
  }
#endif
  return n;
}

/// Signed cooling rate eta^2 (A_- - A_+); negative means heating.
inline double cooling_rate(const PhysicalParams& p) { return p.eta * p.eta * (A_minus(p) - A_plus(p)); }

struct RateCoefficients {
  double A_minus = 0.0;
  double A_plus = 0.0;
  double W = 0.0;
  double n_ss = std::numeric_limits<double>::infinity();
  bool cooling = false;
};

inline RateCoefficients rate_coefficients(const PhysicalParams& p) {
  RateCoefficients r;
  r.A_minus = A_minus(p);
  r.A_plus = A_plus(p);
  r.W = p.eta * p.eta * (r.A_minus - r.A_plus);
  r.cooling = r.A_minus > r.A_plus;
  if (r.cooling) r.n_ss = r.A_plus / (r.A_minus - r.A_plus);
  return r;
}

/// Cooling rate with Omega_c forced to nu/2.
inline double W_at_resonance(const PhysicalParams& p) {
  const double g = p.Gamma();
  const double nu = p.nu;
  const double w2 = p.Omega * p.Omega;
  const double b = 3.0 * nu * nu + 2.0 * p.Delta * nu - 2.0 * w2;
  return 0.125 * g * p.eta * p.eta * nu * nu * w2 * (1.0 / (w2 * w2) - 4.0 / (4.0 * g * g * nu * nu + b * b));
}

/// Steady-state occupation with Omega_c forced to nu/2.
inline double n_at_resonance(const PhysicalParams& p) {
  const double g = p.Gamma();
  const double nu = p.nu;
  const double w2 = p.Omega * p.Omega;
  const double inner = nu * nu + 2.0 * (0.5 * (p.Delta + 0.5 * nu) * nu - w2);
  return w2 * w2 / (nu * (nu * g * g + (p.Delta + 1.5 * nu) * inner));
}

/// Stark-gate duration pi / (eta Omega_c) quoted alongside the rate.
inline double gate_time(const PhysicalParams& p) { return std::numbers::pi / (p.eta * p.Omega_c); }

struct ValidityReport {
  double gamma_ratio = 0.0;  // Gamma nu eta / Omega^2
  double nu_ratio = 0.0;     // nu^2 eta / Omega^2
  double delta_ratio = 0.0;  // |Delta| nu eta / Omega^2
  bool in_lamb_dicke_validity = false;
  bool cooling_region = false;
  double omega_threshold = std::numeric_limits<double>::infinity();  // largest Omega inside the region
};

/// Largest Omega with A_- > A_+ at Omega_c = nu/2:
/// Omega^2 <= nu (4 Gamma^2 + 4 Delta^2 + 9 nu^2 + 12 Delta nu) / (4 (2 Delta + 3 nu)).
inline double cooling_region_threshold(const PhysicalParams& p) {
  const double s = 2.0 * p.Delta + 3.0 * p.nu;
  if (s <= 0.0) return std::numeric_limits<double>::infinity();
  const double g = p.Gamma();
  return std::sqrt(p.nu * (4.0 * g * g + 4.0 * p.Delta * p.Delta + 9.0 * p.nu * p.nu + 12.0 * p.Delta * p.nu) /
                   (4.0 * s));
}

inline ValidityReport validity(const PhysicalParams& p) {
  if (p.Omega == 0.0) throw std::domain_error("validity ratios need Omega != 0");
  const double w2 = p.Omega * p.Omega;
  ValidityReport r;
  r.gamma_ratio = p.Gamma() * p.nu * p.eta / w2;
  r.nu_ratio = p.nu * p.nu * p.eta / w2;
  r.delta_ratio = std::abs(p.Delta) * p.nu * p.eta / w2;
  r.in_lamb_dicke_validity = r.gamma_ratio <= 1.0 && r.nu_ratio <= 1.0 && r.delta_ratio <= 1.0;
  r.omega_threshold = cooling_region_threshold(p);
  r.cooling_region = std::abs(p.Omega) <= r.omega_threshold;
  return r;
}

/// Resolved-sideband reference occupation (alpha + 1/4)(Gamma/nu)^2.
inline double sideband_reference(double gamma, double nu, double alpha) {
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be > 0");
  return (alpha + 0.25) * (gamma / nu) * (gamma / nu);
}

struct ScanPoint {
  double Delta;
  double Gamma;
  double n_final;  // +inf outside the cooling regime
  double W;
};

/// n_final and W over a (Delta, Gamma) grid; Gamma split symmetrically.
inline std::vector<ScanPoint> scan_delta_gamma(PhysicalParams p, const std::vector<double>& deltas,
                                               const std::vector<double>& gammas) {
  std::vector<ScanPoint> out;
  for (double d : deltas) {
    for (double g : gammas) {
      p.Delta = d;
      p.set_Gamma(g);
      const RateCoefficients r = rate_coefficients(p);
      out.push_back({d, g, r.n_ss, r.W});
    }
  }
  return out;
}

struct RateEquationSeries {
  std::vector<double> times;
  std::vector<std::vector<double>> distributions;
  std::vector<double> mean;
  double max_norm_error = 0.0;
  double min_probability = 0.0;
};

inline constexpr int kDefaultRateEqNmax = 60;
inline constexpr double kRateEqBoundaryGuard = 1e-6;

/// Phonon birth-death chain
///   dP(n)/dt = eta^2 (A_-[(n+1)P(n+1) - nP(n)] + A_+[nP(n-1) - (n+1)P(n)])
/// on n = 0..N_max with no flux across N_max.
inline RateEquationSeries rate_eq_evolve(const std::vector<double>& p0, const PhysicalParams& p, const TimeGrid& grid) {
  grid.validate();
  if (p0.size() < 2) throw std::invalid_argument("distribution needs at least two levels");
  double total = 0.0;
  for (double v : p0) {
    if (v < 0.0) throw std::invalid_argument("initial distribution must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("initial distribution must be normalized");

  const int n_max = static_cast<int>(p0.size()) - 1;
  const double down = p.eta * p.eta * A_minus(p);
  const double up = p.eta * p.eta * A_plus(p);
  const auto rhs = [&](const std::vector<double>& q) {
    std::vector<double> d(q.size(), 0.0);
    for (int n = 0; n <= n_max; ++n) {
      double v = 0.0;
      if (n < n_max) v += down * (n + 1) * q[n + 1] - up * (n + 1) * q[n];
      v -= down * n * q[n];
      if (n > 0) v += up * n * q[n - 1];
      d[n] = v;
    }
    return d;
  };

  const double fastest = (down + up) * (n_max + 1);
  const double base = grid.step();
  const int substeps = fastest > 0.0 ? std::max(1, static_cast<int>(std::ceil(base * fastest / 0.5))) : 1;
  const double h = base / substeps;

  RateEquationSeries out;
  std::vector<double> q = p0;
  const auto record = [&](double t) {
    double norm = 0.0;
    double mean = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      norm += q[n];
      mean += n * q[n];
      out.min_probability = std::min(out.min_probability, q[n]);
    }
    out.max_norm_error = std::max(out.max_norm_error, std::abs(norm - 1.0));
    out.times.push_back(t);
    out.distributions.push_back(q);
    out.mean.push_back(mean);
    if (q[n_max] > kRateEqBoundaryGuard) {
      throw SolverError("rate equation: N_max too small, boundary occupation " + std::to_string(q[n_max]));
    }
  };
  record(grid.t0);
  const auto axpy = [](const std::vector<double>& x, double a, const std::vector<double>& y) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + a * y[i];
    return r;
  };
  for (std::int64_t k = 0; k < grid.steps(); ++k) {
    for (int s = 0; s < substeps; ++s) {
      const auto k1 = rhs(q);
      const auto k2 = rhs(axpy(q, 0.5 * h, k1));
      const auto k3 = rhs(axpy(q, 0.5 * h, k2));
      const auto k4 = rhs(axpy(q, h, k3));
      for (std::size_t i = 0; i < q.size(); ++i) q[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if (grid.is_sample(k + 1)) record(grid.time_at(k + 1));
  }
  return out;
}

}  // namespace sscool
