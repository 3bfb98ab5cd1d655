#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace sscool {

/// Physical parameters in units of the trap frequency scale.
///
/// Decay from |e> proceeds at rate 2*Gamma1 to |g1> and 2*Gamma2 to |g2>.
/// Closed-form rate results use Gamma() = Gamma1 + Gamma2.
struct PhysicalParams {
  double Omega = 0.0;    // |g_i> <-> |e> Rabi frequency (two-level drive in the pulsed model)
  double Omega_c = 0.0;  // cooling (Stark-gate) Rabi frequency
  double Delta = 0.0;    // detuning of the |g_i> <-> |e> lasers
  double delta = 0.0;    // two-level laser detuning
  double Gamma1 = 0.0;
  double Gamma2 = 0.0;
  double nu = 1.0;   // trap frequency
  double eta = 0.0;  // Lamb-Dicke parameter

  double Gamma() const noexcept { return Gamma1 + Gamma2; }

  /// Splits a total Gamma symmetrically into the two channels.
  PhysicalParams& set_Gamma(double gamma) {
    Gamma1 = Gamma2 = 0.5 * gamma;
    return *this;
  }

  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    const auto finite = [&](double v, const char* name) {
      if (!std::isfinite(v)) out.push_back(std::string(name) + " must be finite");
    };
    finite(Omega, "Omega");
    finite(Omega_c, "Omega_c");
    finite(Delta, "Delta");
    finite(delta, "delta");
    finite(Gamma1, "Gamma1");
    finite(Gamma2, "Gamma2");
    finite(nu, "nu");
    finite(eta, "eta");
    if (!(nu > 0.0)) out.emplace_back("nu must be > 0");
    if (eta < 0.0) out.emplace_back("eta must be >= 0");
    if (Gamma1 < 0.0) out.emplace_back("Gamma1 must be >= 0");
    if (Gamma2 < 0.0) out.emplace_back("Gamma2 must be >= 0");
    return out;
  }
};

}  // namespace sscool
