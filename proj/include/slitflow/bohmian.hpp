#pragma once

#include <complex>
#include <vector>

#include "slitflow/wavemode.hpp"

namespace slitflow {

/// Complex derivative bundle of the superposed wavefunction at a point.
/// All values share one real rescaling exp(log_scale) (the largest mode
/// log-amplitude), so ratios remain exact arbitrarily deep in the tails.
struct WaveDerivs {
  std::complex<double> psi;      // Psi * exp(-log_scale)
  std::complex<double> psi_x;    // dPsi/dx, same scaling
  std::complex<double> psi_xx;   // d2Psi/dx2
  std::complex<double> psi_xxx;  // d3Psi/dx3
  std::complex<double> psi_t;    // dPsi/dt
  double log_scale;
};

/// Orthodox quantum-mechanical reference: the complex superposition
/// Psi = sum_j R_j exp(i S_j / hbar) with analytic derivatives, used as
/// ground truth for the emergent-field identities.  Immutable, pure,
/// concurrently callable.
class WaveFunction {
 public:
  /// Throws MismatchedParamsError when modes disagree on hbar or mass,
  /// InvalidParameterError for an empty mode list.
  explicit WaveFunction(std::vector<WaveMode> modes);

  const std::vector<WaveMode>& modes() const { return modes_; }
  const PhysicalParams& params() const { return modes_.front().params(); }

  std::complex<double> psi(double x, double t) const;
  WaveDerivs derivatives(double x, double t) const;

  /// |Psi|^2 (may underflow in extreme tails; see log_density).
  double density(double x, double t) const;
  double log_density(double x, double t) const;

  /// J = (hbar/m) Im(Psi* dPsi/dx)  ==  (1/m) Re{Psi* (-i hbar d/dx) Psi}.
  double qm_current(double x, double t) const;

  /// Guidance velocity (hbar/m) Im(dPsi/dx / Psi).
  /// Throws NodeError when |Psi|^2 <= node_threshold.
  double bohm_velocity(double x, double t,
                       double node_threshold = 1e-300) const;

  /// Quantum potential Q = -(hbar^2/2m) (d2|Psi|/dx2) / |Psi|.
  double quantum_potential(double x, double t,
                           double node_threshold = 1e-300) const;

  /// Quantum force per unit mass, -(1/m) dQ/dx, from analytic
  /// derivatives of |Psi|.  Throws NodeError at nodes.
  double quantum_force(double x, double t,
                       double node_threshold = 1e-300) const;

  /// i hbar dPsi/dt + (hbar^2/2m) d2Psi/dx2, at the internal scaling.
  /// Zero for exact free-particle modes up to rounding.
  std::complex<double> schrodinger_residual(double x, double t) const;

  /// (hbar/m) |dPsi/dx / Psi|: the local magnitude of the complex
  /// guidance velocity.  Natural scale for relative velocity errors.
  double guidance_scale(double x, double t) const;

 private:
  std::vector<WaveMode> modes_;
};

/// Linear superposition of slit modes (the Bohmian oracle state).
WaveFunction superpose(std::vector<WaveMode> modes);

inline double qm_current(const WaveFunction& wf, double x, double t) {
  return wf.qm_current(x, t);
}
inline double bohm_velocity(const WaveFunction& wf, double x, double t,
                            double node_threshold = 1e-300) {
  return wf.bohm_velocity(x, t, node_threshold);
}
inline double quantum_force(const WaveFunction& wf, double x, double t,
                            double node_threshold = 1e-300) {
  return wf.quantum_force(x, t, node_threshold);
}

}  // namespace slitflow
