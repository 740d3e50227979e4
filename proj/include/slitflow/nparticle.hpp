#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "slitflow/exec.hpp"
#include "slitflow/wavemode.hpp"

namespace slitflow {

/// The actual configuration of the N particles at time t.
struct ConfigurationPoint {
  std::vector<double> positions;
  double t = 0.0;
};

/// One product term coeff * prod_i factor_i(x_i, t) of an N-particle
/// superposition; every factor is a single-particle wave mode.
struct ProductTerm {
  std::complex<double> coeff{1.0, 0.0};
  std::vector<WaveMode> factors;
};

class ConditionalWaveFunction;

/// N-particle wavefunction built from sums of products of wave modes
/// (entangled superpositions supported).  A factorized input stays a
/// single product term, so its per-particle guidance is evaluated from
/// that particle's factor alone -- dynamical independence is exact at
/// the bit level.  Term exponents are combined in log space with a
/// common rescaling, so deep-tail configurations stay evaluable.
class NParticleWaveFunction {
 public:
  NParticleWaveFunction(std::vector<double> masses,
                        std::vector<ProductTerm> terms,
                        double node_threshold = 1e-300);

  /// Single product state psi_1(x_1) ... psi_N(x_N).
  static NParticleWaveFunction product(std::vector<double> masses,
                                       std::vector<WaveMode> factors);
  /// (a(x1) b(x2) + sign b(x1) a(x2)) / sqrt(2); sign = +1 symmetric,
  /// -1 antisymmetric.
  static NParticleWaveFunction exchange_symmetrized(
      std::vector<double> masses, const WaveMode& a, const WaveMode& b,
      int sign);

  int n_particles() const { return static_cast<int>(masses_.size()); }
  const std::vector<double>& masses() const { return masses_; }
  const std::vector<ProductTerm>& terms() const { return terms_; }
  double hbar() const;
  double node_threshold() const { return node_threshold_; }

  double log_density(const ConfigurationPoint& config) const;
  double density(const ConfigurationPoint& config) const;

  /// Guidance velocities (hbar/m_i) Im(grad_i Psi / Psi), one per
  /// particle.  Throws NodeError when |Psi|^2 <= node_threshold.
  std::vector<double> velocities(const ConfigurationPoint& config) const;

  /// Per-particle current components (1/m_i) Re{Psi* (-i hbar grad_i) Psi}.
  std::vector<double> currents(const ConfigurationPoint& config) const;

  /// Single-particle slice: all other coordinates frozen at the actual
  /// configuration.  Guidance computed from the slice equals
  /// velocities()[i].
  ConditionalWaveFunction conditional(int i,
                                      const ConfigurationPoint& config) const;

 private:
  std::vector<double> masses_;
  std::vector<ProductTerm> terms_;
  double node_threshold_;
};

/// x -> Psi(X_1, ..., x, ..., X_N, t) with its own evaluators.
class ConditionalWaveFunction {
 public:
  /// Slice value rescaled by exp(-log_scale(x)); pair with log_scale for
  /// the absolute magnitude.
  std::complex<double> value_scaled(double x) const;
  double log_scale(double x) const;
  /// d(log psi~)/dx at x.
  std::complex<double> log_derivative(double x) const;
  /// (hbar/m_i) Im(psi~'/psi~); throws NodeError on a degenerate slice.
  double guidance_velocity(double x) const;

 private:
  friend class NParticleWaveFunction;
  struct SliceTerm {
    std::complex<double> coeff;
    double frozen_log_r = 0.0;  // sum of log R of the frozen factors
    double frozen_phase = 0.0;  // sum of S/hbar of the frozen factors
    const WaveMode* free_mode = nullptr;
  };
  std::vector<SliceTerm> slice_;
  double t_ = 0.0;
  double hbar_ = 1.0;
  double mass_ = 1.0;
  double node_threshold_ = 1e-300;
};

inline std::vector<double> nparticle_velocities(
    const NParticleWaveFunction& wf, const ConfigurationPoint& config) {
  return wf.velocities(config);
}
inline std::vector<double> nparticle_total_current(
    const NParticleWaveFunction& wf, const ConfigurationPoint& config) {
  return wf.currents(config);
}
inline ConditionalWaveFunction conditional_wavefunction(
    const NParticleWaveFunction& wf, int i, const ConfigurationPoint& config) {
  return wf.conditional(i, config);
}

/// Configuration-space trajectory sampled at uniform times.
struct ConfigTrajectory {
  std::vector<double> t;
  /// positions[k] is the configuration at t[k] (size n_particles each).
  std::vector<std::vector<double>> positions;
  std::vector<std::vector<double>> velocities;
};

struct ConfigIntegrateOptions {
  double tol = 1e-8;
  int record_samples = 101;
  long max_steps = 2000000;
};

ConfigTrajectory integrate_configuration(
    const NParticleWaveFunction& wf, const ConfigurationPoint& start,
    double t1, const ConfigIntegrateOptions& options = {});

/// Rectangular sampling box in configuration space.
struct ConfigBox {
  std::vector<double> lo, hi;
};

/// Born-rule rejection sampler over a 2-particle box (desk scale: the
/// density cap comes from a deterministic grid scan).
class ConfigBornSampler {
 public:
  ConfigBornSampler(const NParticleWaveFunction& wf, double t0,
                    const ConfigBox& box);
  std::vector<double> sample(std::uint64_t& rng_state) const;

 private:
  const NParticleWaveFunction* wf_;
  double t0_;
  ConfigBox box_;
  double log_density_cap_;
};

/// Integrate n Born-sampled configurations from t0 to t1; endpoints[i]
/// is the final configuration of sample i.  Deterministic per seed,
/// independent of the thread count.
std::vector<std::vector<double>> run_configuration_ensemble(
    const NParticleWaveFunction& wf, double t0, double t1,
    const ConfigBox& box, int n, std::uint64_t seed, double tol,
    ExecPolicy policy = {});

}  // namespace slitflow
