#pragma once

#include <optional>

#include "slitflow/channels.hpp"

namespace slitflow {

/// One evaluation of the emergent field.  v_tot and a_tot are absent at
/// points where p_tot is at or below the node threshold.
struct FieldSample {
  double p_tot = 0.0;
  double j_tot = 0.0;
  std::optional<double> v_tot;
  std::optional<double> a_tot;
  /// Cross-slit part of the current (filled for two-slit systems when
  /// requested).
  std::optional<double> entangling;
};

/// Evaluator of the emergent total density, current, velocity and
/// acceleration of an n-slit channel system.  Amplitudes are rescaled
/// internally by the largest mode log-amplitude, so the field stays
/// evaluable arbitrarily far into the tails; the node test is done on
/// log(p_tot).  Immutable and safe for concurrent use.
class EmergentField {
 public:
  explicit EmergentField(ChannelSet channels, double node_threshold = 1e-300);

  const ChannelSet& channels() const { return channels_; }
  const std::vector<WaveMode>& modes() const { return channels_.modes(); }
  int n_slits() const { return channels_.n_slits(); }
  double node_threshold() const { return node_threshold_; }
  const PhysicalParams& params() const { return channels_.params(); }

  /// P_tot >= 0: the squared phase-weighted amplitude sum over all
  /// channels (the diffusive pairs cancel in the sum by construction).
  double total_density(double x, double t) const;
  /// log P_tot; finite even where P_tot underflows a double.
  double log_total_density(double x, double t) const;
  /// J_tot: sum of the 3n channel currents.
  double total_current(double x, double t) const;
  /// v_tot = J_tot / P_tot.  Throws NodeError when P_tot <= threshold.
  double emergent_velocity(double x, double t) const;
  /// Material derivative of v_tot along the flow, dv/dt = v_t + v v_x,
  /// from analytic mode derivatives.  Throws NodeError near nodes.
  double emergent_acceleration(double x, double t) const;
  /// Finite-difference fallback for the acceleration: 5-point central
  /// stencils in x and t with step sigma(t)/512 and a Richardson
  /// consistency check.  Throws NonFiniteError when the stencil
  /// straddles a node or the two step sizes disagree.
  double emergent_acceleration_fd(double x, double t) const;

  struct SampleRequest {
    bool with_acceleration = false;
    bool with_entangling = false;
  };
  FieldSample sample(double x, double t, SampleRequest req) const;
  FieldSample sample(double x, double t) const {
    return sample(x, t, SampleRequest{});
  }

 private:
  ChannelSet channels_;
  double node_threshold_;
  double log_node_threshold_;
};

/// The two-slit closed form: the emergent velocity written out in the
/// mode amplitudes and the convective / diffusive velocities,
///
///   v = (R1^2 v1 + R2^2 v2 + R1 R2 (v1+v2) cos phi
///        + R1 R2 (u1-u2) sin phi)
///       / (R1^2 + R2^2 + 2 R1 R2 cos phi)
///
/// with phi = (S1-S2)/hbar, v_i = dS_i/dx / m, and u_i the diffusion
/// velocity D grad(R_i^2)/R_i^2 = +(hbar/m)(dR_i/dx)/R_i.  Throws
/// NodeError when the denominator is at or below node_threshold.
double double_slit_velocity_closed_form(const WaveMode& mode1,
                                        const WaveMode& mode2, double x,
                                        double t,
                                        double node_threshold = 1e-300);

/// The R1 R2 cross terms of the two-slit current: the part of J_tot that
/// mixes channels of different slits.  Evaluated as
/// exp(log R1 + log R2) * bracket, so it stays resolvable when one
/// amplitude alone underflows.
double entangling_current(const WaveMode& mode1, const WaveMode& mode2,
                          double x, double t);

struct LogCurrent {
  double log_magnitude;  // log |J|; -inf when J == 0
  int sign;              // -1, 0, +1
};

/// Log-space form of the entangling current for tail diagnostics.
LogCurrent entangling_current_log(const WaveMode& mode1, const WaveMode& mode2,
                                  double x, double t);

}  // namespace slitflow
