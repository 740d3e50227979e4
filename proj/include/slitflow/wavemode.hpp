#pragma once

#include <cmath>

#include "slitflow/params.hpp"

namespace slitflow {

/// Pointwise evaluation of one wave mode in polar form psi = R exp(iS/hbar).
///
/// The amplitude is carried in log space (log_r) so the far tails never
/// truncate to zero: the mode keeps its full-domain support at any
/// distance from the slit.  R itself may underflow when exponentiated;
/// every ratio-type quantity (grad R / R, ...) is available directly.
struct ModeSample {
  double log_r;        // log R(x,t)
  double s;            // S(x,t)
  double dlogr_dx;     // d(log R)/dx  ==  (dR/dx)/R
  double ds_dx;        // dS/dx
  double dlogr_dt;     // d(log R)/dt
  double ds_dt;        // dS/dt
  double d2logr_dx2;   // d2(log R)/dx2
  double d2s_dx2;      // d2S/dx2
  double d2logr_dxdt;  // mixed d2(log R)/dxdt
  double d2s_dxdt;     // mixed d2S/dxdt

  double r() const { return std::exp(log_r); }
  double dr_dx() const { return r() * dlogr_dx; }
  double dr_dt() const { return r() * dlogr_dt; }
  /// d2R/dx2 = R ((log R)'' + ((log R)')^2)
  double d2r_dx2() const {
    return r() * (d2logr_dx2 + dlogr_dx * dlogr_dx);
  }
};

/// Free dispersive Gaussian mode behind one slit, one transverse
/// dimension.  R and S solve the free Schroedinger equation exactly:
/// the packet center drifts at the forward phase velocity and the width
/// follows sigma(t) = sigma0 sqrt(1 + (hbar t / (2 m sigma0^2))^2).
/// Immutable after construction; eval() is pure and thread-safe.
class WaveMode {
 public:
  WaveMode(const SlitSpec& slit, const PhysicalParams& params)
      : slit_(slit), params_(params) {
    params_.validate();
    slit_.validate();
    log_weight_ = std::log(slit_.amplitude_weight);
  }

  const SlitSpec& slit() const { return slit_; }
  const PhysicalParams& params() const { return params_; }

  /// Dispersed width at time t (even in t, nondecreasing in |t|).
  double sigma_at(double t) const {
    const double s0 = slit_.width_sigma;
    const double tau = params_.hbar * t / (2.0 * params_.mass * s0 * s0);
    return s0 * std::sqrt(1.0 + tau * tau);
  }

  /// Drifting packet center at time t.
  double center_at(double t) const {
    return slit_.center + slit_.forward_phase_velocity * t;
  }

  ModeSample eval(double x, double t) const {
    const double hbar = params_.hbar;
    const double m = params_.mass;
    const double s0 = slit_.width_sigma;
    const double v0 = slit_.forward_phase_velocity;

    const double s02 = s0 * s0;
    const double tau = hbar * t / (2.0 * m * s02);
    const double one_p_tau2 = 1.0 + tau * tau;
    const double st2 = s02 * one_p_tau2;        // sigma(t)^2
    const double taudot = hbar / (2.0 * m * s02);
    const double sdot_over_s = hbar * tau / (2.0 * m * st2);
    const double beta = hbar * tau / (4.0 * st2);
    const double betadot = hbar * hbar * (1.0 - tau * tau) /
                           (8.0 * m * st2 * st2);
    const double xi = x - slit_.center - v0 * t;

    ModeSample out;
    out.log_r = -0.25 * std::log(2.0 * M_PI * st2) -
                xi * xi / (4.0 * st2) + log_weight_;
    out.dlogr_dx = -xi / (2.0 * st2);
    out.d2logr_dx2 = -1.0 / (2.0 * st2);
    out.dlogr_dt = -0.5 * sdot_over_s + v0 * xi / (2.0 * st2) +
                   xi * xi * sdot_over_s / (2.0 * st2);
    out.d2logr_dxdt = v0 / (2.0 * st2) + xi * sdot_over_s / st2;

    out.s = beta * xi * xi + m * v0 * (x - slit_.center) -
            0.5 * m * v0 * v0 * t - 0.5 * hbar * std::atan(tau) +
            hbar * slit_.relative_phase_offset;
    out.ds_dx = 2.0 * beta * xi + m * v0;
    out.d2s_dx2 = 2.0 * beta;
    out.ds_dt = betadot * xi * xi - 2.0 * beta * xi * v0 -
                0.5 * m * v0 * v0 - 0.5 * hbar * taudot / one_p_tau2;
    out.d2s_dxdt = 2.0 * (betadot * xi - beta * v0);
    return out;
  }

  /// Convective velocity dS/dx / m at (x,t).
  double convective_velocity(double x, double t) const {
    return eval(x, t).ds_dx / params_.mass;
  }

  /// Diffusion velocity D grad(R^2)/R^2 = (hbar/m) (dR/dx)/R at (x,t).
  double diffusion_velocity(double x, double t) const {
    return (params_.hbar / params_.mass) * eval(x, t).dlogr_dx;
  }

 private:
  SlitSpec slit_;
  PhysicalParams params_;
  double log_weight_;
};

/// Construct the dispersive Gaussian mode for one slit.
/// Throws InvalidParameterError when a slit or params invariant fails.
inline WaveMode make_gaussian_mode(const SlitSpec& slit,
                                   const PhysicalParams& params) {
  return WaveMode(slit, params);
}

/// Bundle R, S and their derivatives at one point.
inline ModeSample eval_mode(const WaveMode& mode, double x, double t) {
  return mode.eval(x, t);
}

}  // namespace slitflow
