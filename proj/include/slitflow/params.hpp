#pragma once

#include "slitflow/errors.hpp"

namespace slitflow {

/// Global physical constants of a scenario.  Units are free; the default
/// hbar = mass = 1 makes all tolerances dimensionless.
struct PhysicalParams {
  double hbar = 1.0;
  double mass = 1.0;
  /// D = hbar / (2 mass), stored for inspection.  Kept exactly in sync by
  /// make(); do not assign the fields independently.
  double diffusion_coefficient = 0.5;

  static PhysicalParams make(double hbar, double mass);

  void validate() const;

  /// Exact agreement; modes of one system must share these bit-for-bit.
  bool same_as(const PhysicalParams& o) const {
    return hbar == o.hbar && mass == o.mass;
  }
};

/// One Gaussian slit aperture: the transverse wave mode released at t = 0.
struct SlitSpec {
  /// Transverse position of the slit center.
  double center = 0.0;
  /// Initial Gaussian standard deviation (related to the slit width).
  double width_sigma = 1.0;
  /// Mean transverse velocity imparted at the slit.
  double forward_phase_velocity = 0.0;
  /// Dimensionless phase added to S/hbar at t = 0.
  double relative_phase_offset = 0.0;
  /// Optional relative amplitude factor (modes are normalized
  /// individually; relative weights live here).
  double amplitude_weight = 1.0;

  void validate() const;
};

}  // namespace slitflow
