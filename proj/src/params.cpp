#include "slitflow/params.hpp"

#include <cmath>
#include <string>

#include "slitflow/errors.hpp"

namespace slitflow {

PhysicalParams PhysicalParams::make(double hbar, double mass) {
  PhysicalParams p;
  p.hbar = hbar;
  p.mass = mass;
  p.diffusion_coefficient = hbar / (2.0 * mass);
  p.validate();
  return p;
}

void PhysicalParams::validate() const {
  if (!(std::isfinite(hbar) && hbar > 0.0)) {
    throw InvalidParameterError("hbar must be finite and > 0, got " +
                                std::to_string(hbar));
  }
  if (!(std::isfinite(mass) && mass > 0.0)) {
    throw InvalidParameterError("mass must be finite and > 0, got " +
                                std::to_string(mass));
  }
  if (diffusion_coefficient != hbar / (2.0 * mass)) {
    throw InvalidParameterError(
        "diffusion_coefficient out of sync with hbar/(2 mass); "
        "construct PhysicalParams via make()");
  }
}

void SlitSpec::validate() const {
  if (!(std::isfinite(width_sigma) && width_sigma > 0.0)) {
    throw InvalidParameterError("slit width_sigma must be finite and > 0");
  }
  if (!std::isfinite(center)) {
    throw InvalidParameterError("slit center must be finite");
  }
  if (!std::isfinite(forward_phase_velocity)) {
    throw InvalidParameterError("slit forward_phase_velocity must be finite");
  }
  if (!std::isfinite(relative_phase_offset)) {
    throw InvalidParameterError("slit relative_phase_offset must be finite");
  }
  if (!(std::isfinite(amplitude_weight) && amplitude_weight > 0.0)) {
    throw InvalidParameterError("slit amplitude_weight must be finite and > 0");
  }
}

}  // namespace slitflow
