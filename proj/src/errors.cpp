#include "slitflow/errors.hpp"

#include <string>

namespace slitflow {

NodeError::NodeError(double x, double t, double log_density)
    : Error("flow field undefined at node: x=" + std::to_string(x) +
            " t=" + std::to_string(t) +
            " log(p_tot)=" + std::to_string(log_density)),
      x_(x),
      t_(t),
      log_density_(log_density) {}

ConfigParseError::ConfigParseError(int line, const std::string& what_arg)
    : Error("config line " + std::to_string(line) + ": " + what_arg),
      line_(line) {}

TrajectoryError::TrajectoryError(int index, const std::string& what_arg)
    : Error("trajectory " + std::to_string(index) + ": " + what_arg),
      index_(index) {}

}  // namespace slitflow
