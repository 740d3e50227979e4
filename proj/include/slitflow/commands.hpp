#pragma once

#include <string>

#include "slitflow/exec.hpp"
#include "slitflow/io.hpp"
#include "slitflow/scenario.hpp"

namespace slitflow {

/// Stable exit-code contract of the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitThresholdViolation = 1;
inline constexpr int kExitInputError = 2;

/// Pass/fail thresholds enforced by the commands (and by the acceptance
/// suite).  All pinned here; nothing is deferred to calibration.
namespace thresholds {
inline constexpr double kVelocityIdentity = 1e-10;      // emergent vs guidance
inline constexpr double kClosedFormIdentity = 1e-12;    // channels vs closed form
inline constexpr double kDensityIdentity = 1e-12;       // P_tot vs |Psi|^2
inline constexpr double kForceIdentity = 1e-4;          // a_tot vs -grad Q / m
inline constexpr double kContinuityRatioLo = 3.6;       // h -> h/2 shrink factor
inline constexpr double kContinuityRatioHi = 4.4;
inline constexpr double kScreenL1 = 0.05;               // at 1e4 trajectories
inline constexpr double kScreenL1RefTraj = 1e4;         // reference count for scaling
inline constexpr double kEq13Identity = 1e-12;          // conditional guidance
inline constexpr double kNonlocalityFloor = 1e-6;       // entangled states
inline constexpr double kForceDensityFloor = 1e-6;      // of max P_tot
inline constexpr double kOracleDensityFloor = 1e-12;    // sampling cutoff
}  // namespace thresholds

struct CommandOptions {
  std::string out_dir;           // empty = scenario's output_dir
  std::string format = "csv";    // csv | json
  ExecPolicy policy;
};

/// Grid dump of the emergent and oracle fields plus the identity and
/// continuity checks; writes fields.csv (or .json) and summary.json.
int cmd_fields(const Scenario& scenario, const CommandOptions& options);

/// Trajectory ensemble with screen histogram, no-crossing report and
/// determinism-friendly artifacts: trajectories.csv, histogram.csv,
/// summary.json.
int cmd_ensemble(const Scenario& scenario, const CommandOptions& options);

/// Pointwise discrepancy maps (emergent vs oracle) for velocity and
/// acceleration: compare.csv and summary.json.
int cmd_compare(const Scenario& scenario, const CommandOptions& options);

/// Two-particle run: configuration trajectories, nonlocality report and
/// the conditional-wavefunction identity check.
int cmd_nparticle(const Scenario& scenario, const CommandOptions& options);

}  // namespace slitflow
