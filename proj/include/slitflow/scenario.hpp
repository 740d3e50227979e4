#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slitflow/params.hpp"
#include "slitflow/sweep.hpp"
#include "slitflow/trajectories.hpp"

namespace slitflow {

/// Two-particle state description for the nparticle command.
struct NParticleSpec {
  std::vector<double> masses{1.0, 1.0};
  enum class State { Factorized, Symmetric, Antisymmetric };
  State state = State::Factorized;
  int mode_a = 0;  // slit index of the first factor
  int mode_b = 1;  // slit index of the second factor
  double t_end = 1.0;
  int n_configs = 1000;
  /// Probe displacement for the nonlocality metric; 0 = use the width
  /// of mode_a.
  double displacement = 0.0;
};

struct ScreenSpec {
  double t_screen = 1.0;
  int bins = 50;
};

struct EnsembleConfig {
  SamplerKind sampler = SamplerKind::BornRule;
  int n_traj = 1000;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  int dump_trajectories = 100;
  bool record_acceleration = false;
};

/// A fully described run: physics, slits, grid, ensemble, screen and
/// output location.  Parsed from the sectioned key=value config format
/// (see docs/scenario_format.md).
struct Scenario {
  PhysicalParams physics;
  std::vector<SlitSpec> slits;
  GridSpec grid;
  bool grid_auto_x = true;   // x range derived from the slits when true
  double grid_auto_sigmas = 8.0;
  EnsembleConfig ensemble;
  ScreenSpec screen;
  std::optional<NParticleSpec> nparticle;
  double node_threshold = 1e-300;
  std::string output_dir = "out";

  /// Resolve the auto-sized x range against the slit list.
  GridSpec resolved_grid() const;
  std::vector<WaveMode> make_modes() const;
  void validate() const;
};

Scenario parse_scenario_string(const std::string& text);
Scenario parse_scenario_file(const std::string& path);

/// Canonical text form: fixed section and key order, full precision.
/// Two scenarios serialize identically iff they describe the same run.
std::string canonical_serialization(const Scenario& s);

/// FNV-1a over the canonical serialization.
std::uint64_t scenario_hash(const Scenario& s);

}  // namespace slitflow
