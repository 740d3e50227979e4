#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "slitflow/emergence.hpp"
#include "slitflow/exec.hpp"

namespace slitflow {

/// One integrated path x' = v_tot(x,t), sampled at uniform times.
struct Trajectory {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> a;  // empty unless acceleration was recorded
  /// Sign of x(t0) - axis when a symmetry axis was declared, else 0.
  int start_side = 0;
  /// Axis crossings observed on the dense solution (guard-banded).
  long crossings = 0;
  /// Deepest incursion past the axis against the start side (>= 0).
  double max_violation = 0.0;
};

struct IntegrateOptions {
  double tol = 1e-8;
  int record_samples = 101;
  bool record_acceleration = false;
  /// When set, crossings of this axis are tracked on the dense output.
  std::optional<double> crossing_axis;
  long max_steps = 2000000;
};

/// Integrate one trajectory of the emergent flow from (x0, t0) to t1.
/// Local error per step is held at tol (relative, with an absolute
/// floor tied to the smallest slit width).  Throws NodeError if the
/// start or any evaluation point is at a node, StepUnderflowError in
/// stiff near-node regions.
Trajectory integrate_trajectory(const EmergentField& field, double x0,
                                double t0, double t1,
                                const IntegrateOptions& options = {});

enum class SamplerKind { BornRule, PerSlit };

struct EnsembleSpec {
  SamplerKind sampler = SamplerKind::BornRule;
  int n_traj = 1;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  int record_samples = 101;
  bool record_acceleration = false;
  std::optional<double> crossing_axis;
  /// Half-width of the Born sampling window in units of the dispersed
  /// slit widths.
  double window_sigmas = 10.0;
};

struct Ensemble {
  std::vector<Trajectory> trajectories;
  double t0 = 0.0;
  double t1 = 0.0;
  EnsembleSpec spec;
};

/// Run n_traj independent trajectories from i.i.d. initial positions.
/// Each trajectory draws from its own substream of the seeded generator
/// and results are stored by index, so the ensemble is reproducible bit
/// for bit for a fixed seed, independent of the thread count.
/// Integrator failures are rethrown as TrajectoryError with the index
/// of the lowest failing trajectory attached.
Ensemble run_ensemble(const EmergentField& field, const EnsembleSpec& spec,
                      double t0, double t1, ExecPolicy policy = {});

struct NoCrossingReport {
  /// True only for a mirror-symmetric two-slit configuration about the
  /// axis; a single slit may cross freely and reports not-applicable.
  bool applicable = false;
  long crossings_total = 0;
  std::vector<int> crossings_per_trajectory;
  double max_violation = 0.0;
};

NoCrossingReport no_crossing_report(const EmergentField& field,
                                    const Ensemble& ensemble, double axis);

/// Whether the slit configuration maps onto itself under reflection
/// about the axis (pairs with mirrored centers and opposite drifts).
bool mirror_symmetric(const std::vector<WaveMode>& modes, double axis);

struct ScreenHistogram {
  double lo = 0.0, hi = 0.0;
  std::vector<double> centers;
  std::vector<double> density;            // normalized over the window
  std::vector<double> reference_density;  // |Psi|^2, same normalization
  /// L1 distance between the two bin-mass vectors.
  double l1_mass_distance = 0.0;
  int n_in_window = 0;
};

/// Histogram of x(t_screen) over [lo, hi] with the field density as the
/// reference profile.  t_screen must coincide with one of the recorded
/// sample times.
ScreenHistogram screen_histogram(const Ensemble& ensemble,
                                 const EmergentField& reference,
                                 double t_screen, int bins, double lo,
                                 double hi);

/// Deterministic per-index substream seeding helper (SplitMix64 mix).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

/// Born-rule rejection sampler for the transverse density at time t0.
class BornSampler {
 public:
  BornSampler(const EmergentField& field, double t0, double lo, double hi);
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double sample(std::uint64_t& rng_state) const;

 private:
  const EmergentField* field_;
  double t0_, lo_, hi_, density_cap_;
};

/// Per-slit Gaussian sampler: pick a slit (weighted by squared
/// amplitude weight), then draw from its dispersed Gaussian at t0.
class PerSlitSampler {
 public:
  PerSlitSampler(const EmergentField& field, double t0);
  double sample(std::uint64_t& rng_state) const;

 private:
  struct Component {
    double center, sigma, cumulative;
  };
  std::vector<Component> components_;
};

}  // namespace slitflow
