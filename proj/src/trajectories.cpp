#include "slitflow/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "slitflow/errors.hpp"
#include "slitflow/ode.hpp"

namespace slitflow {

namespace {

// SplitMix64: tiny, portable, deterministic across platforms.  Good
// enough statistically for Monte Carlo position sampling and keeps the
// per-trajectory substream state at 8 bytes.
inline std::uint64_t splitmix_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t& state) {
  return (splitmix_next(state) >> 11) * 0x1.0p-53;
}

// Box-Muller, using our own uniforms so results do not depend on any
// library's distribution implementation.
inline double standard_normal(std::uint64_t& state) {
  double u1 = uniform01(state);
  while (u1 <= 0.0) u1 = uniform01(state);
  const double u2 = uniform01(state);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double min_initial_sigma(const EmergentField& field) {
  double s = std::numeric_limits<double>::infinity();
  for (const WaveMode& m : field.modes()) {
    s = std::min(s, m.slit().width_sigma);
  }
  return s;
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed ^ (0xD1342543DE82EF95ull * (index + 1));
  return splitmix_next(state);
}

Trajectory integrate_trajectory(const EmergentField& field, double x0,
                                double t0, double t1,
                                const IntegrateOptions& options) {
  if (!(t1 > t0)) {
    throw InvalidParameterError("integrate_trajectory needs t1 > t0");
  }
  if (!(options.tol > 0.0)) {
    throw InvalidParameterError("tolerance must be > 0");
  }
  // Fails fast with NodeError when the start sits at a node.
  (void)field.emergent_velocity(x0, t0);

  const double sigma_ref = min_initial_sigma(field);
  const double guard = 10.0 * options.tol * std::max(1.0, sigma_ref);

  Trajectory traj;
  const int n = std::max(2, options.record_samples);
  traj.t.resize(n);
  traj.x.resize(n);
  traj.v.resize(n);
  for (int i = 0; i < n; ++i) {
    traj.t[i] = t0 + (t1 - t0) * static_cast<double>(i) /
                         static_cast<double>(n - 1);
  }
  traj.t.back() = t1;
  traj.x[0] = x0;

  const double axis = options.crossing_axis.value_or(0.0);
  const bool track = options.crossing_axis.has_value();
  if (track) {
    const double rel = x0 - axis;
    traj.start_side = rel > 0.0 ? 1 : (rel < 0.0 ? -1 : 0);
  }

  int next_record = 1;
  int last_sign = 0;
  if (track && std::abs(x0 - axis) > guard) {
    last_sign = x0 > axis ? 1 : -1;
  }

  auto monitor = [&](double xs) {
    if (!track) return;
    const double rel = xs - axis;
    if (traj.start_side != 0) {
      traj.max_violation =
          std::max(traj.max_violation, -traj.start_side * rel);
    }
    if (std::abs(rel) > guard) {
      const int sign = rel > 0.0 ? 1 : -1;
      if (last_sign != 0 && sign != last_sign) ++traj.crossings;
      last_sign = sign;
    }
  };

  Dopri5 solver(1);
  OdeControls controls;
  controls.rtol = options.tol;
  controls.atol = options.tol * sigma_ref;
  controls.max_steps = options.max_steps;

  const auto rhs = [&](double t, const double* y, double* dydt) {
    dydt[0] = field.emergent_velocity(y[0], t);
  };

  const auto observer = [&](const Dopri5::DenseStep& step) {
    // Record the uniform samples that fall inside this step.
    while (next_record < n && traj.t[next_record] <= step.t_end()) {
      double xs;
      step.eval(traj.t[next_record], &xs);
      traj.x[next_record] = xs;
      ++next_record;
    }
    // Crossing detection on dense interior points plus the endpoint.
    if (track) {
      constexpr int kDense = 8;
      for (int k = 1; k <= kDense; ++k) {
        const double ts = step.t_begin() +
                          (step.t_end() - step.t_begin()) * k / double(kDense);
        double xs;
        step.eval(ts, &xs);
        monitor(xs);
      }
    }
  };

  double y = x0;
  monitor(x0);
  solver.integrate(t0, t1, &y, rhs, controls, observer);
  while (next_record < n) {
    traj.x[next_record] = y;
    ++next_record;
  }
  traj.x.back() = y;

  for (int i = 0; i < n; ++i) {
    traj.v[i] = field.emergent_velocity(traj.x[i], traj.t[i]);
  }
  if (options.record_acceleration) {
    traj.a.resize(n);
    for (int i = 0; i < n; ++i) {
      traj.a[i] = field.emergent_acceleration(traj.x[i], traj.t[i]);
    }
  }
  return traj;
}

BornSampler::BornSampler(const EmergentField& field, double t0, double lo,
                         double hi)
    : field_(&field), t0_(t0), lo_(lo), hi_(hi) {
  if (!(hi > lo)) {
    throw InvalidParameterError("Born sampling window needs hi > lo");
  }
  // Deterministic scan for the density cap.  The grid is fine enough to
  // resolve both the envelopes and the interference oscillations of the
  // shipped scenarios; the headroom factor covers the rest.
  constexpr int kScan = 16385;
  double pmax = 0.0;
  for (int i = 0; i < kScan; ++i) {
    const double x = lo + (hi - lo) * i / double(kScan - 1);
    pmax = std::max(pmax, field.total_density(x, t0));
  }
  if (!(pmax > 0.0)) {
    throw InvalidParameterError("Born sampling window has zero density");
  }
  density_cap_ = 1.05 * pmax;
}

double BornSampler::sample(std::uint64_t& rng_state) const {
  for (long i = 0; i < 1000000; ++i) {
    const double x = lo_ + (hi_ - lo_) * uniform01(rng_state);
    const double u = uniform01(rng_state);
    if (u * density_cap_ <= field_->total_density(x, t0_)) return x;
  }
  throw Error("Born rejection sampling failed to accept (bad window?)");
}

PerSlitSampler::PerSlitSampler(const EmergentField& field, double t0) {
  double total = 0.0;
  for (const WaveMode& m : field.modes()) {
    const double w = m.slit().amplitude_weight;
    total += w * w;
  }
  double acc = 0.0;
  for (const WaveMode& m : field.modes()) {
    const double w = m.slit().amplitude_weight;
    acc += w * w / total;
    components_.push_back({m.center_at(t0), m.sigma_at(t0), acc});
  }
  components_.back().cumulative = 1.0;
}

double PerSlitSampler::sample(std::uint64_t& rng_state) const {
  const double u = uniform01(rng_state);
  const Component* chosen = &components_.back();
  for (const Component& c : components_) {
    if (u <= c.cumulative) {
      chosen = &c;
      break;
    }
  }
  return chosen->center + chosen->sigma * standard_normal(rng_state);
}

Ensemble run_ensemble(const EmergentField& field, const EnsembleSpec& spec,
                      double t0, double t1, ExecPolicy policy) {
  if (spec.n_traj < 1) {
    throw InvalidParameterError("ensemble needs n_traj >= 1");
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const WaveMode& m : field.modes()) {
    lo = std::min(lo, m.center_at(t0) - spec.window_sigmas * m.sigma_at(t0));
    hi = std::max(hi, m.center_at(t0) + spec.window_sigmas * m.sigma_at(t0));
  }

  const BornSampler born(field, t0, lo, hi);
  const PerSlitSampler per_slit(field, t0);

  Ensemble ensemble;
  ensemble.t0 = t0;
  ensemble.t1 = t1;
  ensemble.spec = spec;
  ensemble.trajectories.resize(spec.n_traj);

  IntegrateOptions options;
  options.tol = spec.tol;
  options.record_samples = spec.record_samples;
  options.record_acceleration = spec.record_acceleration;
  options.crossing_axis = spec.crossing_axis;

  const int n_threads = resolved_threads(policy);
  int first_error = -1;
  std::string error_message;

  const auto run_one = [&](int i) {
    std::uint64_t rng = substream_seed(spec.seed, static_cast<uint64_t>(i));
    const double x0 = spec.sampler == SamplerKind::BornRule
                          ? born.sample(rng)
                          : per_slit.sample(rng);
    ensemble.trajectories[i] =
        integrate_trajectory(field, x0, t0, t1, options);
  };

#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 4) num_threads(n_threads)
  for (int i = 0; i < spec.n_traj; ++i) {
    try {
      run_one(i);
    } catch (const std::exception& e) {
#pragma omp critical
      {
        if (first_error < 0 || i < first_error) {
          first_error = i;
          error_message = e.what();
        }
      }
    }
  }
#else
  (void)n_threads;
  for (int i = 0; i < spec.n_traj; ++i) {
    try {
      run_one(i);
    } catch (const std::exception& e) {
      if (first_error < 0) {
        first_error = i;
        error_message = e.what();
      }
    }
  }
#endif

  if (first_error >= 0) {
    throw TrajectoryError(first_error, error_message);
  }
  return ensemble;
}

bool mirror_symmetric(const std::vector<WaveMode>& modes, double axis) {
  if (modes.size() < 2) return false;
  std::vector<bool> matched(modes.size(), false);
  const double tol = 1e-12;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (matched[i]) continue;
    const SlitSpec& a = modes[i].slit();
    bool found = false;
    for (std::size_t j = 0; j < modes.size(); ++j) {
      if (j == i || matched[j]) continue;
      const SlitSpec& b = modes[j].slit();
      if (std::abs((a.center - axis) + (b.center - axis)) < tol &&
          std::abs(a.width_sigma - b.width_sigma) < tol &&
          std::abs(a.forward_phase_velocity + b.forward_phase_velocity) <
              tol &&
          std::abs(a.relative_phase_offset - b.relative_phase_offset) < tol &&
          std::abs(a.amplitude_weight - b.amplitude_weight) < tol) {
        matched[i] = matched[j] = true;
        found = true;
        break;
      }
    }
    // A slit sitting exactly on the axis with zero drift is its own
    // mirror image.
    if (!found && std::abs(a.center - axis) < tol &&
        std::abs(a.forward_phase_velocity) < tol) {
      matched[i] = true;
      found = true;
    }
    if (!found) return false;
  }
  return true;
}

NoCrossingReport no_crossing_report(const EmergentField& field,
                                    const Ensemble& ensemble, double axis) {
  NoCrossingReport report;
  report.applicable = mirror_symmetric(field.modes(), axis);

  const bool tracked = ensemble.spec.crossing_axis.has_value() &&
                       *ensemble.spec.crossing_axis == axis;
  for (const Trajectory& traj : ensemble.trajectories) {
    long crossings = 0;
    double violation = 0.0;
    if (tracked) {
      crossings = traj.crossings;
      violation = traj.max_violation;
    } else {
      // Fall back to the recorded uniform samples, same guard band as
      // the in-flight tracker.
      const double guard = 10.0 * ensemble.spec.tol *
                           std::max(1.0, min_initial_sigma(field));
      int last_sign = 0;
      const int side = traj.x.empty() ? 0
                       : (traj.x[0] > axis ? 1 : (traj.x[0] < axis ? -1 : 0));
      for (double xs : traj.x) {
        const double rel = xs - axis;
        if (side != 0) violation = std::max(violation, -side * rel);
        if (std::abs(rel) > guard) {
          const int sign = rel > 0.0 ? 1 : -1;
          if (last_sign != 0 && sign != last_sign) ++crossings;
          last_sign = sign;
        }
      }
    }
    report.crossings_per_trajectory.push_back(static_cast<int>(crossings));
    report.crossings_total += crossings;
    report.max_violation = std::max(report.max_violation, violation);
  }
  return report;
}

ScreenHistogram screen_histogram(const Ensemble& ensemble,
                                 const EmergentField& reference,
                                 double t_screen, int bins, double lo,
                                 double hi) {
  if (bins < 1) throw InvalidParameterError("histogram needs bins >= 1");
  if (!(hi > lo)) throw InvalidParameterError("histogram needs hi > lo");
  if (ensemble.trajectories.empty()) {
    throw InvalidParameterError("histogram needs a non-empty ensemble");
  }

  // Locate the recorded sample index for t_screen.
  const std::vector<double>& times = ensemble.trajectories.front().t;
  int idx = -1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double d = std::abs(times[i] - t_screen);
    if (d < best) {
      best = d;
      idx = static_cast<int>(i);
    }
  }
  const double span = ensemble.t1 - ensemble.t0;
  if (idx < 0 || best > 1e-9 * std::max(1.0, span)) {
    throw InvalidParameterError(
        "t_screen does not coincide with a recorded sample time");
  }

  ScreenHistogram h;
  h.lo = lo;
  h.hi = hi;
  const double width = (hi - lo) / bins;
  h.centers.resize(bins);
  h.density.assign(bins, 0.0);
  h.reference_density.assign(bins, 0.0);
  for (int b = 0; b < bins; ++b) h.centers[b] = lo + (b + 0.5) * width;

  std::vector<double> mass(bins, 0.0);
  for (const Trajectory& traj : ensemble.trajectories) {
    const double xs = traj.x[idx];
    if (xs < lo || xs >= hi) continue;
    const int b = std::min(bins - 1, static_cast<int>((xs - lo) / width));
    mass[b] += 1.0;
    ++h.n_in_window;
  }
  if (h.n_in_window == 0) {
    throw Error("no trajectory endpoint falls inside the histogram window");
  }
  for (int b = 0; b < bins; ++b) mass[b] /= h.n_in_window;

  // Reference bin masses from the field density (8-point midpoint rule
  // per bin), normalized over the window.
  std::vector<double> ref_mass(bins, 0.0);
  double total = 0.0;
  constexpr int kSub = 8;
  for (int b = 0; b < bins; ++b) {
    double acc = 0.0;
    for (int s = 0; s < kSub; ++s) {
      const double x = lo + (b + (s + 0.5) / kSub) * width;
      acc += reference.total_density(x, t_screen);
    }
    ref_mass[b] = acc * width / kSub;
    total += ref_mass[b];
  }
  for (int b = 0; b < bins; ++b) ref_mass[b] /= total;

  double l1 = 0.0;
  for (int b = 0; b < bins; ++b) {
    l1 += std::abs(mass[b] - ref_mass[b]);
    h.density[b] = mass[b] / width;
    h.reference_density[b] = ref_mass[b] / width;
  }
  h.l1_mass_distance = l1;
  return h;
}

}  // namespace slitflow
