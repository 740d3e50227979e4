#include "slitflow/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slitflow/errors.hpp"
#include "slitflow/trajectories.hpp"

namespace slitflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

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

}  // namespace

void GridSpec::validate() const {
  if (nx < 2 || nt < 2) {
    throw InvalidParameterError("grid needs nx >= 2 and nt >= 2");
  }
  if (!(x_max > x_min) || !(t_max > t_min)) {
    throw InvalidParameterError("grid needs x_min < x_max and t_min < t_max");
  }
}

void FieldGridData::resize(long n) {
  p.assign(n, 0.0);
  j.assign(n, 0.0);
  v.assign(n, kNaN);
  a.assign(n, kNaN);
  p_oracle.assign(n, 0.0);
  v_oracle.assign(n, kNaN);
  delta_v.assign(n, kNaN);
}

namespace {

void sweep_one_node(const EmergentField& field, const WaveFunction& oracle,
                    const GridSpec& grid, FieldGridData& out,
                    bool with_acceleration, long idx) {
  const int i = static_cast<int>(idx % grid.nx);
  const int jt = static_cast<int>(idx / grid.nx);
  const double x = grid.x(i);
  const double t = grid.t(jt);

  const FieldSample fs = field.sample(
      x, t, {.with_acceleration = with_acceleration, .with_entangling = false});
  out.p[idx] = fs.p_tot;
  out.j[idx] = fs.j_tot;
  out.p_oracle[idx] = oracle.density(x, t);
  if (fs.v_tot) {
    out.v[idx] = *fs.v_tot;
    try {
      const double vb = oracle.bohm_velocity(x, t, field.node_threshold());
      out.v_oracle[idx] = vb;
      const double scale = oracle.guidance_scale(x, t);
      out.delta_v[idx] = std::abs(*fs.v_tot - vb) / (scale + 1e-300);
    } catch (const NodeError&) {
      // The oracle route rounds the threshold test independently; a
      // point this marginal stays a NaN node entry.
    }
  }
  if (fs.a_tot) out.a[idx] = *fs.a_tot;
}

}  // namespace

void field_grid_sweep_serial(const EmergentField& field,
                             const WaveFunction& oracle, const GridSpec& grid,
                             FieldGridData& out, bool with_acceleration) {
  grid.validate();
  out.resize(grid.size());
  for (long idx = 0; idx < grid.size(); ++idx) {
    sweep_one_node(field, oracle, grid, out, with_acceleration, idx);
  }
}

void field_grid_sweep_parallel(const EmergentField& field,
                               const WaveFunction& oracle,
                               const GridSpec& grid, FieldGridData& out,
                               bool with_acceleration, int n_threads) {
  grid.validate();
  out.resize(grid.size());
  const long n = grid.size();
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (long idx = 0; idx < n; ++idx) {
    sweep_one_node(field, oracle, grid, out, with_acceleration, idx);
  }
#else
  (void)n_threads;
  for (long idx = 0; idx < n; ++idx) {
    sweep_one_node(field, oracle, grid, out, with_acceleration, idx);
  }
#endif
}

void field_grid_sweep(const EmergentField& field, const WaveFunction& oracle,
                      const GridSpec& grid, FieldGridData& out,
                      bool with_acceleration, ExecPolicy policy) {
  const int n_threads = resolved_threads(policy);
  if (n_threads == 1) {
    field_grid_sweep_serial(field, oracle, grid, out, with_acceleration);
  } else {
    field_grid_sweep_parallel(field, oracle, grid, out, with_acceleration,
                              n_threads);
  }
}

double continuity_residual_rms(const EmergentField& field,
                               const GridSpec& grid, ExecPolicy policy) {
  grid.validate();
  const long n = grid.size();
  std::vector<double> p(n), j(n);

  const int n_threads = resolved_threads(policy);
  const auto fill = [&](long idx) {
    const int i = static_cast<int>(idx % grid.nx);
    const int jt = static_cast<int>(idx / grid.nx);
    const double x = grid.x(i);
    const double t = grid.t(jt);
    p[idx] = field.total_density(x, t);
    j[idx] = field.total_current(x, t);
  };
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (long idx = 0; idx < n; ++idx) fill(idx);
#else
  (void)n_threads;
  for (long idx = 0; idx < n; ++idx) fill(idx);
#endif

  // Serial fold keeps the result independent of the thread count.
  const double inv_2dx = 1.0 / (2.0 * grid.dx());
  const double inv_2dt = 1.0 / (2.0 * grid.dt());
  double sum = 0.0;
  long count = 0;
  for (int jt = 1; jt < grid.nt - 1; ++jt) {
    for (int i = 1; i < grid.nx - 1; ++i) {
      const double dp_dt =
          (p[grid.index(i, jt + 1)] - p[grid.index(i, jt - 1)]) * inv_2dt;
      const double dj_dx =
          (j[grid.index(i + 1, jt)] - j[grid.index(i - 1, jt)]) * inv_2dx;
      const double r = dp_dt + dj_dx;
      sum += r * r;
      ++count;
    }
  }
  return std::sqrt(sum / count);
}

namespace {

struct ScanSample {
  double rel_v = 0.0, rel_p = 0.0, rel_j = 0.0, rel_cf = 0.0;
};

ScanSample scan_one(const EmergentField& field, const WaveFunction& oracle,
                    const SampleBox& box, std::uint64_t seed, long index,
                    double density_floor) {
  std::uint64_t rng = substream_seed(seed, static_cast<std::uint64_t>(index));
  double x = 0.0, t = 0.0, p_or = 0.0;
  bool found = false;
  for (int tries = 0; tries < 10000; ++tries) {
    x = box.x_min + (box.x_max - box.x_min) * uniform01(rng);
    t = box.t_min + (box.t_max - box.t_min) * uniform01(rng);
    p_or = oracle.density(x, t);
    if (p_or > density_floor) {
      found = true;
      break;
    }
  }
  if (!found) {
    throw Error("identity scan could not find a point above the density "
                "floor (box mostly nodal?)");
  }

  ScanSample s;
  const double scale = oracle.guidance_scale(x, t) + 1e-300;
  const double v_ch = field.emergent_velocity(x, t);
  const double v_or = oracle.bohm_velocity(x, t);
  s.rel_v = std::abs(v_ch - v_or) / scale;

  const double p_ch = field.total_density(x, t);
  s.rel_p = std::abs(p_ch - p_or) / p_or;

  const double j_ch = field.total_current(x, t);
  const double j_or = oracle.qm_current(x, t);
  s.rel_j = std::abs(j_ch - j_or) / (p_or * scale + 1e-300);

  if (field.n_slits() == 2) {
    const double v_cf = double_slit_velocity_closed_form(
        field.modes()[0], field.modes()[1], x, t, field.node_threshold());
    s.rel_cf = std::abs(v_ch - v_cf) / scale;
  }
  return s;
}

IdentityScanResult fold_scan(const std::vector<ScanSample>& samples) {
  IdentityScanResult r;
  r.n_samples = static_cast<long>(samples.size());
  for (const ScanSample& s : samples) {
    r.max_rel_velocity = std::max(r.max_rel_velocity, s.rel_v);
    r.max_rel_density = std::max(r.max_rel_density, s.rel_p);
    r.max_rel_current = std::max(r.max_rel_current, s.rel_j);
    r.max_rel_closed_form = std::max(r.max_rel_closed_form, s.rel_cf);
  }
  return r;
}

}  // namespace

IdentityScanResult identity_scan_serial(const EmergentField& field,
                                        const WaveFunction& oracle,
                                        const SampleBox& box, long n,
                                        std::uint64_t seed,
                                        double density_floor) {
  std::vector<ScanSample> samples(n);
  for (long i = 0; i < n; ++i) {
    samples[i] = scan_one(field, oracle, box, seed, i, density_floor);
  }
  return fold_scan(samples);
}

IdentityScanResult identity_scan_parallel(const EmergentField& field,
                                          const WaveFunction& oracle,
                                          const SampleBox& box, long n,
                                          std::uint64_t seed,
                                          double density_floor,
                                          int n_threads) {
  std::vector<ScanSample> samples(n);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (long i = 0; i < n; ++i) {
    samples[i] = scan_one(field, oracle, box, seed, i, density_floor);
  }
#else
  (void)n_threads;
  for (long i = 0; i < n; ++i) {
    samples[i] = scan_one(field, oracle, box, seed, i, density_floor);
  }
#endif
  return fold_scan(samples);
}

IdentityScanResult identity_scan(const EmergentField& field,
                                 const WaveFunction& oracle,
                                 const SampleBox& box, long n,
                                 std::uint64_t seed, double density_floor,
                                 ExecPolicy policy) {
  const int n_threads = resolved_threads(policy);
  if (n_threads == 1) {
    return identity_scan_serial(field, oracle, box, n, seed, density_floor);
  }
  return identity_scan_parallel(field, oracle, box, n, seed, density_floor,
                                n_threads);
}

double force_identity_max_rel(const EmergentField& field,
                              const WaveFunction& oracle, const GridSpec& grid,
                              double p_frac_floor, ExecPolicy policy) {
  grid.validate();
  const long n = grid.size();
  std::vector<double> p(n), a_ch(n, kNaN), a_or(n, kNaN);
  const int n_threads = resolved_threads(policy);

  const auto fill_p = [&](long idx) {
    const int i = static_cast<int>(idx % grid.nx);
    const int jt = static_cast<int>(idx / grid.nx);
    p[idx] = field.total_density(grid.x(i), grid.t(jt));
  };
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (long idx = 0; idx < n; ++idx) fill_p(idx);
#else
  for (long idx = 0; idx < n; ++idx) fill_p(idx);
#endif

  double p_max = 0.0;
  for (long idx = 0; idx < n; ++idx) p_max = std::max(p_max, p[idx]);
  const double p_floor = p_frac_floor * p_max;

  const auto fill_a = [&](long idx) {
    if (p[idx] <= p_floor) return;
    const int i = static_cast<int>(idx % grid.nx);
    const int jt = static_cast<int>(idx / grid.nx);
    a_ch[idx] = field.emergent_acceleration(grid.x(i), grid.t(jt));
    a_or[idx] = oracle.quantum_force(grid.x(i), grid.t(jt));
  };
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (long idx = 0; idx < n; ++idx) fill_a(idx);
#else
  for (long idx = 0; idx < n; ++idx) fill_a(idx);
#endif

  double a_max = 0.0;
  for (long idx = 0; idx < n; ++idx) {
    if (std::isfinite(a_or[idx])) a_max = std::max(a_max, std::abs(a_or[idx]));
  }
  const double floor = 1e-6 * a_max + 1e-300;
  double worst = 0.0;
  for (long idx = 0; idx < n; ++idx) {
    if (!std::isfinite(a_or[idx])) continue;
    worst = std::max(worst, std::abs(a_ch[idx] - a_or[idx]) /
                                (std::abs(a_or[idx]) + floor));
  }
  return worst;
}

}  // namespace slitflow
