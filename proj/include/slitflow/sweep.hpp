#pragma once

#include <cstdint>
#include <vector>

#include "slitflow/bohmian.hpp"
#include "slitflow/emergence.hpp"
#include "slitflow/exec.hpp"

namespace slitflow {

/// Uniform (x,t) evaluation grid.  Row-major storage, t outer, x inner.
struct GridSpec {
  double x_min = -1.0, x_max = 1.0;
  int nx = 2;
  double t_min = 0.0, t_max = 1.0;
  int nt = 2;

  double x(int i) const { return x_min + (x_max - x_min) * i / double(nx - 1); }
  double t(int j) const { return t_min + (t_max - t_min) * j / double(nt - 1); }
  double dx() const { return (x_max - x_min) / (nx - 1); }
  double dt() const { return (t_max - t_min) / (nt - 1); }
  long size() const { return static_cast<long>(nx) * nt; }
  long index(int i, int j) const { return static_cast<long>(j) * nx + i; }
  /// Same extent, halved spacing.
  GridSpec refined() const {
    GridSpec g = *this;
    g.nx = 2 * nx - 1;
    g.nt = 2 * nt - 1;
    return g;
  }
  void validate() const;
};

/// Field and oracle values on a grid.  Velocity entries are NaN at
/// nodes.  delta_v is the velocity discrepancy relative to the local
/// guidance-velocity magnitude.
struct FieldGridData {
  std::vector<double> p, j, v, a;
  std::vector<double> p_oracle, v_oracle;
  std::vector<double> delta_v;
  void resize(long n);
};

/// Serial reference kernel.
void field_grid_sweep_serial(const EmergentField& field,
                             const WaveFunction& oracle, const GridSpec& grid,
                             FieldGridData& out, bool with_acceleration);
/// OpenMP twin; identical output bit for bit.
void field_grid_sweep_parallel(const EmergentField& field,
                               const WaveFunction& oracle,
                               const GridSpec& grid, FieldGridData& out,
                               bool with_acceleration, int n_threads);
void field_grid_sweep(const EmergentField& field, const WaveFunction& oracle,
                      const GridSpec& grid, FieldGridData& out,
                      bool with_acceleration, ExecPolicy policy = {});

/// RMS over interior grid nodes of dP/dt + dJ/dx (central differences);
/// second-order convergent, so refined() should shrink it by ~4.
double continuity_residual_rms(const EmergentField& field,
                               const GridSpec& grid, ExecPolicy policy = {});

/// Random-point sampling box for the identity scans.
struct SampleBox {
  double x_min, x_max, t_min, t_max;
};

/// Maximum relative deviations between the emergent field and the
/// quantum-mechanical oracle over n random points with density above
/// density_floor.  Velocity-type deviations are measured relative to
/// the local magnitude of the complex guidance velocity
/// (hbar/m) |dPsi/dx / Psi|; the density deviation is relative to
/// |Psi|^2 itself.
struct IdentityScanResult {
  double max_rel_velocity = 0.0;
  double max_rel_density = 0.0;
  double max_rel_current = 0.0;
  /// Channel route vs. two-slit closed form (NaN unless n_slits == 2).
  double max_rel_closed_form = 0.0;
  long n_samples = 0;
};

IdentityScanResult identity_scan_serial(const EmergentField& field,
                                        const WaveFunction& oracle,
                                        const SampleBox& box, long n,
                                        std::uint64_t seed,
                                        double density_floor);
IdentityScanResult identity_scan_parallel(const EmergentField& field,
                                          const WaveFunction& oracle,
                                          const SampleBox& box, long n,
                                          std::uint64_t seed,
                                          double density_floor, int n_threads);
IdentityScanResult identity_scan(const EmergentField& field,
                                 const WaveFunction& oracle,
                                 const SampleBox& box, long n,
                                 std::uint64_t seed, double density_floor,
                                 ExecPolicy policy = {});

/// Max relative deviation of the emergent acceleration from the quantum
/// force per unit mass over grid points with P_tot > p_frac_floor * max
/// P_tot.  The denominator carries a small floor (1e-6 of the largest
/// |a|) so isolated zeros of the acceleration do not blow up the ratio.
double force_identity_max_rel(const EmergentField& field,
                              const WaveFunction& oracle, const GridSpec& grid,
                              double p_frac_floor, ExecPolicy policy = {});

}  // namespace slitflow
