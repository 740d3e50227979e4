// Timing harness comparing the serial reference kernels against their
// OpenMP twins: field grid sweep, continuity residual, identity scan
// and ensemble integration.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "slitflow/bohmian.hpp"
#include "slitflow/emergence.hpp"
#include "slitflow/exec.hpp"
#include "slitflow/sweep.hpp"
#include "slitflow/trajectories.hpp"

using namespace slitflow;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_best_of(int repeats, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    fn();
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    if (dt < best) best = dt;
  }
  return best;
}

void report(const std::string& name, double serial_s, double parallel_s,
            int threads) {
  std::printf("%-28s %10.3f ms %10.3f ms   x%.2f (%d threads)\n", name.c_str(),
              1e3 * serial_s, 1e3 * parallel_s, serial_s / parallel_s,
              threads);
}

}  // namespace

int main(int argc, char** argv) {
  ExecPolicy parallel;
  if (argc > 1) parallel.n_threads = std::atoi(argv[1]);
  const int threads = resolved_threads(parallel);

  const PhysicalParams physics = PhysicalParams::make(1.0, 1.0);
  std::vector<WaveMode> modes;
  modes.emplace_back(SlitSpec{-2.5, 0.6, 0.0, 0.0, 1.0}, physics);
  modes.emplace_back(SlitSpec{2.5, 0.6, 0.0, 0.0, 1.0}, physics);
  const EmergentField field(build_channels(modes), 1e-300);
  const WaveFunction oracle = superpose(modes);

  GridSpec grid{-12.0, 12.0, 800, 0.0, 3.0, 800};

  std::printf("%-28s %13s %13s   speedup\n", "kernel", "serial", "openmp");

  {
    FieldGridData a, b;
    const double ts = time_best_of(2, [&] {
      field_grid_sweep_serial(field, oracle, grid, a, false);
    });
    const double tp = time_best_of(2, [&] {
      field_grid_sweep_parallel(field, oracle, grid, b, false, threads);
    });
    report("field grid sweep 800x800", ts, tp, threads);
  }
  {
    const double ts = time_best_of(2, [&] {
      (void)continuity_residual_rms(field, grid, serial_policy());
    });
    const double tp = time_best_of(2, [&] {
      (void)continuity_residual_rms(field, grid, parallel);
    });
    report("continuity residual", ts, tp, threads);
  }
  {
    const SampleBox box{-12.0, 12.0, 0.0, 3.0};
    const double ts = time_best_of(2, [&] {
      (void)identity_scan_serial(field, oracle, box, 20000, 7, 1e-12);
    });
    const double tp = time_best_of(2, [&] {
      (void)identity_scan_parallel(field, oracle, box, 20000, 7, 1e-12,
                                   threads);
    });
    report("identity scan 2e4 pts", ts, tp, threads);
  }
  {
    EnsembleSpec spec;
    spec.n_traj = 400;
    spec.seed = 11;
    spec.tol = 1e-8;
    const double ts = time_best_of(1, [&] {
      (void)run_ensemble(field, spec, 0.0, 3.0, serial_policy());
    });
    const double tp = time_best_of(1, [&] {
      (void)run_ensemble(field, spec, 0.0, 3.0, parallel);
    });
    report("ensemble 400 trajectories", ts, tp, threads);
  }
  return 0;
}
