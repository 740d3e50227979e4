// Acceptance suite: one pass/fail line per criterion, exit code = number
// of failures.  Each criterion pins its thresholds inline; nothing is
// left to later calibration.
//
// Velocity-type deviations are relative to the local magnitude of the
// complex guidance velocity (hbar/m)|dPsi/dx / Psi| (it bounds both the
// convective and osmotic parts, so the ratio stays meaningful at
// isolated zeros of v); density deviations are relative to |Psi|^2.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "slitflow/bohmian.hpp"
#include "slitflow/commands.hpp"
#include "slitflow/emergence.hpp"
#include "slitflow/nparticle.hpp"
#include "slitflow/sweep.hpp"
#include "slitflow/trajectories.hpp"

using namespace slitflow;

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;

void report(int index, const std::string& name, bool pass,
            const std::string& detail, double seconds) {
  std::printf("[%s] %d. %-24s %s (%.2f s)\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

// Deterministic pseudo-random slit layouts.
struct ParamRng {
  std::uint64_t state;
  double uniform(double lo, double hi) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return lo + (hi - lo) * ((z >> 11) * 0x1.0p-53);
  }
};

std::vector<WaveMode> random_modes(int n, std::uint64_t seed) {
  ParamRng rng{seed};
  const PhysicalParams physics = PhysicalParams::make(1.0, 1.0);
  std::vector<WaveMode> modes;
  for (int k = 0; k < n; ++k) {
    SlitSpec slit;
    slit.center = (k - 0.5 * (n - 1)) * rng.uniform(1.2, 2.2);
    slit.width_sigma = rng.uniform(0.45, 1.1);
    slit.forward_phase_velocity = rng.uniform(-1.2, 1.2);
    slit.relative_phase_offset = rng.uniform(0.0, 2.0 * M_PI);
    modes.emplace_back(slit, physics);
  }
  return modes;
}

SampleBox scan_box(const std::vector<WaveMode>& modes, double t_max) {
  double lo = 1e300, hi = -1e300;
  for (const WaveMode& m : modes) {
    const double reach = 6.0 * m.sigma_at(t_max);
    lo = std::min({lo, m.center_at(0.0) - reach, m.center_at(t_max) - reach});
    hi = std::max({hi, m.center_at(0.0) + reach, m.center_at(t_max) + reach});
  }
  return SampleBox{lo, hi, 0.0, t_max};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

// --------------------------------------------------------------------------

void criterion_1_guidance_identity() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::string detail;
  double slowest = 0.0;
  for (int n : {1, 2, 3, 5}) {
    const auto s0 = Clock::now();
    const std::vector<WaveMode> modes = random_modes(n, 1000 + n);
    const EmergentField field(build_channels(modes));
    const WaveFunction oracle = superpose(modes);
    const IdentityScanResult scan =
        identity_scan(field, oracle, scan_box(modes, 3.0), 10000,
                      2000 + n, thresholds::kOracleDensityFloor);
    const double elapsed = std::chrono::duration<double>(Clock::now() - s0)
                               .count();
    slowest = std::max(slowest, elapsed);
    pass = pass && scan.max_rel_velocity < thresholds::kVelocityIdentity &&
           elapsed < 10.0;
    detail += "n=" + std::to_string(n) + ":" + fmt(scan.max_rel_velocity) +
              " ";
  }
  report(1, "guidance identity", pass,
         "max rel |v_tot - v_bohm| " + detail + "< 1e-10, slowest scenario " +
             fmt(slowest) + " s",
         std::chrono::duration<double>(Clock::now() - t0).count());
}

void criterion_2_closed_form() {
  const auto t0 = Clock::now();
  const std::vector<WaveMode> modes = random_modes(2, 1002);
  const EmergentField field(build_channels(modes));
  const WaveFunction oracle = superpose(modes);
  const IdentityScanResult scan =
      identity_scan(field, oracle, scan_box(modes, 3.0), 10000, 2002,
                    thresholds::kOracleDensityFloor);
  const bool pass = scan.max_rel_closed_form < thresholds::kClosedFormIdentity;
  report(2, "closed-form consistency", pass,
         "max rel deviation " + fmt(scan.max_rel_closed_form) + " < 1e-12",
         std::chrono::duration<double>(Clock::now() - t0).count());
}

void criterion_3_density_identity() {
  const auto t0 = Clock::now();
  bool pass = true;
  double worst = 0.0;
  for (int n : {1, 2, 3, 5}) {
    const std::vector<WaveMode> modes = random_modes(n, 1000 + n);
    const EmergentField field(build_channels(modes));
    const WaveFunction oracle = superpose(modes);
    const IdentityScanResult scan =
        identity_scan(field, oracle, scan_box(modes, 3.0), 10000, 2000 + n,
                      thresholds::kOracleDensityFloor);
    worst = std::max(worst, scan.max_rel_density);
    pass = pass && scan.max_rel_density < thresholds::kDensityIdentity;
  }
  report(3, "density identity", pass, "max rel " + fmt(worst) + " < 1e-12",
         std::chrono::duration<double>(Clock::now() - t0).count());
}

void criterion_4_continuity() {
  const auto t0 = Clock::now();
  const PhysicalParams physics = PhysicalParams::make(1.0, 1.0);
  std::vector<WaveMode> modes;
  modes.emplace_back(SlitSpec{-2.5, 0.6, 0.0, 0.0, 1.0}, physics);
  modes.emplace_back(SlitSpec{2.5, 0.6, 0.0, 0.0, 1.0}, physics);
  const EmergentField field(build_channels(modes));
  const GridSpec grid{-12.0, 12.0, 400, 0.0, 3.0, 400};
  const double coarse = continuity_residual_rms(field, grid);
  const double fine = continuity_residual_rms(field, grid.refined());
  const double ratio = coarse / fine;
  const double elapsed =
      std::chrono::duration<double>(Clock::now() - t0).count();
  const bool pass = ratio > thresholds::kContinuityRatioLo &&
                    ratio < thresholds::kContinuityRatioHi && elapsed < 30.0;
  report(4, "continuity convergence", pass,
         "residual shrink factor " + fmt(ratio) + " in [3.6, 4.4]", elapsed);
}

void criterion_5_force_identity() {
  const auto t0 = Clock::now();
  // (a) pointwise identity on the demo grid where P > 1e-6 max P
  const PhysicalParams physics = PhysicalParams::make(1.0, 1.0);
  std::vector<WaveMode> modes;
  modes.emplace_back(SlitSpec{-2.5, 0.6, 0.0, 0.0, 1.0}, physics);
  modes.emplace_back(SlitSpec{2.5, 0.6, 0.0, 0.0, 1.0}, physics);
  const EmergentField field(build_channels(modes));
  const WaveFunction oracle = superpose(modes);
  const GridSpec grid{-12.0, 12.0, 200, 0.05, 3.0, 120};
  const double worst = force_identity_max_rel(
      field, oracle, grid, thresholds::kForceDensityFloor);
  bool pass = worst < thresholds::kForceIdentity;

  // (b) |a_tot| monotone along a node-approaching transect over the
  // final decade of density decay (colliding pair, exact node).
  std::vector<WaveMode> colliding;
  colliding.emplace_back(SlitSpec{-3.0, 0.8, 1.0, 0.0, 1.0}, physics);
  colliding.emplace_back(SlitSpec{3.0, 0.8, -1.0, 0.0, 1.0}, physics);
  const EmergentField cfield(build_channels(colliding));
  const double t_star = 3.0;
  const double x_node = M_PI / 2.0;
  bool monotone = true;
  double p_first = 0.0, p_last = 0.0;
  for (int side : {-1, 1}) {
    double prev_a = -1.0;
    for (int k = 0; k < 16; ++k) {
      const double d = 0.25 * std::pow(0.6, k);
      const double x = x_node + side * d;
      const double p = cfield.total_density(x, t_star);
      const double a = std::abs(cfield.emergent_acceleration(x, t_star));
      if (k == 0) p_first = p;
      p_last = p;
      if (prev_a >= 0.0 && a <= prev_a) monotone = false;
      prev_a = a;
    }
  }
  const bool decade_covered = p_first / p_last > 10.0;
  pass = pass && monotone && decade_covered;
  report(5, "force identity", pass,
         "max rel " + fmt(worst) + " < 1e-4, |a| monotone into node over " +
             fmt(p_first / p_last) + "x density decay",
         std::chrono::duration<double>(Clock::now() - t0).count());
}

void criterion_6_no_crossing() {
  const auto t0 = Clock::now();
  const PhysicalParams physics = PhysicalParams::make(1.0, 1.0);
  std::vector<WaveMode> modes;
  modes.emplace_back(SlitSpec{-2.5, 0.6, 0.0, 0.0, 1.0}, physics);
  modes.emplace_back(SlitSpec{2.5, 0.6, 0.0, 0.0, 1.0}, physics);
  const EmergentField field(build_channels(modes));

  EnsembleSpec spec;
  spec.sampler = SamplerKind::BornRule;
  spec.n_traj = 200;
  spec.seed = 42;
  spec.tol = 1e-10;
  spec.crossing_axis = 0.0;
  const Ensemble ensemble = run_ensemble(field, spec, 0.0, 3.0);
  const NoCrossingReport rep = no_crossing_report(field, ensemble, 0.0);
  const double elapsed =
      std::chrono::duration<double>(Clock::now() - t0).count();
  const bool pass =
      rep.applicable && rep.crossings_total == 0 && elapsed < 60.0;
  report(6, "no-crossing", pass,
         std::to_string(rep.crossings_total) + " axis crossings in 200 "
         "Born trajectories (tol 1e-10)",
         elapsed);
}

void criterion_7_equivariance() {
  const auto t0 = Clock::now();
  const PhysicalParams physics = PhysicalParams::make(1.0, 1.0);
  std::vector<WaveMode> modes;
  modes.emplace_back(SlitSpec{-2.5, 0.6, 0.0, 0.0, 1.0}, physics);
  modes.emplace_back(SlitSpec{2.5, 0.6, 0.0, 0.0, 1.0}, physics);
  const EmergentField field(build_channels(modes));

  EnsembleSpec spec;
  spec.sampler = SamplerKind::BornRule;
  spec.n_traj = 10000;
  spec.seed = 42;
  spec.tol = 1e-8;
  spec.record_samples = 11;
  const double t_screen = 3.0;
  const Ensemble ensemble = run_ensemble(field, spec, 0.0, t_screen);
  const ScreenHistogram hist =
      screen_histogram(ensemble, field, t_screen, 50, -10.0, 10.0);

  const std::vector<double> peaks =
      oracles::refined_peak_positions(hist.density, hist.centers, 0.15);
  const double bin_w = 20.0 / 50.0;
  const double spacing = oracles::median_peak_spacing(peaks);
  const double analytic =
      oracles::fringe_spacing(t_screen, 0.6, -2.5, 0.0, 2.5, 0.0, 1.0, 1.0);
  const bool pass = hist.l1_mass_distance < thresholds::kScreenL1 &&
                    peaks.size() >= 2 &&
                    std::abs(spacing - analytic) <= bin_w;
  report(7, "equivariance + fringes", pass,
         "L1 " + fmt(hist.l1_mass_distance) + " < 0.05, fringe spacing " +
             fmt(spacing) + " vs analytic " + fmt(analytic) + " (bin " +
             fmt(bin_w) + ")",
         std::chrono::duration<double>(Clock::now() - t0).count());
}

void criterion_8_nparticle() {
  const auto t0 = Clock::now();
  const PhysicalParams physics = PhysicalParams::make(1.0, 1.0);
  const WaveMode a(SlitSpec{-1.5, 0.7, 0.25, 0.0, 1.0}, physics);
  const WaveMode b(SlitSpec{1.5, 0.7, -0.25, 0.7, 1.0}, physics);
  const NParticleWaveFunction factorized =
      NParticleWaveFunction::product({1.0, 1.0}, {a, b});
  const NParticleWaveFunction symmetric =
      NParticleWaveFunction::exchange_symmetrized({1.0, 1.0}, a, b, +1);

  ParamRng rng{4242};
  double max_eq13 = 0.0;
  int used = 0;
  bool factorized_bit_exact = true;
  double nonlocality = 0.0;
  while (used < 1000) {
    ConfigurationPoint c;
    c.t = rng.uniform(0.0, 2.0);
    c.positions = {rng.uniform(-4.5, 4.5), rng.uniform(-4.5, 4.5)};
    if (symmetric.log_density(c) < std::log(1e-12)) continue;
    ++used;
    // conditional-wavefunction guidance identity on both states
    for (const NParticleWaveFunction* wf : {&factorized, &symmetric}) {
      const std::vector<double> v = wf->velocities(c);
      for (int i = 0; i < 2; ++i) {
        const double vg =
            wf->conditional(i, c).guidance_velocity(c.positions[i]);
        max_eq13 = std::max(max_eq13, std::abs(vg - v[i]) /
                                          (std::abs(v[i]) + std::abs(vg) +
                                           1e-12));
      }
    }
    // factorized independence, bit exact
    const double v1 = factorized.velocities(c)[0];
    ConfigurationPoint moved = c;
    moved.positions[1] += rng.uniform(-2.0, 2.0);
    if (factorized.velocities(moved)[0] != v1) factorized_bit_exact = false;
    // symmetrized nonlocality metric
    ConfigurationPoint probe = c;
    probe.positions[1] += 0.7;
    nonlocality = std::max(
        nonlocality,
        std::abs(symmetric.velocities(probe)[0] - symmetric.velocities(c)[0]));
  }

  // configuration-space equivariance at 1e4 samples
  ConfigBox box;
  box.lo = {-6.5, -6.5};
  box.hi = {6.5, 6.5};
  const double t1 = 1.2;
  const std::vector<std::vector<double>> endpoints =
      run_configuration_ensemble(symmetric, 0.0, t1, box, 10000, 777, 1e-7);
  const int nb = 14;
  const double lo = -7.0, hi = 7.0, w = (hi - lo) / nb;
  std::vector<double> hist(nb * nb, 0.0);
  int in_window = 0;
  for (const std::vector<double>& e : endpoints) {
    if (e[0] < lo || e[0] >= hi || e[1] < lo || e[1] >= hi) continue;
    hist[static_cast<int>((e[0] - lo) / w) * nb +
         static_cast<int>((e[1] - lo) / w)] += 1.0;
    ++in_window;
  }
  for (double& hcount : hist) hcount /= in_window;
  std::vector<double> ref(nb * nb, 0.0);
  double total = 0.0;
  for (int b1 = 0; b1 < nb; ++b1) {
    for (int b2 = 0; b2 < nb; ++b2) {
      double acc = 0.0;
      for (int s1 = 0; s1 < 4; ++s1) {
        for (int s2 = 0; s2 < 4; ++s2) {
          ConfigurationPoint q;
          q.t = t1;
          q.positions = {lo + (b1 + (s1 + 0.5) / 4.0) * w,
                         lo + (b2 + (s2 + 0.5) / 4.0) * w};
          acc += symmetric.density(q);
        }
      }
      ref[b1 * nb + b2] = acc / 16.0;
      total += ref[b1 * nb + b2];
    }
  }
  double l1 = 0.0;
  for (int k = 0; k < nb * nb; ++k) l1 += std::abs(hist[k] - ref[k] / total);

  const bool pass = max_eq13 < thresholds::kEq13Identity &&
                    factorized_bit_exact &&
                    nonlocality > thresholds::kNonlocalityFloor && l1 < 0.08;
  report(8, "n-particle", pass,
         "eq13 " + fmt(max_eq13) + " < 1e-12, factorized bit-exact " +
             (factorized_bit_exact ? "yes" : "NO") + ", nonlocality " +
             fmt(nonlocality) + " > 1e-6, config L1 " + fmt(l1) + " < 0.08",
         std::chrono::duration<double>(Clock::now() - t0).count());
}

void criterion_9_determinism() {
  const auto t0 = Clock::now();
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "slitflow_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);
  const std::string cfg =
      (fs::path(SLITFLOW_SCENARIO_DIR) / "double_slit_small.cfg").string();

  const auto run = [&](const std::string& out, int threads) {
    const std::string cmd = std::string(SLITFLOW_CLI_PATH) +
                            " ensemble --config " + cfg + " --out " + out +
                            " --threads " + std::to_string(threads) +
                            " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  // wall_time is run metadata; everything else must match bytewise.
  const auto strip_wall_time = [](std::string text) {
    const std::size_t pos = text.find("\"wall_time\"");
    if (pos == std::string::npos) return text;
    text.erase(pos, text.find('\n', pos) - pos);
    return text;
  };

  bool pass = run((base / "a").string(), 0) == 0 &&
              run((base / "b").string(), 0) == 0 &&
              run((base / "c").string(), 1) == 0;
  for (const char* name : {"trajectories.csv", "histogram.csv"}) {
    pass = pass && slurp(base / "a" / name) == slurp(base / "b" / name);
    // thread count must not matter either
    pass = pass && slurp(base / "a" / name) == slurp(base / "c" / name);
  }
  pass = pass && strip_wall_time(slurp(base / "a" / "summary.json")) ==
                     strip_wall_time(slurp(base / "b" / "summary.json"));
  report(9, "determinism", pass,
         "repeated ensemble runs byte-identical up to wall_time (and "
         "thread-count independent)",
         std::chrono::duration<double>(Clock::now() - t0).count());
}

}  // namespace

int main() {
  std::printf("slitflow acceptance suite\n");
  criterion_1_guidance_identity();
  criterion_2_closed_form();
  criterion_3_density_identity();
  criterion_4_continuity();
  criterion_5_force_identity();
  criterion_6_no_crossing();
  criterion_7_equivariance();
  criterion_8_nparticle();
  criterion_9_determinism();
  std::printf("%d of 9 criteria passed\n", 9 - g_failures);
  return g_failures;
}
