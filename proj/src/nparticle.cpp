#include "slitflow/nparticle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "slitflow/errors.hpp"
#include "slitflow/ode.hpp"
#include "slitflow/trajectories.hpp"

namespace slitflow {

namespace {

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

// Per-term complex exponent E = sum_i (log R_i + i S_i/hbar) and the
// per-particle complex log-derivatives G_x,i.
struct TermEval {
  double log_r = 0.0;
  double phase = 0.0;
  std::vector<std::complex<double>> gx;
};

}  // namespace

NParticleWaveFunction::NParticleWaveFunction(std::vector<double> masses,
                                             std::vector<ProductTerm> terms,
                                             double node_threshold)
    : masses_(std::move(masses)),
      terms_(std::move(terms)),
      node_threshold_(node_threshold) {
  if (masses_.empty()) {
    throw InvalidParameterError("need at least one particle");
  }
  if (terms_.empty()) {
    throw InvalidParameterError("need at least one product term");
  }
  if (!(std::isfinite(node_threshold_) && node_threshold_ > 0.0)) {
    throw InvalidParameterError("node_threshold must be finite and > 0");
  }
  const double hbar_ref = terms_.front().factors.front().params().hbar;
  for (const ProductTerm& term : terms_) {
    if (term.factors.size() != masses_.size()) {
      throw MismatchedParamsError(
          "every product term needs one factor per particle");
    }
    for (std::size_t i = 0; i < term.factors.size(); ++i) {
      const PhysicalParams& p = term.factors[i].params();
      if (p.hbar != hbar_ref) {
        throw MismatchedParamsError("all factors must share hbar");
      }
      if (p.mass != masses_[i]) {
        throw MismatchedParamsError(
            "factor mass must match the particle mass");
      }
    }
  }
}

NParticleWaveFunction NParticleWaveFunction::product(
    std::vector<double> masses, std::vector<WaveMode> factors) {
  ProductTerm term;
  term.coeff = 1.0;
  term.factors = std::move(factors);
  return NParticleWaveFunction(std::move(masses), {std::move(term)});
}

NParticleWaveFunction NParticleWaveFunction::exchange_symmetrized(
    std::vector<double> masses, const WaveMode& a, const WaveMode& b,
    int sign) {
  if (masses.size() != 2) {
    throw InvalidParameterError("exchange_symmetrized is a two-particle state");
  }
  if (sign != 1 && sign != -1) {
    throw InvalidParameterError("exchange sign must be +1 or -1");
  }
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  ProductTerm ab;
  ab.coeff = inv_sqrt2;
  ab.factors = {a, b};
  ProductTerm ba;
  ba.coeff = sign * inv_sqrt2;
  ba.factors = {b, a};
  return NParticleWaveFunction(std::move(masses), {ab, ba});
}

double NParticleWaveFunction::hbar() const {
  return terms_.front().factors.front().params().hbar;
}

namespace {

// Evaluates all terms at a configuration; returns the common log scale
// (the largest term log magnitude) plus per-term scaled contributions.
struct StateEval {
  std::complex<double> psi = 0.0;              // scaled by exp(-log_scale)
  std::vector<std::complex<double>> grad;      // scaled d Psi / dx_i
  double log_scale = 0.0;
};

StateEval evaluate_state(const std::vector<ProductTerm>& terms,
                         const std::vector<double>& masses,
                         double hbar, const ConfigurationPoint& config) {
  const int n = static_cast<int>(masses.size());
  std::vector<TermEval> evals(terms.size());
  double log_scale = -std::numeric_limits<double>::infinity();
  for (std::size_t tix = 0; tix < terms.size(); ++tix) {
    TermEval& ev = evals[tix];
    ev.gx.resize(n);
    for (int i = 0; i < n; ++i) {
      const ModeSample ms = terms[tix].factors[i].eval(config.positions[i],
                                                       config.t);
      ev.log_r += ms.log_r;
      ev.phase += ms.s / hbar;
      ev.gx[i] = {ms.dlogr_dx, ms.ds_dx / hbar};
    }
    log_scale = std::max(log_scale, ev.log_r);
  }

  StateEval out;
  out.log_scale = log_scale;
  out.grad.assign(n, 0.0);
  for (std::size_t tix = 0; tix < terms.size(); ++tix) {
    const TermEval& ev = evals[tix];
    const std::complex<double> term =
        terms[tix].coeff *
        std::exp(std::complex<double>(ev.log_r - log_scale, ev.phase));
    out.psi += term;
    for (int i = 0; i < n; ++i) out.grad[i] += ev.gx[i] * term;
  }
  return out;
}

}  // namespace

double NParticleWaveFunction::log_density(
    const ConfigurationPoint& config) const {
  const StateEval ev = evaluate_state(terms_, masses_, hbar(), config);
  return 2.0 * ev.log_scale + std::log(std::norm(ev.psi));
}

double NParticleWaveFunction::density(const ConfigurationPoint& config) const {
  const StateEval ev = evaluate_state(terms_, masses_, hbar(), config);
  return std::norm(ev.psi) * std::exp(2.0 * ev.log_scale);
}

std::vector<double> NParticleWaveFunction::velocities(
    const ConfigurationPoint& config) const {
  const int n = n_particles();
  std::vector<double> v(n);
  const double h = hbar();

  if (terms_.size() == 1) {
    // Product state: grad_i Psi / Psi is the factor's own log
    // derivative, so v_i depends on x_i alone, bit for bit.
    for (int i = 0; i < n; ++i) {
      const ModeSample ms =
          terms_[0].factors[i].eval(config.positions[i], config.t);
      v[i] = ms.ds_dx / masses_[i];
    }
    return v;
  }

  const StateEval ev = evaluate_state(terms_, masses_, h, config);
  const double log_p = 2.0 * ev.log_scale + std::log(std::norm(ev.psi));
  if (!(log_p > std::log(node_threshold_))) {
    throw NodeError(config.positions[0], config.t, log_p);
  }
  for (int i = 0; i < n; ++i) {
    v[i] = (h / masses_[i]) * std::imag(ev.grad[i] / ev.psi);
  }
  return v;
}

std::vector<double> NParticleWaveFunction::currents(
    const ConfigurationPoint& config) const {
  const int n = n_particles();
  const double h = hbar();
  const StateEval ev = evaluate_state(terms_, masses_, h, config);
  const double scale2 = std::exp(2.0 * ev.log_scale);
  std::vector<double> j(n);
  for (int i = 0; i < n; ++i) {
    j[i] = (h / masses_[i]) *
           std::imag(std::conj(ev.psi) * ev.grad[i]) * scale2;
  }
  return j;
}

ConditionalWaveFunction NParticleWaveFunction::conditional(
    int i, const ConfigurationPoint& config) const {
  if (i < 0 || i >= n_particles()) {
    throw InvalidParameterError("particle index out of range");
  }
  ConditionalWaveFunction cwf;
  cwf.t_ = config.t;
  cwf.hbar_ = hbar();
  cwf.mass_ = masses_[i];
  cwf.node_threshold_ = node_threshold_;
  for (const ProductTerm& term : terms_) {
    ConditionalWaveFunction::SliceTerm st;
    st.coeff = term.coeff;
    st.free_mode = &term.factors[i];
    for (int jx = 0; jx < n_particles(); ++jx) {
      if (jx == i) continue;
      const ModeSample ms = term.factors[jx].eval(config.positions[jx],
                                                  config.t);
      st.frozen_log_r += ms.log_r;
      st.frozen_phase += ms.s / cwf.hbar_;
    }
    cwf.slice_.push_back(st);
  }
  return cwf;
}

std::complex<double> ConditionalWaveFunction::value_scaled(double x) const {
  const double ls = log_scale(x);
  std::complex<double> acc = 0.0;
  for (const SliceTerm& st : slice_) {
    const ModeSample ms = st.free_mode->eval(x, t_);
    acc += st.coeff *
           std::exp(std::complex<double>(st.frozen_log_r + ms.log_r - ls,
                                         st.frozen_phase + ms.s / hbar_));
  }
  return acc;
}

double ConditionalWaveFunction::log_scale(double x) const {
  double ls = -std::numeric_limits<double>::infinity();
  for (const SliceTerm& st : slice_) {
    const ModeSample ms = st.free_mode->eval(x, t_);
    ls = std::max(ls, st.frozen_log_r + ms.log_r);
  }
  return ls;
}

std::complex<double> ConditionalWaveFunction::log_derivative(double x) const {
  const double ls = log_scale(x);
  std::complex<double> value = 0.0;
  std::complex<double> derivative = 0.0;
  for (const SliceTerm& st : slice_) {
    const ModeSample ms = st.free_mode->eval(x, t_);
    const std::complex<double> term =
        st.coeff *
        std::exp(std::complex<double>(st.frozen_log_r + ms.log_r - ls,
                                      st.frozen_phase + ms.s / hbar_));
    value += term;
    derivative += std::complex<double>(ms.dlogr_dx, ms.ds_dx / hbar_) * term;
  }
  if (value == std::complex<double>(0.0, 0.0)) {
    throw NodeError(x, t_, -std::numeric_limits<double>::infinity());
  }
  return derivative / value;
}

double ConditionalWaveFunction::guidance_velocity(double x) const {
  const double ls = log_scale(x);
  std::complex<double> value = 0.0;
  std::complex<double> derivative = 0.0;
  for (const SliceTerm& st : slice_) {
    const ModeSample ms = st.free_mode->eval(x, t_);
    const std::complex<double> term =
        st.coeff *
        std::exp(std::complex<double>(st.frozen_log_r + ms.log_r - ls,
                                      st.frozen_phase + ms.s / hbar_));
    value += term;
    derivative += std::complex<double>(ms.dlogr_dx, ms.ds_dx / hbar_) * term;
  }
  const double log_p = 2.0 * ls + std::log(std::norm(value));
  if (!(log_p > std::log(node_threshold_))) {
    throw NodeError(x, t_, log_p);
  }
  return (hbar_ / mass_) * std::imag(derivative / value);
}

ConfigTrajectory integrate_configuration(
    const NParticleWaveFunction& wf, const ConfigurationPoint& start,
    double t1, const ConfigIntegrateOptions& options) {
  const int n = wf.n_particles();
  if (static_cast<int>(start.positions.size()) != n) {
    throw InvalidParameterError("configuration size != n_particles");
  }
  if (!(t1 > start.t)) {
    throw InvalidParameterError("integrate_configuration needs t1 > t0");
  }

  double sigma_ref = std::numeric_limits<double>::infinity();
  for (const ProductTerm& term : wf.terms()) {
    for (const WaveMode& m : term.factors) {
      sigma_ref = std::min(sigma_ref, m.slit().width_sigma);
    }
  }

  ConfigTrajectory traj;
  const int ns = std::max(2, options.record_samples);
  traj.t.resize(ns);
  for (int k = 0; k < ns; ++k) {
    traj.t[k] = start.t + (t1 - start.t) * static_cast<double>(k) /
                              static_cast<double>(ns - 1);
  }
  traj.t.back() = t1;
  traj.positions.assign(ns, std::vector<double>(n));
  traj.positions[0] = start.positions;

  Dopri5 solver(n);
  OdeControls controls;
  controls.rtol = options.tol;
  controls.atol = options.tol * sigma_ref;
  controls.max_steps = options.max_steps;

  ConfigurationPoint probe;
  probe.positions.resize(n);
  const auto rhs = [&](double t, const double* y, double* dydt) {
    probe.t = t;
    std::copy(y, y + n, probe.positions.begin());
    const std::vector<double> v = wf.velocities(probe);
    for (int i = 0; i < n; ++i) dydt[i] = v[i];
  };

  int next_record = 1;
  std::vector<double> scratch(n);
  const auto observer = [&](const Dopri5::DenseStep& step) {
    while (next_record < ns && traj.t[next_record] <= step.t_end()) {
      step.eval(traj.t[next_record], scratch.data());
      traj.positions[next_record] = scratch;
      ++next_record;
    }
  };

  std::vector<double> y = start.positions;
  solver.integrate(start.t, t1, y.data(), rhs, controls, observer);
  while (next_record < ns) {
    traj.positions[next_record] = y;
    ++next_record;
  }
  traj.positions.back() = y;

  traj.velocities.assign(ns, std::vector<double>(n));
  for (int k = 0; k < ns; ++k) {
    ConfigurationPoint c;
    c.t = traj.t[k];
    c.positions = traj.positions[k];
    traj.velocities[k] = wf.velocities(c);
  }
  return traj;
}

ConfigBornSampler::ConfigBornSampler(const NParticleWaveFunction& wf,
                                     double t0, const ConfigBox& box)
    : wf_(&wf), t0_(t0), box_(box) {
  if (wf.n_particles() != 2) {
    throw InvalidParameterError(
        "the configuration-space Born sampler is implemented for two "
        "particles (desk scale)");
  }
  if (box_.lo.size() != 2 || box_.hi.size() != 2 || !(box_.hi[0] > box_.lo[0]) ||
      !(box_.hi[1] > box_.lo[1])) {
    throw InvalidParameterError("invalid configuration sampling box");
  }
  // Deterministic grid scan for the density cap, in log space.
  constexpr int kScan = 512;
  double cap = -std::numeric_limits<double>::infinity();
  ConfigurationPoint c;
  c.t = t0;
  c.positions.resize(2);
  for (int i = 0; i < kScan; ++i) {
    c.positions[0] =
        box_.lo[0] + (box_.hi[0] - box_.lo[0]) * i / double(kScan - 1);
    for (int j = 0; j < kScan; ++j) {
      c.positions[1] =
          box_.lo[1] + (box_.hi[1] - box_.lo[1]) * j / double(kScan - 1);
      cap = std::max(cap, wf.log_density(c));
    }
  }
  log_density_cap_ = cap + std::log(1.10);
}

std::vector<double> ConfigBornSampler::sample(std::uint64_t& rng_state) const {
  ConfigurationPoint c;
  c.t = t0_;
  c.positions.resize(2);
  for (long tries = 0; tries < 1000000; ++tries) {
    c.positions[0] = box_.lo[0] + (box_.hi[0] - box_.lo[0]) * uniform01(rng_state);
    c.positions[1] = box_.lo[1] + (box_.hi[1] - box_.lo[1]) * uniform01(rng_state);
    const double u = uniform01(rng_state);
    if (u <= 0.0) continue;
    if (std::log(u) + log_density_cap_ <= wf_->log_density(c)) {
      return c.positions;
    }
  }
  throw Error("configuration-space rejection sampling failed to accept");
}

std::vector<std::vector<double>> run_configuration_ensemble(
    const NParticleWaveFunction& wf, double t0, double t1,
    const ConfigBox& box, int n, std::uint64_t seed, double tol,
    ExecPolicy policy) {
  if (n < 1) throw InvalidParameterError("ensemble needs n >= 1");
  const ConfigBornSampler sampler(wf, t0, box);

  std::vector<std::vector<double>> endpoints(n);
  ConfigIntegrateOptions options;
  options.tol = tol;
  options.record_samples = 2;

  const int n_threads = resolved_threads(policy);
  int first_error = -1;
  std::string error_message;

  const auto run_one = [&](int i) {
    std::uint64_t rng = substream_seed(seed, static_cast<std::uint64_t>(i));
    ConfigurationPoint start;
    start.t = t0;
    start.positions = sampler.sample(rng);
    const ConfigTrajectory traj =
        integrate_configuration(wf, start, t1, options);
    endpoints[i] = traj.positions.back();
  };

#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 4) num_threads(n_threads)
  for (int i = 0; i < n; ++i) {
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
  for (int i = 0; i < n; ++i) {
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
  return endpoints;
}

}  // namespace slitflow
