#include "slitflow/bohmian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slitflow/errors.hpp"

namespace slitflow {

WaveFunction::WaveFunction(std::vector<WaveMode> modes)
    : modes_(std::move(modes)) {
  if (modes_.empty()) {
    throw InvalidParameterError("a wavefunction needs at least one mode");
  }
  const PhysicalParams& ref = modes_.front().params();
  for (const WaveMode& m : modes_) {
    if (!m.params().same_as(ref)) {
      throw MismatchedParamsError(
          "all superposed modes must share hbar and mass exactly");
    }
  }
}

WaveDerivs WaveFunction::derivatives(double x, double t) const {
  const double hbar = params().hbar;

  double log_scale = -std::numeric_limits<double>::infinity();
  std::vector<ModeSample> ms(modes_.size());
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    ms[k] = modes_[k].eval(x, t);
    log_scale = std::max(log_scale, ms[k].log_r);
  }

  WaveDerivs out{};
  out.log_scale = log_scale;
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    const ModeSample& m = ms[k];
    const std::complex<double> psi_k =
        std::exp(std::complex<double>(m.log_r - log_scale, m.s / hbar));
    const std::complex<double> gx(m.dlogr_dx, m.ds_dx / hbar);
    const std::complex<double> gxx(m.d2logr_dx2, m.d2s_dx2 / hbar);
    const std::complex<double> gt(m.dlogr_dt, m.ds_dt / hbar);
    out.psi += psi_k;
    out.psi_x += gx * psi_k;
    // log psi is quadratic in x for Gaussian modes, so G_xxx == 0 and
    // psi_xxx = (G_x^3 + 3 G_x G_xx) psi.
    out.psi_xx += (gxx + gx * gx) * psi_k;
    out.psi_xxx += (gx * gx * gx + 3.0 * gx * gxx) * psi_k;
    out.psi_t += gt * psi_k;
  }
  return out;
}

std::complex<double> WaveFunction::psi(double x, double t) const {
  const WaveDerivs d = derivatives(x, t);
  return d.psi * std::exp(d.log_scale);
}

double WaveFunction::density(double x, double t) const {
  const WaveDerivs d = derivatives(x, t);
  return std::norm(d.psi) * std::exp(2.0 * d.log_scale);
}

double WaveFunction::log_density(double x, double t) const {
  const WaveDerivs d = derivatives(x, t);
  return 2.0 * d.log_scale + std::log(std::norm(d.psi));
}

double WaveFunction::qm_current(double x, double t) const {
  const WaveDerivs d = derivatives(x, t);
  const double hm = params().hbar / params().mass;
  return hm * std::imag(std::conj(d.psi) * d.psi_x) *
         std::exp(2.0 * d.log_scale);
}

double WaveFunction::bohm_velocity(double x, double t,
                                   double node_threshold) const {
  const WaveDerivs d = derivatives(x, t);
  const double log_p = 2.0 * d.log_scale + std::log(std::norm(d.psi));
  if (!(log_p > std::log(node_threshold))) {
    throw NodeError(x, t, log_p);
  }
  return (params().hbar / params().mass) * std::imag(d.psi_x / d.psi);
}

double WaveFunction::quantum_potential(double x, double t,
                                       double node_threshold) const {
  const WaveDerivs d = derivatives(x, t);
  const double p = std::norm(d.psi);
  const double log_p = 2.0 * d.log_scale + std::log(p);
  if (!(log_p > std::log(node_threshold))) {
    throw NodeError(x, t, log_p);
  }
  // Q in terms of density ratios: with L1 = P'/P, L2 = P''/P,
  //   Q = -(hbar^2/4m) (L2 - L1^2/2).
  const double p_x = 2.0 * std::real(std::conj(d.psi) * d.psi_x);
  const double p_xx =
      2.0 * std::real(std::conj(d.psi) * d.psi_xx) + 2.0 * std::norm(d.psi_x);
  const double l1 = p_x / p;
  const double l2 = p_xx / p;
  const double h = params().hbar;
  return -(h * h / (4.0 * params().mass)) * (l2 - 0.5 * l1 * l1);
}

double WaveFunction::quantum_force(double x, double t,
                                   double node_threshold) const {
  const WaveDerivs d = derivatives(x, t);
  const double p = std::norm(d.psi);
  const double log_p = 2.0 * d.log_scale + std::log(p);
  if (!(log_p > std::log(node_threshold))) {
    throw NodeError(x, t, log_p);
  }
  const double p_x = 2.0 * std::real(std::conj(d.psi) * d.psi_x);
  const double p_xx =
      2.0 * std::real(std::conj(d.psi) * d.psi_xx) + 2.0 * std::norm(d.psi_x);
  const double p_xxx = 2.0 * std::real(std::conj(d.psi) * d.psi_xxx) +
                       6.0 * std::real(std::conj(d.psi_x) * d.psi_xx);
  const double l1 = p_x / p;
  const double l2 = p_xx / p;
  const double l3 = p_xxx / p;
  // -(1/m) dQ/dx = (hbar^2 / 4 m^2) (L3 - 2 L1 L2 + L1^3)
  const double h = params().hbar;
  const double m = params().mass;
  return (h * h / (4.0 * m * m)) * (l3 - 2.0 * l1 * l2 + l1 * l1 * l1);
}

std::complex<double> WaveFunction::schrodinger_residual(double x,
                                                        double t) const {
  const WaveDerivs d = derivatives(x, t);
  const double h = params().hbar;
  return std::complex<double>(0.0, h) * d.psi_t +
         (h * h / (2.0 * params().mass)) * d.psi_xx;
}

double WaveFunction::guidance_scale(double x, double t) const {
  const WaveDerivs d = derivatives(x, t);
  return (params().hbar / params().mass) * std::abs(d.psi_x / d.psi);
}

WaveFunction superpose(std::vector<WaveMode> modes) {
  return WaveFunction(std::move(modes));
}

}  // namespace slitflow
