#include "slitflow/emergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "slitflow/errors.hpp"

namespace slitflow {

namespace {

constexpr int kMaxSlitsOnStack = 8;

// Per-slit data at one (x,t), rescaled by the largest log amplitude.
struct SlitPoint {
  ModeSample ms;
  double r;   // exp(log_r - log_scale), in (0,1]
  double c;   // cos(S/hbar)
  double sn;  // sin(S/hbar)
  double v;   // convective velocity dS/dx / m
  double d;   // diffusion velocity (hbar/m) dlogR/dx
};

struct PointEval {
  int n = 0;
  double log_scale = 0.0;  // max_k log R_k
  double cx = 0.0, cy = 0.0;
  double p_hat = 0.0;  // P_tot * exp(-2 log_scale)
  double j_hat = 0.0;  // J_tot * exp(-2 log_scale)
  SlitPoint s[kMaxSlitsOnStack];
  std::vector<SlitPoint> overflow;

  SlitPoint* data() { return n <= kMaxSlitsOnStack ? s : overflow.data(); }
  const SlitPoint* data() const {
    return n <= kMaxSlitsOnStack ? s : overflow.data();
  }
  double log_p() const { return 2.0 * log_scale + std::log(p_hat); }
};

PointEval evaluate_point(const std::vector<WaveMode>& modes, double x,
                         double t) {
  PointEval ev;
  ev.n = static_cast<int>(modes.size());
  if (ev.n > kMaxSlitsOnStack) ev.overflow.resize(ev.n);
  SlitPoint* sp = ev.data();

  const PhysicalParams& p = modes.front().params();
  double log_scale = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < ev.n; ++k) {
    sp[k].ms = modes[k].eval(x, t);
    log_scale = std::max(log_scale, sp[k].ms.log_r);
  }
  ev.log_scale = log_scale;

  for (int k = 0; k < ev.n; ++k) {
    const ModeSample& ms = sp[k].ms;
    sp[k].r = std::exp(ms.log_r - log_scale);
    const double phi = ms.s / p.hbar;
    sp[k].c = std::cos(phi);
    sp[k].sn = std::sin(phi);
    sp[k].v = ms.ds_dx / p.mass;
    sp[k].d = (p.hbar / p.mass) * ms.dlogr_dx;
    ev.cx += sp[k].r * sp[k].c;
    ev.cy += sp[k].r * sp[k].sn;
  }
  ev.p_hat = ev.cx * ev.cx + ev.cy * ev.cy;

  // Channel currents, grouped per slit.  z_k = e^{-i phi_k} sum_j R_j
  // e^{i phi_j}; the convective channel contributes v_k Re z_k, the
  // diffusive pair combines to -d_k Im z_k.  The k == j term is taken
  // exactly, so a single-slit system reduces to the convective current
  // with no diffusive residue.
  double j = 0.0;
  for (int k = 0; k < ev.n; ++k) {
    double re = sp[k].r;
    double im = 0.0;
    for (int jx = 0; jx < ev.n; ++jx) {
      if (jx == k) continue;
      re += sp[jx].r * (sp[jx].c * sp[k].c + sp[jx].sn * sp[k].sn);
      im += sp[jx].r * (sp[jx].sn * sp[k].c - sp[jx].c * sp[k].sn);
    }
    j += sp[k].r * (sp[k].v * re - sp[k].d * im);
  }
  ev.j_hat = j;
  return ev;
}

// Phasor sums needed for the analytic acceleration: A and its first and
// second derivatives, all rescaled like PointEval.
struct FlowDerivs {
  double p, p_x, p_t;  // scaled by exp(-2 log_scale)
  double j, j_x, j_t;
  double log_scale;
};

FlowDerivs evaluate_flow_derivs(const std::vector<WaveMode>& modes, double x,
                                double t) {
  const PhysicalParams& prm = modes.front().params();
  const double hbar = prm.hbar;

  double log_scale = -std::numeric_limits<double>::infinity();
  std::vector<ModeSample> ms(modes.size());
  for (std::size_t k = 0; k < modes.size(); ++k) {
    ms[k] = modes[k].eval(x, t);
    log_scale = std::max(log_scale, ms[k].log_r);
  }

  double a_re = 0, a_im = 0;
  double ax_re = 0, ax_im = 0;
  double at_re = 0, at_im = 0;
  double axx_re = 0, axx_im = 0;
  double axt_re = 0, axt_im = 0;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const ModeSample& m = ms[k];
    const double r = std::exp(m.log_r - log_scale);
    const double phi = m.s / hbar;
    const double c = std::cos(phi), sn = std::sin(phi);
    const double er = r * c, ei = r * sn;  // r e^{i phi}

    // complex log-derivatives G_x, G_t, G_xx, G_xt of log psi
    const double gx_re = m.dlogr_dx, gx_im = m.ds_dx / hbar;
    const double gt_re = m.dlogr_dt, gt_im = m.ds_dt / hbar;
    const double gxx_re = m.d2logr_dx2, gxx_im = m.d2s_dx2 / hbar;
    const double gxt_re = m.d2logr_dxdt, gxt_im = m.d2s_dxdt / hbar;

    // psi_x = G_x psi ; psi_t = G_t psi
    ax_re += er * gx_re - ei * gx_im;
    ax_im += er * gx_im + ei * gx_re;
    at_re += er * gt_re - ei * gt_im;
    at_im += er * gt_im + ei * gt_re;

    // psi_xx = (G_xx + G_x^2) psi
    const double h2_re = gxx_re + gx_re * gx_re - gx_im * gx_im;
    const double h2_im = gxx_im + 2.0 * gx_re * gx_im;
    axx_re += er * h2_re - ei * h2_im;
    axx_im += er * h2_im + ei * h2_re;

    // psi_xt = (G_xt + G_x G_t) psi
    const double hm_re = gxt_re + gx_re * gt_re - gx_im * gt_im;
    const double hm_im = gxt_im + gx_re * gt_im + gx_im * gt_re;
    axt_re += er * hm_re - ei * hm_im;
    axt_im += er * hm_im + ei * hm_re;

    a_re += er;
    a_im += ei;
  }

  const double hm = hbar / prm.mass;
  FlowDerivs fd;
  fd.log_scale = log_scale;
  fd.p = a_re * a_re + a_im * a_im;
  fd.p_x = 2.0 * (a_re * ax_re + a_im * ax_im);
  fd.p_t = 2.0 * (a_re * at_re + a_im * at_im);
  fd.j = hm * (a_re * ax_im - a_im * ax_re);
  fd.j_x = hm * (a_re * axx_im - a_im * axx_re);
  fd.j_t = hm * (at_re * ax_im - at_im * ax_re + a_re * axt_im -
                 a_im * axt_re);
  return fd;
}

}  // namespace

EmergentField::EmergentField(ChannelSet channels, double node_threshold)
    : channels_(std::move(channels)), node_threshold_(node_threshold) {
  if (!(std::isfinite(node_threshold_) && node_threshold_ > 0.0)) {
    throw InvalidParameterError("node_threshold must be finite and > 0");
  }
  log_node_threshold_ = std::log(node_threshold_);
}

double EmergentField::total_density(double x, double t) const {
  const PointEval ev = evaluate_point(modes(), x, t);
  return ev.p_hat * std::exp(2.0 * ev.log_scale);
}

double EmergentField::log_total_density(double x, double t) const {
  return evaluate_point(modes(), x, t).log_p();
}

double EmergentField::total_current(double x, double t) const {
  const PointEval ev = evaluate_point(modes(), x, t);
  return ev.j_hat * std::exp(2.0 * ev.log_scale);
}

double EmergentField::emergent_velocity(double x, double t) const {
  const PointEval ev = evaluate_point(modes(), x, t);
  if (!(ev.log_p() > log_node_threshold_)) {
    throw NodeError(x, t, ev.log_p());
  }
  return ev.j_hat / ev.p_hat;
}

double EmergentField::emergent_acceleration(double x, double t) const {
  const FlowDerivs fd = evaluate_flow_derivs(modes(), x, t);
  const double log_p = 2.0 * fd.log_scale + std::log(fd.p);
  if (!(log_p > log_node_threshold_)) {
    throw NodeError(x, t, log_p);
  }
  const double v = fd.j / fd.p;
  const double v_x = (fd.j_x - v * fd.p_x) / fd.p;
  const double v_t = (fd.j_t - v * fd.p_t) / fd.p;
  return v_t + v * v_x;
}

double EmergentField::emergent_acceleration_fd(double x, double t) const {
  double sigma_min = std::numeric_limits<double>::infinity();
  double tdisp_min = std::numeric_limits<double>::infinity();
  for (const WaveMode& m : modes()) {
    sigma_min = std::min(sigma_min, m.sigma_at(t));
    const double s0 = m.slit().width_sigma;
    tdisp_min = std::min(tdisp_min,
                         2.0 * m.params().mass * s0 * s0 / m.params().hbar);
  }

  const auto accel_at_steps = [&](double hx, double ht) {
    // 5-point central first derivatives of v in x and t.
    const auto v = [&](double xx, double tt) {
      return emergent_velocity(xx, tt);
    };
    const double v0 = v(x, t);
    const double vx = (-v(x + 2 * hx, t) + 8 * v(x + hx, t) -
                       8 * v(x - hx, t) + v(x - 2 * hx, t)) /
                      (12.0 * hx);
    const double vt = (-v(x, t + 2 * ht) + 8 * v(x, t + ht) -
                       8 * v(x, t - ht) + v(x, t - 2 * ht)) /
                      (12.0 * ht);
    return vt + v0 * vx;
  };

  const double hx = sigma_min / 512.0;
  const double ht = tdisp_min / 512.0;
  double a_h, a_h2;
  try {
    a_h = accel_at_steps(hx, ht);
    a_h2 = accel_at_steps(0.5 * hx, 0.5 * ht);
  } catch (const NodeError& e) {
    throw NonFiniteError(std::string("acceleration stencil straddles a node: ") +
                         e.what());
  }
  // Richardson extrapolation of the O(h^4) stencil, with a consistency
  // check between the two step sizes.
  const double a = (16.0 * a_h2 - a_h) / 15.0;
  if (!std::isfinite(a) ||
      std::abs(a_h - a_h2) > 0.1 * (std::abs(a_h2) + 1e-300)) {
    throw NonFiniteError("acceleration stencil inconsistent under step "
                         "refinement (node nearby)");
  }
  return a;
}

FieldSample EmergentField::sample(double x, double t, SampleRequest req) const {
  const PointEval ev = evaluate_point(modes(), x, t);
  const double scale2 = std::exp(2.0 * ev.log_scale);
  FieldSample out;
  out.p_tot = ev.p_hat * scale2;
  out.j_tot = ev.j_hat * scale2;
  if (ev.log_p() > log_node_threshold_) {
    out.v_tot = ev.j_hat / ev.p_hat;
    if (req.with_acceleration) {
      try {
        out.a_tot = emergent_acceleration(x, t);
      } catch (const NodeError&) {
        // The acceleration path rounds its own node test; on the razor
        // edge the sample keeps v and reports the acceleration absent.
      }
    }
  }
  if (req.with_entangling && n_slits() == 2) {
    out.entangling = entangling_current(modes()[0], modes()[1], x, t);
  }
  return out;
}

double double_slit_velocity_closed_form(const WaveMode& mode1,
                                        const WaveMode& mode2, double x,
                                        double t, double node_threshold) {
  if (!mode1.params().same_as(mode2.params())) {
    throw MismatchedParamsError("closed form needs modes with shared params");
  }
  const PhysicalParams& p = mode1.params();
  const ModeSample m1 = mode1.eval(x, t);
  const ModeSample m2 = mode2.eval(x, t);

  const double log_scale = std::max(m1.log_r, m2.log_r);
  const double r1 = std::exp(m1.log_r - log_scale);
  const double r2 = std::exp(m2.log_r - log_scale);
  const double v1 = m1.ds_dx / p.mass;
  const double v2 = m2.ds_dx / p.mass;
  const double u1 = (p.hbar / p.mass) * m1.dlogr_dx;
  const double u2 = (p.hbar / p.mass) * m2.dlogr_dx;
  const double phi = (m1.s - m2.s) / p.hbar;
  const double c = std::cos(phi), sn = std::sin(phi);

  const double den = r1 * r1 + r2 * r2 + 2.0 * r1 * r2 * c;
  const double log_den = 2.0 * log_scale + std::log(den);
  if (!(log_den > std::log(node_threshold))) {
    throw NodeError(x, t, log_den);
  }
  const double num = r1 * r1 * v1 + r2 * r2 * v2 +
                     r1 * r2 * (v1 + v2) * c + r1 * r2 * (u1 - u2) * sn;
  return num / den;
}

double entangling_current(const WaveMode& mode1, const WaveMode& mode2,
                          double x, double t) {
  if (!mode1.params().same_as(mode2.params())) {
    throw MismatchedParamsError("entangling current needs shared params");
  }
  const PhysicalParams& p = mode1.params();
  const ModeSample m1 = mode1.eval(x, t);
  const ModeSample m2 = mode2.eval(x, t);
  const double v1 = m1.ds_dx / p.mass;
  const double v2 = m2.ds_dx / p.mass;
  const double u1 = (p.hbar / p.mass) * m1.dlogr_dx;
  const double u2 = (p.hbar / p.mass) * m2.dlogr_dx;
  const double phi = (m1.s - m2.s) / p.hbar;
  const double bracket =
      (v1 + v2) * std::cos(phi) + (u1 - u2) * std::sin(phi);
  return std::exp(m1.log_r + m2.log_r) * bracket;
}

LogCurrent entangling_current_log(const WaveMode& mode1, const WaveMode& mode2,
                                  double x, double t) {
  if (!mode1.params().same_as(mode2.params())) {
    throw MismatchedParamsError("entangling current needs shared params");
  }
  const PhysicalParams& p = mode1.params();
  const ModeSample m1 = mode1.eval(x, t);
  const ModeSample m2 = mode2.eval(x, t);
  const double v1 = m1.ds_dx / p.mass;
  const double v2 = m2.ds_dx / p.mass;
  const double u1 = (p.hbar / p.mass) * m1.dlogr_dx;
  const double u2 = (p.hbar / p.mass) * m2.dlogr_dx;
  const double phi = (m1.s - m2.s) / p.hbar;
  const double bracket =
      (v1 + v2) * std::cos(phi) + (u1 - u2) * std::sin(phi);
  LogCurrent out;
  out.sign = bracket > 0.0 ? 1 : (bracket < 0.0 ? -1 : 0);
  out.log_magnitude = out.sign == 0
                          ? -std::numeric_limits<double>::infinity()
                          : m1.log_r + m2.log_r + std::log(std::abs(bracket));
  return out;
}

}  // namespace slitflow
