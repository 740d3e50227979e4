#include "slitflow/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slitflow/errors.hpp"

namespace slitflow {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                 a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                 c5 = 8.0 / 9.0;
// Embedded error coefficients (5th minus 4th order weights).
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                 e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Dense output coefficients.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

}  // namespace

Dopri5::Dopri5(int dim)
    : dim_(dim),
      k1_(dim), k2_(dim), k3_(dim), k4_(dim), k5_(dim), k6_(dim), k7_(dim),
      ytmp_(dim), ynew_(dim), yerr_(dim),
      rcont1_(dim), rcont2_(dim), rcont3_(dim), rcont4_(dim), rcont5_(dim) {
  if (dim < 1) throw InvalidParameterError("ODE dimension must be >= 1");
}

void Dopri5::DenseStep::eval(double t, double* yout) const {
  const double h = t1_ - t0_;
  const double theta = (t - t0_) / h;
  const double theta1 = 1.0 - theta;
  const Dopri5& o = *owner_;
  for (int i = 0; i < o.dim_; ++i) {
    yout[i] = o.rcont1_[i] +
              theta * (o.rcont2_[i] +
                       theta1 * (o.rcont3_[i] +
                                 theta * (o.rcont4_[i] +
                                          theta1 * o.rcont5_[i])));
  }
}

OdeStats Dopri5::integrate(double t0, double t1, double* y, const Rhs& rhs,
                           const OdeControls& controls,
                           const Observer& observer) {
  if (!(t1 > t0)) {
    throw InvalidParameterError("integration needs t1 > t0");
  }
  OdeStats stats;
  const double span = t1 - t0;
  const double dt_min = controls.dt_min_rel * span;

  double t = t0;
  rhs(t, y, k1_.data());
  ++stats.n_rhs;

  // Initial step from the scaled state / derivative norms (Hairer's
  // h0 = 0.01 d0 / d1), clamped into the span.
  double h = controls.dt_init;
  if (h <= 0.0) {
    double d0 = 0.0, d1 = 0.0;
    for (int i = 0; i < dim_; ++i) {
      const double sc = controls.atol + controls.rtol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k1_[i] / sc) * (k1_[i] / sc);
    }
    d0 = std::sqrt(d0 / dim_);
    d1 = std::sqrt(d1 / dim_);
    h = (d0 > 1e-10 && d1 > 1e-10) ? 0.01 * d0 / d1 : 1e-6 * span;
    h = std::clamp(h, 100.0 * dt_min, 0.1 * span);
  }

  bool last_rejected = false;
  while (t < t1) {
    if (stats.n_steps + stats.n_rejected > controls.max_steps) {
      throw Error("integrator exceeded max step count at t=" +
                  std::to_string(t));
    }
    if (h < dt_min) {
      throw StepUnderflowError(
          "step size underflow at t=" + std::to_string(t) +
          " (stiff region, likely near a node)");
    }
    bool final_step = false;
    if (t + h >= t1) {
      h = t1 - t;
      final_step = true;
    }

    const double* yv = y;
    for (int i = 0; i < dim_; ++i) ytmp_[i] = yv[i] + h * a21 * k1_[i];
    rhs(t + c2 * h, ytmp_.data(), k2_.data());
    for (int i = 0; i < dim_; ++i)
      ytmp_[i] = yv[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
    rhs(t + c3 * h, ytmp_.data(), k3_.data());
    for (int i = 0; i < dim_; ++i)
      ytmp_[i] = yv[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
    rhs(t + c4 * h, ytmp_.data(), k4_.data());
    for (int i = 0; i < dim_; ++i)
      ytmp_[i] = yv[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] +
                              a54 * k4_[i]);
    rhs(t + c5 * h, ytmp_.data(), k5_.data());
    for (int i = 0; i < dim_; ++i)
      ytmp_[i] = yv[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] +
                              a64 * k4_[i] + a65 * k5_[i]);
    rhs(t + h, ytmp_.data(), k6_.data());
    for (int i = 0; i < dim_; ++i)
      ynew_[i] = yv[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] +
                              a75 * k5_[i] + a76 * k6_[i]);
    rhs(t + h, ynew_.data(), k7_.data());
    stats.n_rhs += 6;

    double err = 0.0;
    for (int i = 0; i < dim_; ++i) {
      yerr_[i] = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                      e6 * k6_[i] + e7 * k7_[i]);
      const double sc =
          controls.atol +
          controls.rtol * std::max(std::abs(yv[i]), std::abs(ynew_[i]));
      const double r = yerr_[i] / sc;
      err += r * r;
    }
    err = std::sqrt(err / dim_);

    if (err <= 1.0) {
      prepare_dense(h);
      for (int i = 0; i < dim_; ++i) {
        rcont1_[i] = yv[i];
        rcont2_[i] = ynew_[i] - yv[i];
        rcont3_[i] = h * k1_[i] - rcont2_[i];
        rcont4_[i] = rcont2_[i] - h * k7_[i] - rcont3_[i];
      }
      if (observer) {
        DenseStep step;
        step.t0_ = t;
        step.t1_ = t + h;
        step.y0_ = yv;
        step.y1_ = ynew_.data();
        step.owner_ = this;
        observer(step);
      }
      t = final_step ? t1 : t + h;
      for (int i = 0; i < dim_; ++i) y[i] = ynew_[i];
      std::swap(k1_, k7_);  // FSAL
      ++stats.n_steps;

      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      h *= fac;
      last_rejected = false;
    } else {
      ++stats.n_rejected;
      const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
      h *= fac;
      last_rejected = true;
    }
  }
  return stats;
}

void Dopri5::prepare_dense(double h) {
  for (int i = 0; i < dim_; ++i) {
    rcont5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] +
                      d6 * k6_[i] + d7 * k7_[i]);
  }
}

}  // namespace slitflow
