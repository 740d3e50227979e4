#pragma once

#include <functional>
#include <vector>

namespace slitflow {

struct OdeControls {
  double rtol = 1e-8;
  double atol = 1e-8;
  double dt_init = 0.0;      // 0 = choose automatically
  double dt_min_rel = 1e-14; // step floor as a fraction of the span
  long max_steps = 5000000;
};

struct OdeStats {
  long n_steps = 0;
  long n_rejected = 0;
  long n_rhs = 0;
};

/// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with the standard
/// 4th-order continuous extension for dense output.  The state dimension
/// is fixed at construction; all workspace is preallocated, so repeated
/// integrations do not allocate.  Fully deterministic for identical
/// inputs and controls.
///
/// The right-hand side may throw (e.g. NodeError when the flow field is
/// evaluated at a node); the exception propagates out of integrate().
/// A step size below the floor raises StepUnderflowError, which signals
/// a stiff region, typically the neighborhood of a node.
class Dopri5 {
 public:
  using Rhs = std::function<void(double t, const double* y, double* dydt)>;

  /// View of one accepted step, valid only inside the observer call.
  class DenseStep {
   public:
    double t_begin() const { return t0_; }
    double t_end() const { return t1_; }
    const double* y_begin() const { return y0_; }
    const double* y_end() const { return y1_; }
    /// Evaluate the interpolant at t in [t_begin, t_end] into yout.
    void eval(double t, double* yout) const;

   private:
    friend class Dopri5;
    double t0_, t1_;
    const double* y0_;
    const double* y1_;
    const Dopri5* owner_;
  };

  using Observer = std::function<void(const DenseStep&)>;

  explicit Dopri5(int dim);

  int dim() const { return dim_; }

  /// Integrate y' = f(t,y) from t0 to t1 (t1 > t0); y is updated in
  /// place to y(t1).
  OdeStats integrate(double t0, double t1, double* y, const Rhs& rhs,
                     const OdeControls& controls,
                     const Observer& observer = {});

 private:
  void prepare_dense(double h);

  int dim_;
  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_;
  std::vector<double> ytmp_, ynew_, yerr_;
  std::vector<double> rcont1_, rcont2_, rcont3_, rcont4_, rcont5_;
};

}  // namespace slitflow
