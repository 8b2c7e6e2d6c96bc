// Adaptive Dormand-Prince 5(4) stepper for fixed-size Eigen states.
//
// The state type must support +, -, scalar * and cwiseAbs(); error control is
// the Hairer-Wanner RMS norm over all entries.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace holopt {

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what + " at t=" + std::to_string(time)), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

struct StepControl {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step = 0.0;  // 0 = unbounded
  std::size_t max_steps = 1'000'000;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

/// Integrates y' = f(t, y) from t0 to t1 in place. `observer(t, y)` is called
/// after every accepted step (not at t0). Throws IntegrationError when the step
/// size underflows or the step budget runs out.
template <class State, class Rhs, class Observer>
StepStats integrate_dopri5(Rhs&& f, double t0, double t1, State& y, const StepControl& ctl,
                           Observer&& observer) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b_hat (embedded fourth-order weights)
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  StepStats stats;
  if (!(t1 > t0)) return stats;
  const double span = t1 - t0;
  const double max_step = ctl.max_step > 0.0 ? std::min(ctl.max_step, span) : span;
  const double min_step = 1e-14 * span;

  auto err_norm = [&](const State& y0, const State& y1, const State& err) {
    const auto scale = ((y0.cwiseAbs().cwiseMax(y1.cwiseAbs())) * ctl.rel_tol).array() + ctl.abs_tol;
    const auto ratio = err.cwiseAbs().array() / scale;
    return std::sqrt(ratio.square().sum() / static_cast<double>(ratio.size()));
  };

  double t = t0;
  State k1 = f(t, y);
  ++stats.rhs_evals;

  // Initial step guess (Hairer, Norsett & Wanner II.4).
  double h;
  {
    const auto sc = (y.cwiseAbs() * ctl.rel_tol).array() + ctl.abs_tol;
    const double d0 = std::sqrt((y.cwiseAbs().array() / sc).square().mean());
    const double d1 = std::sqrt((k1.cwiseAbs().array() / sc).square().mean());
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h = std::clamp(h, min_step, max_step);
  }

  double err_prev = 1e-4;
  while (t < t1) {
    if (stats.accepted + stats.rejected >= ctl.max_steps) {
      throw IntegrationError("step budget exhausted", t);
    }
    bool last = false;
    if (t + h >= t1 || t1 - (t + h) < min_step) {
      h = t1 - t;
      last = true;
    }
    const State k2 = f(t + c2 * h, State(y + h * (a21 * k1)));
    const State k3 = f(t + c3 * h, State(y + h * (a31 * k1 + a32 * k2)));
    const State k4 = f(t + c4 * h, State(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    const State k5 = f(t + c5 * h, State(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const State k6 =
        f(t + h, State(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    const State y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const State k7 = f(t + h, y_new);
    stats.rhs_evals += 6;
    const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = err_norm(y, y_new, err);
    if (!std::isfinite(en)) throw IntegrationError("non-finite state", t);

    if (en <= 1.0) {
      t = last ? t1 : t + h;
      y = y_new;
      k1 = k7;  // first-same-as-last
      ++stats.accepted;
      observer(t, static_cast<const State&>(y));
      // PI step-size controller
      const double fac = std::clamp(0.9 * std::pow(std::max(en, 1e-10), -0.7 / 5.0) *
                                        std::pow(err_prev, 0.4 / 5.0),
                                    0.2, 10.0);
      err_prev = std::max(en, 1e-4);
      h = std::min(h * fac, max_step);
    } else {
      ++stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -1.0 / 5.0));
    }
    if (h < min_step && t < t1) throw IntegrationError("step size underflow", t);
  }
  return stats;
}

}  // namespace holopt
