#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "lamespec/errors.hpp"

namespace lamespec::detail {

using Complex = std::complex<double>;

// Adaptive Dormand-Prince 5(4) for small complex systems (FSAL form).
template <int N, typename Rhs>
void dopri5(Rhs&& rhs, double x0, double x1, std::array<Complex, N>& y,
            double rtol, double atol) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  using State = std::array<Complex, N>;
  State k1, k2, k3, k4, k5, k6, k7, yt, y5;
  const double span = x1 - x0;
  if (span <= 0) return;

  rhs(x0, y, k1);
  double x = x0;
  double h = span / 64.0;
  long steps = 0;
  const long max_steps = 4000000;
  while (x < x1) {
    if (x + h > x1) h = x1 - x;
    for (int i = 0; i < N; ++i) yt[i] = y[i] + h * (a21 * k1[i]);
    rhs(x + c2 * h, yt, k2);
    for (int i = 0; i < N; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(x + c3 * h, yt, k3);
    for (int i = 0; i < N; ++i)
      yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(x + c4 * h, yt, k4);
    for (int i = 0; i < N; ++i)
      yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(x + c5 * h, yt, k5);
    for (int i = 0; i < N; ++i)
      yt[i] = y[i] +
              h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(x + h, yt, k6);
    for (int i = 0; i < N; ++i)
      y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(x + h, y5, k7);

    double errsq = 0;
    for (int i = 0; i < N; ++i) {
      const Complex err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                               e6 * k6[i] + e7 * k7[i]);
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      const double r = std::abs(err) / sc;
      errsq += r * r;
    }
    const double err = std::sqrt(errsq / N);

    if (err <= 1.0) {
      x += h;
      y = y5;
      k1 = k7;  // FSAL
    }
    const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
    h *= fac;
    if (h < 1e-14 * span)
      throw IntegratorFailure("dopri5: step size underflow");
    if (++steps > max_steps)
      throw IntegratorFailure("dopri5: step budget exhausted");
  }
}

}  // namespace lamespec::detail
