#include "lamespec/elliptic.hpp"

#include <algorithm>
#include <cmath>

namespace lamespec {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_modulus(double k) {
  if (!(k > 0.0) || !(k < 1.0))
    throw ModulusOutOfRange("modulus k must lie in (0, 1)");
}

// Jacobi amplitude on [-K, K] by the descending Landen transformation.
double am_core(double x, double k) {
  double an[40], cn[40];
  double a = 1.0, b = std::sqrt((1.0 - k) * (1.0 + k));
  double c = k;
  int N = 0;
  an[0] = a;
  cn[0] = c;
  while (std::fabs(c) > 4e-17 * a && N < 38) {
    const double a1 = 0.5 * (a + b);
    const double b1 = std::sqrt(a * b);
    c = 0.5 * (a - b);
    a = a1;
    b = b1;
    ++N;
    an[N] = a;
    cn[N] = c;
  }
  double phi = std::ldexp(a * x, N);
  for (int n = N; n >= 1; --n) {
    const double s = std::clamp(cn[n] / an[n] * std::sin(phi), -1.0, 1.0);
    phi = 0.5 * (phi + std::asin(s));
  }
  return phi;
}

}  // namespace

double quarter_period_K(double modulus_k) {
  check_modulus(modulus_k);
  double a = 1.0;
  double b = std::sqrt((1.0 - modulus_k) * (1.0 + modulus_k));
  for (int i = 0; i < 64 && std::fabs(a - b) > 1e-17 * a; ++i) {
    const double a1 = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = a1;
  }
  return kPi / (a + b);
}

double jacobi_am(double x, double modulus_k, double quarter_period) {
  check_modulus(modulus_k);
  const double K = quarter_period;
  const double n = std::floor((x + K) / (2.0 * K));
  const double r = x - 2.0 * K * n;
  return am_core(r, modulus_k) + n * kPi;
}

double jacobi_am(double x, double modulus_k) {
  return jacobi_am(x, modulus_k, quarter_period_K(modulus_k));
}

double jacobi_sn(double x, double modulus_k, double quarter_period) {
  return std::sin(jacobi_am(x, modulus_k, quarter_period));
}

double jacobi_sn(double x, double modulus_k) {
  return std::sin(jacobi_am(x, modulus_k));
}

double rect_modulus(const Lattice& lat) {
  if (lat.lattice_class() != LatticeClass::rectangular)
    throw Error("rect_modulus: lattice is not rectangular");
  const double e1 = lat.e(1).real(), e2 = lat.e(2).real(), e3 = lat.e(3).real();
  return std::sqrt((e2 - e3) / (e1 - e3));
}

}  // namespace lamespec
