#include "lamespec/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace lamespec {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Roots of 4x^3 - g2 x - g3 (Cardano with a Newton polish).
std::array<Complex, 3> cubic_roots(Complex g2, Complex g3) {
  const Complex p = -g2 / 4.0, q = -g3 / 4.0;  // x^3 + p x + q
  std::array<Complex, 3> r{};
  if (std::abs(p) == 0.0 && std::abs(q) == 0.0) return r;
  const Complex D = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
  Complex w = -q / 2.0 + D;
  if (std::abs(-q / 2.0 - D) > std::abs(w)) w = -q / 2.0 - D;
  const Complex u = std::pow(w, 1.0 / 3.0);
  const Complex v = std::abs(u) > 0 ? -p / (3.0 * u) : Complex(0.0);
  const Complex rot(-0.5, 0.5 * std::sqrt(3.0));
  r = {u + v, u * rot + v * std::conj(rot), u * std::conj(rot) + v * rot};
  for (auto& x : r) {
    for (int it = 0; it < 4; ++it) {
      const Complex f = ((4.0 * x) * x - g2) * x - g3;
      const Complex fp = 12.0 * x * x - g2;
      if (std::abs(fp) == 0.0) break;
      x -= f / fp;
    }
  }
  return r;
}

// AGM with the standard "right choice" of square-root branch, valid for
// complex arguments off the negative-ratio cut.
Complex agm(Complex a, Complex b) {
  for (int i = 0; i < 64; ++i) {
    const Complex a1 = 0.5 * (a + b);
    Complex b1 = std::sqrt(a * b);
    if (std::abs(a1 - b1) > std::abs(a1 + b1)) b1 = -b1;
    a = a1;
    b = b1;
    if (std::abs(a - b) <= 1e-17 * std::abs(a)) break;
  }
  return 0.5 * (a + b);
}

double real_agm(double a, double b) {
  for (int i = 0; i < 64 && std::fabs(a - b) > 1e-17 * a; ++i) {
    const double a1 = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = a1;
  }
  return 0.5 * (a + b);
}

}  // namespace

void Lattice::init_eval_basis(Complex b1, Complex b3) {
  Complex tau = b3 / b1;
  if (!(tau.imag() > 0)) throw InvalidPeriodRatio("Im(omega3/omega1) must be positive");
  for (int i = 0; i < 128; ++i) {
    const double n = std::round(tau.real());
    if (n != 0) {
      b3 -= n * b1;
      tau = b3 / b1;
    }
    if (std::abs(tau) < 1.0 - 1e-15) {
      const Complex t = b1;
      b1 = b3;
      b3 = -t;
      tau = b3 / b1;
    } else {
      break;
    }
  }
  W1_ = b1;
  W3_ = b3;
  tau_ = tau;
  const Complex ipitau = Complex(0, kPi) * tau;
  q_ = std::exp(ipitau);
  for (int n = 0; n < kTerms; ++n) {
    const double h = n + 0.5;
    qh_[n] = std::exp(ipitau * (h * h));
    const double s = n + 1.0;
    qs_[n] = std::exp(ipitau * (s * s));
  }
  const Theta1 t0 = theta1_all(Complex(0.0));
  th1p0_ = t0.d1;
  eta1r_ = -(kPi * kPi) / (12.0 * W1_) * (t0.d3 / t0.d1);
  eta3r_ = (eta1r_ * W3_ - Complex(0, kPi / 2.0)) / W1_;
}

Lattice::Theta1 Lattice::theta1_all(Complex v) const {
  Theta1 r{0.0, 0.0, 0.0, 0.0};
  const double imv = std::fabs(v.imag());
  const double base = std::abs(qh_[0]) * std::exp(imv);
  for (int n = 0; n < kTerms; ++n) {
    const double j = 2.0 * n + 1.0;
    const double mag = std::abs(qh_[n]) * std::exp(j * imv);
    if (n > 0 && mag * j * j * j < 1e-18 * base) break;
    const Complex s = std::sin(j * v);
    const Complex c = std::cos(j * v);
    const Complex w = (n & 1) ? -qh_[n] : qh_[n];
    r.t += w * s;
    r.d1 += (w * j) * c;
    r.d2 -= (w * j * j) * s;
    r.d3 -= (w * j * j * j) * c;
  }
  r.t *= 2.0;
  r.d1 *= 2.0;
  r.d2 *= 2.0;
  r.d3 *= 2.0;
  return r;
}

Complex Lattice::theta_const(int which) const {
  Complex s = 0.0;
  switch (which) {
    case 2:
      for (int n = 0; n < kTerms; ++n) s += qh_[n];
      return 2.0 * s;
    case 3:
      for (int n = 0; n < kTerms; ++n) s += qs_[n];
      return 1.0 + 2.0 * s;
    case 4:
      for (int n = 0; n < kTerms; ++n) s += ((n & 1) ? qs_[n] : -qs_[n]);
      return 1.0 + 2.0 * s;
    default:
      throw Error("theta_const: bad index");
  }
}

std::pair<Complex, Complex> Lattice::invariants_from_theta() const {
  const Complex t2 = theta_const(2), t3 = theta_const(3), t4 = theta_const(4);
  auto p4 = [](Complex t) {
    const Complex t2_ = t * t;
    return t2_ * t2_;
  };
  const Complex A = (kPi / (2.0 * W1_)) * (kPi / (2.0 * W1_));
  const Complex E1 = A * (p4(t3) + p4(t4)) / 3.0;
  const Complex E2 = A * (p4(t2) - p4(t4)) / 3.0;
  const Complex E3 = -A * (p4(t2) + p4(t3)) / 3.0;
  const Complex G2 = -4.0 * (E1 * E2 + E1 * E3 + E2 * E3);
  const Complex G3 = 4.0 * E1 * E2 * E3;
  return {G2, G3};
}

Complex Lattice::reduce_ex(Complex z, long& m, long& n) const {
  const Complex u = z / (2.0 * W1_);
  const double beta = u.imag() / tau_.imag();
  const double alpha = u.real() - beta * tau_.real();
  m = std::lround(alpha);
  n = std::lround(beta);
  return z - 2.0 * (static_cast<double>(m) * W1_ + static_cast<double>(n) * W3_);
}

Complex Lattice::reduce(Complex z) const {
  long m, n;
  return reduce_ex(z, m, n);
}

double Lattice::distance_to_lattice(Complex z) const {
  const Complex z0 = reduce(z);
  double d = std::abs(z0);
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      if (a == 0 && b == 0) continue;
      d = std::min(d, std::abs(z0 - 2.0 * (static_cast<double>(a) * W1_ +
                                            static_cast<double>(b) * W3_)));
    }
  return d;
}

Complex Lattice::wp(Complex z) const {
  if (distance_to_lattice(z) < pole_tol_)
    throw PoleAtLatticePoint("wp: argument coincides with a lattice point");
  const Complex z0 = reduce(z);
  const Complex v = kPi * z0 / (2.0 * W1_);
  const Theta1 th = theta1_all(v);
  const Complex pref = kPi / (2.0 * W1_);
  return -eta1r_ / W1_ - pref * pref * (th.d2 * th.t - th.d1 * th.d1) / (th.t * th.t);
}

Complex Lattice::wp_prime(Complex z) const {
  if (distance_to_lattice(z) < pole_tol_)
    throw PoleAtLatticePoint("wp_prime: argument coincides with a lattice point");
  const Complex z0 = reduce(z);
  const Complex v = kPi * z0 / (2.0 * W1_);
  const Theta1 th = theta1_all(v);
  const Complex pref = kPi / (2.0 * W1_);
  const Complex t2 = th.t * th.t;
  const Complex num = th.d3 * t2 - 3.0 * th.d2 * th.d1 * th.t + 2.0 * th.d1 * th.d1 * th.d1;
  return -pref * pref * pref * num / (t2 * th.t);
}

Complex Lattice::zeta(Complex z) const {
  if (distance_to_lattice(z) < pole_tol_)
    throw PoleAtLatticePoint("zeta: argument coincides with a lattice point");
  long m, n;
  const Complex z0 = reduce_ex(z, m, n);
  const Complex v = kPi * z0 / (2.0 * W1_);
  const Theta1 th = theta1_all(v);
  return eta1r_ * z0 / W1_ + (kPi / (2.0 * W1_)) * th.d1 / th.t +
         2.0 * (static_cast<double>(m) * eta1r_ + static_cast<double>(n) * eta3r_);
}

Complex Lattice::sigma(Complex z) const {
  long m, n;
  const Complex z0 = reduce_ex(z, m, n);
  const Complex v = kPi * z0 / (2.0 * W1_);
  const Theta1 th = theta1_all(v);
  const Complex s0 =
      (2.0 * W1_ / kPi) * std::exp(eta1r_ * z0 * z0 / (2.0 * W1_)) * th.t / th1p0_;
  if (m == 0 && n == 0) return s0;
  const double sgn = ((m + n + m * n) % 2 == 0) ? 1.0 : -1.0;
  const Complex etaL = 2.0 * (static_cast<double>(m) * eta1r_ + static_cast<double>(n) * eta3r_);
  const Complex half = static_cast<double>(m) * W1_ + static_cast<double>(n) * W3_;
  return sgn * s0 * std::exp(etaL * (z0 + half));
}

Complex Lattice::omega(int j) const {
  switch (j) {
    case 1:
      return w1_;
    case 2:
      return w1_ + w3_;
    case 3:
      return w3_;
    default:
      throw Error("omega: index must be 1, 2 or 3");
  }
}

Complex Lattice::e(int j) const {
  if (j < 1 || j > 3) throw Error("e: index must be 1, 2 or 3");
  return e_[j - 1];
}

Complex Lattice::eta(int j) const {
  if (j < 1 || j > 3) throw Error("eta: index must be 1, 2 or 3");
  return eta_[j - 1];
}

Complex Lattice::j_invariant() const { return 1728.0 * g2_ * g2_ * g2_ / disc_; }

void Lattice::finalize(double tol) {
  tol_ = tol;
  pole_tol_ = 1e-12 * std::max(std::abs(2.0 * W1_), std::abs(2.0 * W3_));
  for (int j = 1; j <= 3; ++j) {
    e_[j - 1] = wp(omega(j));
    eta_[j - 1] = zeta(omega(j));
  }
  const double esc =
      std::max({std::abs(e_[0]), std::abs(e_[1]), std::abs(e_[2]), 1e-30});
  if (std::abs(e_[0] + e_[1] + e_[2]) > 1e-6 * esc)
    throw Error("lattice: computed roots do not sum to zero");
  for (const Complex& ej : e_) {
    const Complex res = ((4.0 * ej) * ej - g2_) * ej - g3_;
    const double scale = 4.0 * esc * esc * esc + std::abs(g2_) * esc + std::abs(g3_) + 1e-30;
    if (std::abs(res) > 1e-6 * scale) throw Error("lattice: e_j is not a root of the cubic");
  }
  const Complex leg = eta_[0] * w3_ - eta_[2] * w1_ - Complex(0, kPi / 2.0);
  if (std::abs(leg) > 1e-8 * std::max(1.0, std::abs(eta_[0] * w3_)))
    throw Error("lattice: Legendre relation violated");
}

Lattice Lattice::from_invariants(Complex g2, Complex g3, double tol) {
  Lattice L;
  L.g2_ = g2;
  L.g3_ = g3;
  L.disc_ = g2 * g2 * g2 - 27.0 * g3 * g3;
  const double dscale = std::max(
      {std::pow(std::abs(g2), 3.0), 27.0 * std::pow(std::abs(g3), 2.0), 1e-12});
  if (std::abs(L.disc_) <= tol * dscale)
    throw DegenerateLattice("from_invariants: discriminant vanishes");

  const auto roots = cubic_roots(g2, g3);
  const bool realinv = std::fabs(g2.imag()) <= tol * std::max(1.0, std::abs(g2)) &&
                       std::fabs(g3.imag()) <= tol * std::max(1.0, std::abs(g3));

  if (realinv && L.disc_.real() > 0) {
    // Rectangular: three real roots e1 > e2 > e3.
    std::array<double, 3> er = {roots[0].real(), roots[1].real(), roots[2].real()};
    std::sort(er.begin(), er.end(), std::greater<double>());
    const double s13 = std::sqrt(er[0] - er[2]);
    const double s12 = std::sqrt(er[0] - er[1]);
    const double s23 = std::sqrt(er[1] - er[2]);
    L.w1_ = Complex(kPi / (2.0 * real_agm(s13, s12)), 0.0);
    L.w3_ = Complex(0.0, kPi / (2.0 * real_agm(s13, s23)));
    L.class_ = LatticeClass::rectangular;
    L.init_eval_basis(L.w1_, L.w3_);
  } else if (realinv) {
    // Rhombic: one real root a, complex pair -a/2 +- i c.
    int ia = 0;
    for (int i = 1; i < 3; ++i)
      if (std::fabs(roots[i].imag()) < std::fabs(roots[ia].imag())) ia = i;
    const double a = roots[ia].real();
    const double H = std::sqrt(3.0 * a * a - g2.real() / 4.0);
    const double k2 = 0.5 - 3.0 * a / (4.0 * H);
    const double k = std::sqrt(k2);
    const double kp = std::sqrt(1.0 - k2);
    const double sH = std::sqrt(H);
    const double Kk = kPi / (2.0 * real_agm(1.0, kp));
    const double Kp = kPi / (2.0 * real_agm(1.0, k));
    L.w1_ = Complex(Kk / sH, 0.0);
    L.w3_ = Complex(0.5 * Kk / sH, 0.5 * Kp / sH);
    L.class_ = LatticeClass::rhombic;
    L.init_eval_basis(L.w1_, L.w3_);
  } else {
    // Generic complex invariants: periods by the complex AGM, with the root
    // ordering fixed by checking the recomputed invariants.
    L.class_ = LatticeClass::generic;
    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                        {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    bool found = false;
    for (const auto& pm : perms) {
      const Complex r1 = roots[pm[0]], r2 = roots[pm[1]], r3 = roots[pm[2]];
      const Complex s13 = std::sqrt(r1 - r3);
      const Complex s12 = std::sqrt(r1 - r2);
      const Complex s23 = std::sqrt(r2 - r3);
      const Complex m1 = agm(s13, s12), m3 = agm(s13, s23);
      if (std::abs(m1) == 0.0 || std::abs(m3) == 0.0) continue;
      Complex w1 = kPi / (2.0 * m1);
      Complex w3 = Complex(0, kPi) / (2.0 * m3);
      Complex ratio = w3 / w1;
      if (std::fabs(ratio.imag()) < 1e-12) continue;
      if (ratio.imag() < 0) w3 = -w3;
      try {
        L.w1_ = w1;
        L.w3_ = w3;
        L.init_eval_basis(w1, w3);
      } catch (const Error&) {
        continue;
      }
      const auto [G2, G3] = L.invariants_from_theta();
      if (std::abs(G2 - g2) <= 1e-8 * std::max(1.0, std::abs(g2)) &&
          std::abs(G3 - g3) <= 1e-8 * std::max(1.0, std::abs(g3))) {
        found = true;
        break;
      }
    }
    if (!found) throw Error("from_invariants: period computation failed to verify");
  }

  L.finalize(tol);
  return L;
}

Lattice Lattice::from_periods(Complex omega1, Complex omega3, double tol) {
  Lattice L;
  const Complex ratio = omega3 / omega1;
  if (!(ratio.imag() > 0))
    throw InvalidPeriodRatio("from_periods: Im(omega3/omega1) must be positive");
  L.w1_ = omega1;
  L.w3_ = omega3;
  L.init_eval_basis(omega1, omega3);
  auto [G2, G3] = L.invariants_from_theta();
  const bool realinv = std::fabs(G2.imag()) <= tol * std::max(1.0, std::abs(G2)) &&
                       std::fabs(G3.imag()) <= tol * std::max(1.0, std::abs(G3));
  L.g2_ = G2;
  L.g3_ = G3;
  L.disc_ = G2 * G2 * G2 - 27.0 * G3 * G3;
  if (realinv)
    L.class_ = L.disc_.real() > 0 ? LatticeClass::rectangular : LatticeClass::rhombic;
  else
    L.class_ = LatticeClass::generic;
  L.finalize(tol);
  return L;
}

}  // namespace lamespec
