#pragma once

#include <array>
#include <complex>

#include "lamespec/errors.hpp"

namespace lamespec {

using Complex = std::complex<double>;

enum class LatticeClass { rectangular, rhombic, generic, degenerate };

/// Period lattice of a Weierstrass elliptic curve together with everything
/// needed to evaluate p, p', zeta and sigma on it.
///
/// Conventions:
///  - The lattice is L = 2*omega1*Z + 2*omega3*Z with Im(omega3/omega1) > 0,
///    and omega2 = omega1 + omega3.
///  - e_j = p(omega_j) and eta_j = zeta(omega_j); roots are indexed by the
///    half-period they belong to, not sorted numerically.
///  - Legendre relation: eta1*omega3 - eta3*omega1 = i*pi/2.
///  - For real invariants with positive discriminant (rectangular class) the
///    constructor returns omega1 in (0,inf) and omega3 in i*(0,inf); with
///    negative discriminant (rhombic class) omega1 in (0,inf) and
///    Re(omega3) = omega1/2, Im(omega3) > 0.
///
/// Evaluation reduces the period ratio to the standard fundamental domain and
/// sums Jacobi theta q-series (DLMF 23.6), so the nome satisfies
/// |q| <= exp(-pi*sqrt(3)/2) for every lattice shape.
class Lattice {
 public:
  /// Builds the lattice with invariants g2, g3. Throws DegenerateLattice when
  /// g2^3 - 27*g3^2 vanishes (within tol, relative).
  static Lattice from_invariants(Complex g2, Complex g3, double tol = 1e-9);

  /// Builds the lattice generated by 2*omega1, 2*omega3.
  /// Throws InvalidPeriodRatio unless Im(omega3/omega1) > 0.
  static Lattice from_periods(Complex omega1, Complex omega3, double tol = 1e-9);

  Complex g2() const { return g2_; }
  Complex g3() const { return g3_; }
  Complex discriminant() const { return disc_; }
  Complex j_invariant() const;
  LatticeClass lattice_class() const { return class_; }

  /// Half-periods and associated data, j = 1, 2, 3 (omega2 = omega1 + omega3).
  Complex omega(int j) const;
  Complex e(int j) const;
  Complex eta(int j) const;

  /// z reduced modulo L into the centered fundamental cell of the internal
  /// evaluation basis.
  Complex reduce(Complex z) const;
  double distance_to_lattice(Complex z) const;

  /// Absolute distance below which a point counts as sitting on a pole.
  double pole_tolerance() const { return pole_tol_; }
  double tolerance() const { return tol_; }

  // Raw evaluators; the canonical entry points are the free functions in
  // elliptic.hpp.
  Complex wp(Complex z) const;
  Complex wp_prime(Complex z) const;
  Complex zeta(Complex z) const;
  Complex sigma(Complex z) const;

 private:
  Lattice() = default;
  void init_eval_basis(Complex b1, Complex b3);
  void finalize(double tol);  // fills e_, eta_, checks identities
  Complex reduce_ex(Complex z, long& m, long& n) const;
  std::pair<Complex, Complex> invariants_from_theta() const;

  // user-facing basis
  Complex w1_{}, w3_{};
  std::array<Complex, 3> e_{};
  std::array<Complex, 3> eta_{};
  Complex g2_{}, g3_{}, disc_{};
  LatticeClass class_ = LatticeClass::generic;
  double tol_ = 1e-9;
  double pole_tol_ = 0;

  // evaluation basis, tau in the fundamental domain
  Complex W1_{}, W3_{}, tau_{}, q_{};
  Complex eta1r_{}, eta3r_{};  // quasi-periods of the evaluation basis
  static constexpr int kTerms = 12;
  std::array<Complex, kTerms> qh_{};  // q^{(n+1/2)^2}
  std::array<Complex, kTerms> qs_{};  // q^{(n+1)^2}
  Complex th1p0_{};                   // theta1'(0)

  struct Theta1 {
    Complex t, d1, d2, d3;
  };
  Theta1 theta1_all(Complex v) const;
  Complex theta_const(int which) const;  // 2,3,4 -> theta_j(0)
};

}  // namespace lamespec
