#pragma once

#include "lamespec/lattice.hpp"

namespace lamespec {

/// Weierstrass p(z). Throws PoleAtLatticePoint when z is within the lattice
/// pole tolerance of a lattice point.
inline Complex wp(Complex z, const Lattice& lat) { return lat.wp(z); }

/// Weierstrass p'(z).
inline Complex wp_prime(Complex z, const Lattice& lat) { return lat.wp_prime(z); }

/// Weierstrass zeta(z); zeta' = -p, zeta(z + 2*omega_j) = zeta(z) + 2*eta_j.
inline Complex zeta(Complex z, const Lattice& lat) { return lat.zeta(z); }

/// Weierstrass sigma(z) (entire); sigma'/sigma = zeta.
inline Complex sigma(Complex z, const Lattice& lat) { return lat.sigma(z); }

/// Complete elliptic integral K(k) = int_0^{pi/2} dphi / sqrt(1 - k^2 sin^2 phi),
/// computed by the arithmetic-geometric mean. Requires 0 < k < 1.
double quarter_period_K(double modulus_k);

/// Jacobi sn(x, k) for real x, by the descending Landen (AGM) recursion.
/// Kept independent of the Weierstrass/theta code so the Jacobian and
/// Weierstrass forms of the operator can cross-check each other.
double jacobi_sn(double x, double modulus_k);

/// Jacobi amplitude am(x, k) on x in [-K, K] extended by quasi-periodicity.
double jacobi_am(double x, double modulus_k);

/// Overloads taking a precomputed K(k), for hot loops.
double jacobi_am(double x, double modulus_k, double quarter_period);
double jacobi_sn(double x, double modulus_k, double quarter_period);

/// Modulus k with k^2 = (e2 - e3)/(e1 - e3) of a rectangular lattice.
double rect_modulus(const Lattice& lat);

}  // namespace lamespec
