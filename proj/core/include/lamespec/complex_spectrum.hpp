#pragma once

#include <array>
#include <vector>

#include "lamespec/hill.hpp"
#include "lamespec/lattice.hpp"
#include "lamespec/spectral_arc.hpp"

namespace lamespec {

/// Floquet exponent data of the m = 1 operator on the line z = omega x + z0:
/// f(k) = eta k - omega zeta(k), with u = Re f single-valued on the torus by
/// the Legendre relation, and the spectrum the image of {u = 0} under
/// lambda = -omega^2 p(k).
struct FloquetExponent {
  Lattice lat;
  int omega_index = 2;
  Complex omega{};
  Complex eta{};

  explicit FloquetExponent(const Lattice& l) : lat(l) {}

  Complex f(Complex k) const;
  Complex f_prime(Complex k) const;  // eta + omega p(k)
  std::pair<double, double> u_v(Complex k) const;
  Complex lambda_of(Complex k) const;  // -omega^2 p(k)
  Complex k_of_ab(double a, double b) const;  // k = a omega1 + b omega3
};

FloquetExponent make_floquet(const Lattice& lat, int omega_index);

/// Hermite's solution psi(z,k) = sigma(z+k)/(sigma(z) sigma(k)) exp(-zeta(k) z)
/// of -psi'' + 2 p(z) psi = -p(k) psi.
Complex hermite_psi(Complex z, Complex k_param, const Lattice& lat);

/// (u, v) = (Re f, Im f) at k.
std::pair<double, double> floquet_u_v(Complex k, const FloquetExponent& fe);

enum class Classification { yes, no, borderline };

/// Critical points +-k* of u, given by eta + omega p(k*) = 0, located by grid
/// seeding plus Newton iteration; the sign of k* is fixed by u(k*) >= 0.
struct CriticalPointReport {
  Complex k_star{};
  double c_star = 0;       // u(k*)
  Complex lambda_star{};   // -omega^2 p(k*) = eta omega
  std::array<Classification, 3> nondegenerate{};  // eta + omega e_j != 0
  Classification nonsingular = Classification::yes;  // u(k*) != 0
  bool all_nondegenerate() const;
};

CriticalPointReport find_critical_points(const FloquetExponent& fe);

/// Closed curve of the zero set {u = 0} on the torus, as (a, b) coordinates
/// with k = a omega1 + b omega3 (the fundamental domain is [0,2)^2, traversed
/// with unwrapped coordinates so consecutive points stay close).
struct TorusCurve {
  std::vector<std::array<double, 2>> ab;
  bool closed = false;
  bool through_origin = false;  // closure point k = 0 was inserted
  double cell = 0;              // grid cell size in (a, b) units
};

struct TraceOptions {
  double refine_ab_tol = 1e-10;  // bisection tolerance along grid edges
  int threads = 0;
};

/// Marching-squares extraction of {u = 0} on the torus, excluding a disc of
/// two grid cells around k = 0 where f has its pole; curves cut by the disc
/// are closed through the point k = 0. Throws ResolutionTooCoarse when open
/// chains remain that are not attributable to the excluded disc.
std::vector<TorusCurve> trace_zero_set(const FloquetExponent& fe, int resolution,
                                       const TraceOptions& opts = {});

/// Quotients the traced curves by k -> -k, maps to lambda = -omega^2 p(k),
/// labels endpoints by the half-period they sit on (-omega^2 e_j, or infinity
/// for the curve through k = 0) and appends an analytically continued tail
/// along the local model u ~ Re[-omega/k] near k = 0 on the infinite arc.
std::vector<SpectralArc> arcs_from_zero_set(const std::vector<TorusCurve>& curves,
                                            const FloquetExponent& fe);

/// Convenience: trace + quotient in one call.
std::vector<SpectralArc> hermite_arcs(const FloquetExponent& fe, int resolution,
                                      const TraceOptions& opts = {});

/// Locates all crossings v(k) = p pi/2, |p| <= p_max, along each arc's torus
/// path (excluding the half-period endpoints, which carry p in {0, +-1}) and
/// refines them by a complex Newton solve of f(k) = i p pi/2 on the arc.
/// Throws NonMonotoneV when v fails to be monotone along a nondegenerate arc.
void closed_gaps_on_arcs(std::vector<SpectralArc>& arcs, const FloquetExponent& fe,
                         int p_max = 8);

struct AsymptoteReport {
  Complex shift_estimate{};   // should approach -2 eta omega
  double order_estimate = 0;  // remainder exponent, should approach 2
  int points_used = 0;
};

/// Fits lambda(s) - 1/s^2 = C + D s^2 on the tail of the infinite arc, using
/// the parameterization z = i omega s near k = 0. Requires tail points with
/// |lambda| >= 100 |eta omega| (InsufficientTailPoints otherwise).
AsymptoteReport asymptote_check(const SpectralArc& arc, const FloquetExponent& fe);

/// Tangent direction of the arc at a finite endpoint -omega^2 e_j:
/// (3 e_j^2 - g2/4) (conj(eta) omega + conj(e_j) |omega|^2)^2, normalized.
/// Throws EndpointAtInfinity for the infinite terminus.
Complex endpoint_tangent(const SpectralArc& arc, int endpoint_index,
                         const FloquetExponent& fe);

/// Secant direction through the two polyline points nearest the endpoint
/// (oracle for endpoint_tangent).
Complex arc_secant_direction(const SpectralArc& arc, int endpoint_index);

/// Angle between two directions regarded as unoriented tangent lines, in
/// [0, pi/2].
double line_angle(Complex d1, Complex d2);

struct ExceptionalCurveReport {
  double g2_star = 0;
  double g3_star = 0;  // real form that carries the degeneracy (+-g3)
  double j_star = 0;
  double t_star = 0;  // e1/|Im e2| at the root, the (t, i, -i) pencil parameter
};

/// The unique rhombic curve with eta1 + omega1 e1 = 0, found by bisection of
/// s(g2) = eta1 + omega1 e1 over the rhombic range. A rhombic j-invariant has
/// two real forms (g3 and -g3, related by L -> iL); the degeneracy lives on
/// the form where the real root e1 is negative, so if the requested slice has
/// no sign change the mirrored slice is searched and g3_star records which
/// form carried the root. Throws NoSignChange when neither slice straddles.
ExceptionalCurveReport find_exceptional_curve(double g3 = 1.0,
                                              double g2_lo = -20.0,
                                              double g2_hi = 2.9);

/// Branch points of the m = 2 spectral curve
/// w^2 = (z^2 - 3 g2)(4 z^3 - 9 g2 z - 27 g3), mapped to lambda = omega^2 z.
/// First the two quadratic-factor roots, then the three cubic-factor roots.
std::array<Complex, 5> m2_endpoints(double g2, double g3, Complex omega);

}  // namespace lamespec
