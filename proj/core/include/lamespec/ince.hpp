#pragma once

#include <vector>

#include "lamespec/band_structure.hpp"
#include "lamespec/errors.hpp"

namespace lamespec {

/// Coefficient polynomials of the Fourier recurrences for the Lame equation
/// in Jacobian form, written as an equation of Ince's type by phi = am x.
double ince_P(double z, int m, double k);
double ince_Lambda(int n, double lambda, int m, double k);
double ince_P_star(double z, int m, double k);
double ince_Lambda_star(int n, double lambda, int m, double k);

/// Ince parameters (1 + a cos 2phi) y'' + b sin 2phi y' + (c + d cos 2phi) y = 0
/// for the Lame potential m(m+1) k^2 sn^2; c depends on the eigenvalue.
struct InceParams {
  int m = 1;
  double modulus_k = 0.5;
  double a() const;  // = -b
  double b() const;
  double d() const;
  double c(double lambda) const;
};

/// One finite tridiagonal block K(lambda) = lambda*I - T, where T carries the
/// lambda-free part. `sub`/`sup` are K's off-diagonals (the P values);
/// `diag` holds the constants c_n with K_nn = lambda - c_n.
struct TridiagPencil {
  std::vector<double> diag;
  std::vector<double> sub;
  std::vector<double> sup;
  int size() const { return static_cast<int>(diag.size()); }
  /// Roots of det K(lambda) = eigenvalues of T (all real and distinct here).
  std::vector<double> eigenvalues() const;
  /// det K(lambda) by the three-term recurrence, normalized by the running
  /// maximum so the result is a relative residual.
  double det_at(double lambda) const;
};

/// The four finite blocks cut from the infinite Fourier recurrences, and
/// their eigenvalue sets. For even m the periodic pair terminates (P(m/2)=0)
/// and the antiperiodic pair decouples (P*(-m/2)=0); for odd m the roles are
/// interchanged (P*((m+1)/2)=0 terminates, P(-(m+1)/2)=0 decouples).
struct InceMatrices {
  int m = 1;
  int nu = 0;  // floor(m/2)
  double modulus_k = 0.5;
  TridiagPencil per_cos;   // K_{nu,1}:  cos 2n phi series
  TridiagPencil per_sin;   // K_{nu,2}:  sin 2n phi series
  TridiagPencil anti_cos;  // K*_{nu,1}: cos (2n+1) phi series
  TridiagPencil anti_sin;  // K*_{nu,2}: sin (2n+1) phi series
  std::vector<double> S1, S2;    // eigenvalue sets of the periodic blocks
  std::vector<double> S1s, S2s;  // eigenvalue sets of the antiperiodic blocks
};

/// Eigenvalues of a nonsymmetric tridiagonal matrix with sign-symmetric
/// off-diagonals (lower[i]*upper[i] > 0), via the diagonal similarity to a
/// symmetric tridiagonal matrix. Returns the sorted spectrum.
/// Throws NotSymmetrizable when some product lower[i]*upper[i] <= 0.
std::vector<double> eigenvalues_tridiagonal(const std::vector<double>& diag,
                                            const std::vector<double>& lower,
                                            const std::vector<double>& upper);

InceMatrices build_even_m(int m, double k);
InceMatrices build_odd_m(int m, double k);
InceMatrices build_ince(int m, double k);  // dispatches on parity

/// Exact band edges: lambda0 and the m open gaps, assembled from the four
/// eigenvalue sets by the oscillation-theorem interleaving. All gaps beyond
/// the m-th are closed and are not listed.
BandStructure gap_edges(int m, double k);

}  // namespace lamespec
