#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "lamespec/band_structure.hpp"
#include "lamespec/elliptic.hpp"
#include "lamespec/lattice.hpp"
#include "lamespec/spectral_arc.hpp"

namespace lamespec {

enum class PotentialForm { weierstrass, jacobian };

/// Periodic Lame potential, either V(x) = m(m+1) omega^2 p(omega x + z0)
/// with period 2 or V(x) = m(m+1) k^2 sn^2(x, k) with period 2K.
struct PotentialSpec {
  PotentialForm form = PotentialForm::jacobian;
  std::optional<Lattice> lat;
  int m = 1;
  int omega_index = 2;
  Complex z0{};
  double modulus_k = 0.5;

  /// Weierstrass form; z0 defaults to a half-period transverse to omega, which
  /// keeps the line omega*x + z0 off the lattice for every x.
  /// Throws SingularPotential when the line passes within tolerance of a pole.
  static PotentialSpec weierstrass_form(const Lattice& lat, int m, int omega_index,
                                        std::optional<Complex> z0 = std::nullopt);
  static PotentialSpec jacobian_form(int m, double modulus_k);

  Complex omega() const;
  double period() const;
  Complex potential(double x) const;
  /// Smallest distance from the sampled integration line to a lattice point
  /// (diagnostic; infinity for the Jacobian form and for m = 0).
  double min_pole_distance() const { return min_pole_dist_; }
  bool is_real(double tol = 1e-8) const;

 private:
  double quarter_K_ = 0;
  double min_pole_dist_ = 0;
};

/// One-period transfer matrix data at spectral parameter lambda.
struct MonodromyResult {
  std::array<Complex, 4> transfer{};  // row-major [M00 M01; M10 M11]
  Complex discriminant{};             // tr M
  std::pair<Complex, Complex> multipliers{};  // roots of rho^2 - Delta rho + 1
  bool in_spectrum = false;
  Complex det() const {
    return transfer[0] * transfer[3] - transfer[1] * transfer[2];
  }
  /// min(| |rho+| - 1 |, | |rho-| - 1 |)
  double unit_circle_distance() const;
};

/// Integrates -psi'' + V psi = lambda psi across one period from the basis
/// (1,0), (0,1). Guarantees |det M - 1| < 10*tol.
MonodromyResult monodromy(const PotentialSpec& pot, Complex lambda, double tol = 1e-10);

/// Same, plus d(Delta)/d(lambda) from the variational equations.
std::pair<MonodromyResult, Complex> monodromy_with_derivative(
    const PotentialSpec& pot, Complex lambda, double tol = 1e-10);

struct EdgeOptions {
  double open_tol = 1e-3;
  double closed_tol = 1e-6;
  double tol = 1e-10;       // integrator tolerance
  int coarse_samples = 480;
};

/// Band edges of the self-adjoint case on [lambda_lo, lambda_hi]: periodic
/// edges from Delta = 2, antiperiodic from Delta = -2, interlaced per the
/// oscillation theorem; candidate gaps are classified open or closed (double
/// root of Delta -+ 2). Throws NotSelfAdjoint for complex potentials and
/// WindowTooSmall when the window exhausts before n_gaps gaps are found.
BandStructure real_band_edges(const PotentialSpec& pot, double lambda_lo,
                              double lambda_hi, int n_gaps,
                              const EdgeOptions& opts = {});

struct GapVerification {
  std::vector<double> open_widths;       // widths of the first m candidates
  std::vector<double> closed_residuals;  // |Delta -+ 2| at the next n_check extrema
  bool verdict = false;
  BandStructure bands;
};

/// Checks that precisely the first m candidate gaps are open and the next
/// n_check are closed.
GapVerification verify_first_m_gaps(const PotentialSpec& pot, int n_check,
                                    const EdgeOptions& opts = {});

struct ComplexWindow {
  double re_lo = -1, re_hi = 1, im_lo = -1, im_hi = 1;
};

struct ScanOptions {
  double tol = 1e-8;     // integrator tolerance
  int refine_iters = 6;  // bisections per marching-squares crossing
  int threads = 0;       // 0 = hardware concurrency
};

/// Spectrum of the (generally non-self-adjoint) operator inside a complex
/// window: the zero set of log|rho| extracted by marching squares (via the
/// equivalent condition Delta in [-2,2] on the real axis of the Delta plane)
/// and chained into arcs. Termini where Delta = +-2 are Newton-polished.
/// An empty window is not an error: returns an empty list.
std::vector<SpectralArc> spectrum_scan(const PotentialSpec& pot,
                                       const ComplexWindow& window, int resolution,
                                       const ScanOptions& opts = {});

/// Multiplier branch with |rho| <= 1 for a given discriminant.
Complex multiplier_in_disk(Complex discriminant);

/// Affine map between the Jacobian and Weierstrass spectral parameters on a
/// rectangular lattice: lambda_jac = (lambda_w/omega1^2 - m(m+1) e3)/(e1 - e3).
double jacobian_lambda_from_weierstrass(double lambda_w, const Lattice& lat, int m);

}  // namespace lamespec
