#pragma once

#include <array>
#include <complex>
#include <vector>

#include "lamespec/band_structure.hpp"

namespace lamespec {

using Complex = std::complex<double>;

/// Labeled terminus of a spectral arc.
///   e_index = 1..3  : endpoint lambda = -omega^2 e_j (Hermite arcs)
///   e_index = 0     : arc escapes to infinity
///   e_index = -1    : unlabeled (e.g. terminus of a monodromy-scan arc)
struct ArcEndpoint {
  Complex lambda{};
  int e_index = -1;
};

/// Point on an arc where the Floquet solution is (anti)periodic, v(k) = p*pi/2.
struct ClosedGapPoint {
  Complex lambda{};
  Complex k{};
  int p = 0;
};

/// Polyline of spectral points lambda in C, with the torus path that produced
/// it when traced through Hermite's solutions (k = a*omega1 + b*omega3).
struct SpectralArc {
  std::vector<Complex> lambda;
  std::vector<std::array<double, 2>> k_ab;
  bool infinite = false;
  std::array<ArcEndpoint, 2> endpoints{};
  std::vector<ClosedGapPoint> closed_gaps;
  Provenance provenance = Provenance::hermite;
};

}  // namespace lamespec
