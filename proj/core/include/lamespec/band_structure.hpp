#pragma once

#include <vector>

namespace lamespec {

/// Which computational route produced a spectral datum.
enum class Provenance { hermite, monodromy, ince };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::hermite:
      return "hermite";
    case Provenance::monodromy:
      return "monodromy";
    default:
      return "ince";
  }
}

/// One candidate spectral gap of a self-adjoint Hill operator.
struct Gap {
  double lower = 0;
  double upper = 0;
  bool open = false;
  bool antiperiodic = false;          // edges at Delta = -2 rather than +2
  double delta_prime_at_merge = 0;    // |Delta'| at the coexistence point (closed gaps)
  double residual = 0;                // |Delta -+ 2| at the extremum
  double width() const { return upper - lower; }
};

/// Real band structure: lambda0 plus candidate gaps ordered by position.
/// Gaps beyond the ones listed are closed (finite-gap operator).
struct BandStructure {
  double lambda0 = 0;
  std::vector<Gap> gaps;
  Provenance source = Provenance::monodromy;
};

}  // namespace lamespec
