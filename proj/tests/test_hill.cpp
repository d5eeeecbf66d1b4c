#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lamespec/elliptic.hpp"
#include "lamespec/hill.hpp"
#include "lamespec/ince.hpp"

using namespace lamespec;

namespace {
std::mt19937 rng(424242);
double uni(double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}
}  // namespace

TEST_CASE("free operator: Delta = 2 cos(sqrt(lambda) T)") {
  auto pot = PotentialSpec::jacobian_form(0, 0.5);
  const double T = pot.period();
  for (const Complex lam : {Complex(0.7), Complex(2.3), Complex(1.1, 0.8),
                            Complex(-0.5, -1.2)}) {
    const auto R = monodromy(pot, lam, 1e-11);
    const Complex want = 2.0 * std::cos(std::sqrt(lam) * T);
    CHECK(std::abs(R.discriminant - want) < 1e-9 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("Wronskian and multiplier product") {
  auto potj = PotentialSpec::jacobian_form(2, 0.6);
  const Lattice L = Lattice::from_invariants(8.0, 1.0);
  auto potw = PotentialSpec::weierstrass_form(L, 1, 2);
  for (int i = 0; i < 10; ++i) {
    const Complex lam(uni(-2, 8), uni(-3, 3));
    for (const auto& pot : {potj, potw}) {
      const auto R = monodromy(pot, lam, 1e-10);
      CHECK(std::abs(R.det() - 1.0) < 1e-8);
      CHECK(std::abs(R.multipliers.first * R.multipliers.second - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("variational derivative of the discriminant") {
  auto pot = PotentialSpec::jacobian_form(2, 0.5);
  for (const Complex lam : {Complex(0.9), Complex(3.7, 0.4)}) {
    const auto [R, dD] = monodromy_with_derivative(pot, lam, 1e-11);
    const double h = 1e-5;
    const Complex fd = (monodromy(pot, lam + h, 1e-12).discriminant -
                        monodromy(pot, lam - h, 1e-12).discriminant) /
                       (2.0 * h);
    CHECK(std::abs(dD - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
    CHECK(std::abs(R.discriminant - monodromy(pot, lam, 1e-11).discriminant) < 1e-9);
  }
}

TEST_CASE("z0 independence of the discriminant") {
  const Lattice L = Lattice::from_invariants(8.0, 1.0);
  auto base = PotentialSpec::weierstrass_form(L, 1, 2);
  for (int rep = 0; rep < 5; ++rep) {
    const Complex z0 = L.omega(3) + uni(-0.3, 0.3) * L.omega(1) +
                       uni(-0.2, 0.2) * L.omega(3);
    auto shifted = PotentialSpec::weierstrass_form(L, 1, 2, z0);
    for (int i = 0; i < 2; ++i) {
      const Complex lam(uni(-2, 6), uni(-2, 2));
      CHECK(std::abs(monodromy(base, lam, 1e-10).discriminant -
                     monodromy(shifted, lam, 1e-10).discriminant) < 1e-6);
    }
  }
}

TEST_CASE("real rectangular case: z0 shift along the period") {
  const Lattice L = Lattice::from_invariants(8.0, 1.0);
  auto p1 = PotentialSpec::weierstrass_form(L, 1, 1);  // z0 = omega3: real potential
  CHECK(p1.is_real());
  auto p2 = PotentialSpec::weierstrass_form(L, 1, 1, L.omega(3) + 0.3 * L.omega(1));
  for (const double lam : {-1.0, 2.0, 5.0})
    CHECK(std::abs(monodromy(p1, Complex(lam), 1e-10).discriminant -
                   monodromy(p2, Complex(lam), 1e-10).discriminant) < 1e-6);
}

TEST_CASE("self-adjoint reality of Delta") {
  auto pot = PotentialSpec::jacobian_form(2, 0.5);
  for (double lam : {-0.3, 1.7, 6.1})
    CHECK(std::fabs(monodromy(pot, Complex(lam), 1e-10).discriminant.imag()) < 1e-8);
}

TEST_CASE("Cauchy-Riemann residual of the discriminant grid") {
  auto pot = PotentialSpec::jacobian_form(1, 0.6);
  const double h = 0.05;
  for (const Complex c : {Complex(1.3, 0.4), Complex(2.2, -0.6)}) {
    auto D = [&](double dx, double dy) {
      return monodromy(pot, c + Complex(dx * h, dy * h), 1e-11).discriminant;
    };
    const Complex dRe = (D(1, 0) - D(-1, 0)) / (2 * h);
    const Complex dIm = (D(0, 1) - D(0, -1)) / (2 * h);
    // analytic <=> d/dIm = i d/dRe
    CHECK(std::abs(dIm - Complex(0, 1) * dRe) < 1e-4 * std::max(1.0, std::abs(dRe)));
  }
}

TEST_CASE("real_band_edges: m=2 k=0.5 paper edges") {
  auto pot = PotentialSpec::jacobian_form(2, 0.5);
  const auto bs = real_band_edges(pot, -0.5, 18.0, 4);
  const double k2 = 0.25, s = std::sqrt(1 - k2 + k2 * k2);
  CHECK(std::fabs(bs.lambda0 - 2 * (1 + k2 - s)) < 1e-6);
  CHECK(std::fabs(bs.gaps[0].lower - 1.25) < 1e-6);
  CHECK(std::fabs(bs.gaps[0].upper - 2.0) < 1e-6);
  CHECK(std::fabs(bs.gaps[1].lower - 4.25) < 1e-6);
  CHECK(std::fabs(bs.gaps[1].upper - 2 * (1 + k2 + s)) < 1e-6);
  CHECK(bs.gaps[0].open);
  CHECK(bs.gaps[1].open);
  CHECK_FALSE(bs.gaps[2].open);
  CHECK_FALSE(bs.gaps[3].open);
  CHECK(bs.gaps[2].delta_prime_at_merge < 1e-4);
  CHECK(bs.gaps[3].delta_prime_at_merge < 1e-4);
}

TEST_CASE("verify_first_m_gaps") {
  {
    auto pot = PotentialSpec::jacobian_form(2, 0.5);
    const auto v = verify_first_m_gaps(pot, 3);
    CHECK(v.verdict);
    CHECK(v.open_widths.size() == 2);
    CHECK(v.closed_residuals.size() == 3);
    for (double w : v.open_widths) CHECK(w > 1e-3);
  }
  {
    auto pot = PotentialSpec::jacobian_form(1, 0.9);
    const auto v = verify_first_m_gaps(pot, 4);
    CHECK(v.verdict);
    CHECK(v.open_widths.size() == 1);
  }
}

TEST_CASE("errors: NotSelfAdjoint and WindowTooSmall") {
  const Lattice R = Lattice::from_invariants(2.0, 1.0);  // rhombic
  auto pot = PotentialSpec::weierstrass_form(R, 1, 1);
  CHECK_FALSE(pot.is_real());
  CHECK_THROWS_AS(real_band_edges(pot, -1.0, 5.0, 1), NotSelfAdjoint);
  auto potj = PotentialSpec::jacobian_form(2, 0.5);
  CHECK_THROWS_AS(real_band_edges(potj, -0.5, 2.5, 4), WindowTooSmall);
  CHECK_THROWS_AS(real_band_edges(potj, 3.0, 5.0, 1), WindowTooSmall);
}

TEST_CASE("potential construction guards") {
  CHECK_THROWS_AS(PotentialSpec::jacobian_form(1, 0.0), ModulusOutOfRange);
  CHECK_THROWS_AS(PotentialSpec::jacobian_form(1, 1.0), ModulusOutOfRange);
  const Lattice L = Lattice::from_invariants(8.0, 1.0);
  // z0 on the lattice puts the integration line through poles
  CHECK_THROWS_AS(PotentialSpec::weierstrass_form(L, 1, 1, Complex(0.0)),
                  SingularPotential);
  auto ok = PotentialSpec::weierstrass_form(L, 1, 2);
  CHECK(ok.min_pole_distance() > 0.1 * std::abs(L.omega(3)));
}

TEST_CASE("spectrum_scan on the real axis reproduces the bands") {
  auto pot = PotentialSpec::jacobian_form(1, 0.6);
  const auto bands = real_band_edges(pot, -0.5, 5.0, 1);
  ComplexWindow win{-0.4, 4.0, -0.21, 0.24};
  const auto arcs = spectrum_scan(pot, win, 48, {});
  REQUIRE(!arcs.empty());
  const double cell = std::hypot((win.re_hi - win.re_lo) / 48.0,
                                 (win.im_hi - win.im_lo) / 48.0);
  // every arc point is (nearly) real and inside the band set
  for (const auto& a : arcs)
    for (const auto& l : a.lambda) {
      CHECK(std::fabs(l.imag()) < 0.5 * cell);
      const bool in_band1 =
          l.real() > bands.lambda0 - cell && l.real() < bands.gaps[0].lower + cell;
      const bool in_band2 = l.real() > bands.gaps[0].upper - cell;
      CHECK((in_band1 || in_band2));
    }
  // the band edges inside the window appear among arc termini
  for (const double edge :
       {bands.lambda0, bands.gaps[0].lower, bands.gaps[0].upper}) {
    double dmin = 1e30;
    for (const auto& a : arcs) {
      dmin = std::min(dmin, std::abs(a.lambda.front() - Complex(edge)));
      dmin = std::min(dmin, std::abs(a.lambda.back() - Complex(edge)));
    }
    CHECK(dmin < 2 * cell);
  }
}

TEST_CASE("spectrum_scan: rhombic conjugation symmetry") {
  const Lattice L = Lattice::from_invariants(2.0, 1.0);
  auto pot = PotentialSpec::weierstrass_form(L, 1, 1);
  ComplexWindow win{-3.0, 3.5, -2.3, 2.47};
  const auto arcs = spectrum_scan(pot, win, 40, {});
  REQUIRE(!arcs.empty());
  const double cell = std::hypot((win.re_hi - win.re_lo) / 40.0,
                                 (win.im_hi - win.im_lo) / 40.0);
  int checked = 0;
  for (const auto& a : arcs)
    for (size_t i = 0; i < a.lambda.size(); i += 4) {
      const Complex lc = std::conj(a.lambda[i]);
      if (lc.imag() < win.im_lo + 2 * cell || lc.imag() > win.im_hi - 2 * cell)
        continue;
      double dmin = 1e30;
      for (const auto& b : arcs)
        for (const auto& l2 : b.lambda) dmin = std::min(dmin, std::abs(l2 - lc));
      CHECK(dmin < 2 * cell);
      ++checked;
    }
  CHECK(checked > 10);
}

TEST_CASE("jacobian/weierstrass form correspondence on a rectangular lattice") {
  const Lattice L = Lattice::from_invariants(8.0, 1.0);
  const double k = rect_modulus(L);
  auto potw = PotentialSpec::weierstrass_form(L, 1, 1);  // real case
  const double e1 = L.e(1).real(), e3 = L.e(3).real();
  const double w1 = L.omega(1).real();
  const double scale = w1 * w1 * (e1 - e3);
  // translate a jacobian-form window into weierstrass units
  const BandStructure bj = real_band_edges(PotentialSpec::jacobian_form(1, k),
                                           -0.5, 6.0, 1);
  const double lo = (-0.5 + 2 * e3 * 1.0) * scale;  // anything below lambda0
  const BandStructure bw =
      real_band_edges(potw, std::min(lo, -8.0), 6.0 * scale + 2 * e3 * scale + 4, 1);
  CHECK(std::fabs(jacobian_lambda_from_weierstrass(bw.lambda0, L, 1) - bj.lambda0) <
        1e-6);
  CHECK(std::fabs(jacobian_lambda_from_weierstrass(bw.gaps[0].lower, L, 1) -
                  bj.gaps[0].lower) < 1e-6);
  CHECK(std::fabs(jacobian_lambda_from_weierstrass(bw.gaps[0].upper, L, 1) -
                  bj.gaps[0].upper) < 1e-6);
}

TEST_CASE("in_spectrum flag and multiplier branch") {
  auto pot = PotentialSpec::jacobian_form(1, 0.6);
  // inside the first band
  const auto in = monodromy(pot, Complex(0.6), 1e-9);
  CHECK(in.unit_circle_distance() < 1e-9);
  // inside the open gap
  const auto out = monodromy(pot, Complex(1.2), 1e-9);
  CHECK(out.unit_circle_distance() > 1e-3);
  CHECK(std::abs(multiplier_in_disk(out.discriminant)) < 1.0);
}
