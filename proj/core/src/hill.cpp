#include "lamespec/hill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dopri5.hpp"
#include "levelset.hpp"
#include "parallel.hpp"

namespace lamespec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Complex stable_sqrt_branch(Complex delta) {
  // sqrt(Delta^2 - 4) with the branch aligned to Delta, so (Delta + s)/2 is
  // the larger-modulus multiplier.
  Complex s = std::sqrt(delta * delta - 4.0);
  if (std::real(std::conj(delta) * s) < 0) s = -s;
  return s;
}

template <bool WithDeriv>
std::pair<MonodromyResult, Complex> integrate_monodromy(const PotentialSpec& pot,
                                                        Complex lambda, double tol) {
  const double T = pot.period();
  const double rtol = std::max(1e-13, 0.02 * tol);
  const double atol = std::max(1e-14, 1e-3 * tol);

  MonodromyResult R;
  Complex ddelta = 0;
  if constexpr (!WithDeriv) {
    std::array<Complex, 4> y = {1.0, 0.0, 0.0, 1.0};
    auto rhs = [&](double x, const std::array<Complex, 4>& s, std::array<Complex, 4>& d) {
      const Complex w = pot.potential(x) - lambda;
      d[0] = s[1];
      d[1] = w * s[0];
      d[2] = s[3];
      d[3] = w * s[2];
    };
    detail::dopri5<4>(rhs, 0.0, T, y, rtol, atol);
    R.transfer = {y[0], y[2], y[1], y[3]};
  } else {
    std::array<Complex, 8> y = {1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    auto rhs = [&](double x, const std::array<Complex, 8>& s, std::array<Complex, 8>& d) {
      const Complex w = pot.potential(x) - lambda;
      d[0] = s[1];
      d[1] = w * s[0];
      d[2] = s[3];
      d[3] = w * s[2];
      d[4] = s[5];
      d[5] = w * s[4] - s[0];
      d[6] = s[7];
      d[7] = w * s[6] - s[2];
    };
    detail::dopri5<8>(rhs, 0.0, T, y, rtol, atol);
    R.transfer = {y[0], y[2], y[1], y[3]};
    ddelta = y[4] + y[7];
  }

  R.discriminant = R.transfer[0] + R.transfer[3];
  const Complex s = stable_sqrt_branch(R.discriminant);
  const Complex rho_big = 0.5 * (R.discriminant + s);
  const Complex rho_small =
      std::abs(rho_big) > 0 ? 1.0 / rho_big : 0.5 * (R.discriminant - s);
  R.multipliers = {rho_big, rho_small};
  R.in_spectrum = R.unit_circle_distance() < tol;
  return {R, ddelta};
}

// Integrates with step control tightened until the Wronskian contract
// |det M - 1| < 10 tol holds (long oscillatory runs accumulate drift).
template <bool WithDeriv>
std::pair<MonodromyResult, Complex> monodromy_guarded(const PotentialSpec& pot,
                                                      Complex lambda, double tol) {
  double inner = tol;
  for (int attempt = 0; attempt < 3; ++attempt) {
    auto out = integrate_monodromy<WithDeriv>(pot, lambda, inner);
    if (std::abs(out.first.det() - 1.0) < 10.0 * tol) return out;
    inner *= 0.02;
  }
  throw IntegratorFailure("monodromy: Wronskian drift exceeds tolerance");
}

// Bracketed root refinement: bisection with secant acceleration.
template <typename F>
double bisect_secant(F&& f, double a, double b, double fa, double fb, double xtol) {
  if (fa == 0) return a;
  if (fb == 0) return b;
  for (int it = 0; it < 200 && (b - a) > xtol; ++it) {
    double x = 0.5 * (a + b);
    if (fb != fa) {
      const double s = a - fa * (b - a) / (fb - fa);
      if (s > a + 0.01 * (b - a) && s < b - 0.01 * (b - a)) x = s;
    }
    const double fx = f(x);
    if (fx == 0) return x;
    if ((fx > 0) == (fa > 0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double MonodromyResult::unit_circle_distance() const {
  return std::min(std::fabs(std::abs(multipliers.first) - 1.0),
                  std::fabs(std::abs(multipliers.second) - 1.0));
}

Complex multiplier_in_disk(Complex discriminant) {
  const Complex s = stable_sqrt_branch(discriminant);
  const Complex rho_big = 0.5 * (discriminant + s);
  if (std::abs(rho_big) == 0) return 0.5 * (discriminant - s);
  return 1.0 / rho_big;
}

PotentialSpec PotentialSpec::weierstrass_form(const Lattice& lat, int m,
                                              int omega_index,
                                              std::optional<Complex> z0) {
  if (m < 0) throw Error("weierstrass_form: m must be >= 0");
  if (omega_index < 1 || omega_index > 3)
    throw Error("weierstrass_form: omega_index must be 1, 2 or 3");
  PotentialSpec p;
  p.form = PotentialForm::weierstrass;
  p.lat = lat;
  p.m = m;
  p.omega_index = omega_index;
  p.z0 = z0 ? *z0 : (omega_index == 3 ? lat.omega(1) : lat.omega(3));
  p.min_pole_dist_ = kInf;
  if (m > 0) {
    const Complex w = p.omega();
    double dmin = kInf;
    const int ns = 1025;
    for (int i = 0; i < ns; ++i) {
      const double x = 2.0 * i / (ns - 1);
      dmin = std::min(dmin, lat.distance_to_lattice(w * x + p.z0));
    }
    p.min_pole_dist_ = dmin;
    const double scale = std::max(std::abs(lat.omega(1)), std::abs(lat.omega(3)));
    if (dmin < 1e-6 * scale)
      throw SingularPotential("weierstrass_form: integration line passes through a pole");
  }
  return p;
}

PotentialSpec PotentialSpec::jacobian_form(int m, double modulus_k) {
  if (m < 0) throw Error("jacobian_form: m must be >= 0");
  if (!(modulus_k > 0.0) || !(modulus_k < 1.0))
    throw ModulusOutOfRange("jacobian_form: modulus k must lie in (0, 1)");
  PotentialSpec p;
  p.form = PotentialForm::jacobian;
  p.m = m;
  p.modulus_k = modulus_k;
  p.quarter_K_ = quarter_period_K(modulus_k);
  p.min_pole_dist_ = kInf;
  return p;
}

Complex PotentialSpec::omega() const {
  if (form != PotentialForm::weierstrass || !lat) return Complex(0.0);
  return lat->omega(omega_index);
}

double PotentialSpec::period() const {
  return form == PotentialForm::jacobian ? 2.0 * quarter_K_ : 2.0;
}

Complex PotentialSpec::potential(double x) const {
  const double coef = static_cast<double>(m) * (m + 1);
  if (coef == 0.0) return Complex(0.0);
  if (form == PotentialForm::jacobian) {
    const double s = jacobi_sn(x, modulus_k, quarter_K_);
    return Complex(coef * modulus_k * modulus_k * s * s, 0.0);
  }
  const Complex w = omega();
  return coef * w * w * lat->wp(w * x + z0);
}

bool PotentialSpec::is_real(double tol) const {
  if (form == PotentialForm::jacobian || m == 0) return true;
  double vmax = 1.0, imax = 0.0;
  const double T = period();
  for (int i = 0; i < 64; ++i) {
    const Complex v = potential(T * (i + 0.37) / 64.0);
    vmax = std::max(vmax, std::abs(v));
    imax = std::max(imax, std::fabs(v.imag()));
  }
  return imax <= tol * vmax;
}

MonodromyResult monodromy(const PotentialSpec& pot, Complex lambda, double tol) {
  return monodromy_guarded<false>(pot, lambda, tol).first;
}

std::pair<MonodromyResult, Complex> monodromy_with_derivative(const PotentialSpec& pot,
                                                              Complex lambda,
                                                              double tol) {
  return monodromy_guarded<true>(pot, lambda, tol);
}

BandStructure real_band_edges(const PotentialSpec& pot, double lambda_lo,
                              double lambda_hi, int n_gaps, const EdgeOptions& opts) {
  if (!pot.is_real()) throw NotSelfAdjoint("real_band_edges: potential is not real");
  if (!(lambda_hi > lambda_lo)) throw WindowTooSmall("real_band_edges: empty window");

  auto eval = [&](double x) {
    auto [R, dD] = monodromy_with_derivative(pot, Complex(x, 0.0), opts.tol);
    return std::pair<double, double>(R.discriminant.real(), dD.real());
  };
  auto delta_only = [&](double x) { return eval(x).first; };

  const int ns = std::max(opts.coarse_samples, 16 * (n_gaps + 2));
  std::vector<double> xs(ns), D(ns), Dp(ns);
  for (int i = 0; i < ns; ++i) xs[i] = lambda_lo + (lambda_hi - lambda_lo) * i / (ns - 1.0);
  detail::parallel_for(ns, 0, [&](int i) {
    const auto [d, dp] = eval(xs[i]);
    D[i] = d;
    Dp[i] = dp;
  });

  BandStructure bs;
  bs.source = Provenance::monodromy;
  const double xtol = 1e-13 * std::max(1.0, std::fabs(lambda_hi));

  if (!(D[0] > 2.0))
    throw WindowTooSmall("real_band_edges: window must start below lambda0");
  int i0 = -1;
  for (int i = 1; i < ns; ++i)
    if (D[i - 1] >= 2.0 && D[i] < 2.0) {
      i0 = i;
      break;
    }
  if (i0 < 0) throw WindowTooSmall("real_band_edges: lambda0 not found in window");
  bs.lambda0 = bisect_secant([&](double x) { return delta_only(x) - 2.0; }, xs[i0 - 1],
                             xs[i0], D[i0 - 1] - 2.0, D[i0] - 2.0, xtol);

  const double cell = (lambda_hi - lambda_lo) / (ns - 1.0);
  double cursor = bs.lambda0;
  int ci = i0;

  for (int j = 1; j <= n_gaps; ++j) {
    const double s = (j % 2 == 1) ? -2.0 : 2.0;
    // Next extremum of Delta past the cursor (one per gap region).
    int k = -1;
    double le = 0;
    for (int i = std::max(ci, 1); i < ns; ++i) {
      if (Dp[i - 1] == 0.0 || (Dp[i - 1] > 0) != (Dp[i] > 0)) {
        const double cand = bisect_secant([&](double x) { return eval(x).second; },
                                          xs[i - 1], xs[i], Dp[i - 1], Dp[i], xtol);
        if (cand > cursor + 4.0 * xtol) {
          k = i;
          le = cand;
          break;
        }
      }
    }
    if (k < 0) throw WindowTooSmall("real_band_edges: ran out of window before n_gaps");
    const auto [De, Dpe] = eval(le);
    const double r = De - s;
    const bool open_sign = (j % 2 == 1) ? (r < 0) : (r > 0);

    Gap g;
    g.antiperiodic = (j % 2 == 1);
    g.residual = std::fabs(r);
    g.delta_prime_at_merge = std::fabs(Dpe);
    if (open_sign && std::fabs(r) > 1e-12 * std::max(1.0, std::fabs(De))) {
      auto walk_to_band = [&](int dir) {
        double h = std::max(1e-7 * std::max(1.0, std::fabs(le)), 1e-4 * cell);
        double x0 = le, f0 = r;
        for (int it = 0; it < 200; ++it) {
          const double x1 = le + dir * h;
          if (x1 < lambda_lo || x1 > lambda_hi)
            throw WindowTooSmall("real_band_edges: gap edge outside window");
          const double f1 = delta_only(x1) - s;
          if ((f1 > 0) != (f0 > 0))
            return bisect_secant([&](double x) { return delta_only(x) - s; },
                                 std::min(x0, x1), std::max(x0, x1),
                                 dir > 0 ? f0 : f1, dir > 0 ? f1 : f0, xtol);
          x0 = x1;
          f0 = f1;
          h *= 1.7;
        }
        throw WindowTooSmall("real_band_edges: edge bracketing failed");
      };
      g.lower = walk_to_band(-1);
      g.upper = walk_to_band(+1);
      g.open = g.width() > opts.open_tol;
      cursor = g.upper;
    } else {
      g.lower = g.upper = le;
      g.open = false;
      cursor = le;
    }
    bs.gaps.push_back(g);
    ci = k;
  }
  return bs;
}

GapVerification verify_first_m_gaps(const PotentialSpec& pot, int n_check,
                                    const EdgeOptions& opts) {
  const int m = pot.m;
  const double T = pot.period();
  double vmin = 0.0, vmax = 0.0;
  for (int i = 0; i < 128; ++i) {
    const double v = pot.potential(T * i / 128.0).real();
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  const double top = (m + n_check + 1.5) * 3.14159265358979323846 / T;
  const double lo = vmin - 0.5;
  const double hi = vmax + top * top * 1.1 + 2.0;

  GapVerification vr;
  vr.bands = real_band_edges(pot, lo, hi, m + n_check, opts);
  vr.verdict = true;
  for (int j = 0; j < m + n_check; ++j) {
    const Gap& g = vr.bands.gaps[j];
    if (j < m) {
      vr.open_widths.push_back(g.width());
      if (!(g.width() > opts.open_tol)) vr.verdict = false;
    } else {
      vr.closed_residuals.push_back(g.residual);
      if (!(g.width() < opts.closed_tol) || !(g.delta_prime_at_merge < 1e-4))
        vr.verdict = false;
    }
  }
  return vr;
}

std::vector<SpectralArc> spectrum_scan(const PotentialSpec& pot,
                                       const ComplexWindow& window, int resolution,
                                       const ScanOptions& opts) {
  if (resolution < 16) throw Error("spectrum_scan: resolution must be >= 16");
  const int nx = resolution, ny = resolution;
  const double dx = (window.re_hi - window.re_lo) / nx;
  const double dy = (window.im_hi - window.im_lo) / ny;
  auto lam = [&](double gx, double gy) {
    return Complex(window.re_lo + gx * dx, window.im_lo + gy * dy);
  };

  const int NN = (nx + 1) * (ny + 1);
  std::vector<Complex> Dg(NN);
  detail::parallel_for(NN, opts.threads, [&](int id) {
    const int i = id % (nx + 1), j = id / (nx + 1);
    Dg[id] = monodromy(pot, lam(i, j), opts.tol).discriminant;
  });
  std::vector<double> imv(NN);
  for (int id = 0; id < NN; ++id) {
    imv[id] = Dg[id].imag();
    // deterministic sign for nodes that sit exactly on the zero set
    if (imv[id] == 0.0) imv[id] = 1e-300;
  }
  std::vector<unsigned char> mask(NN, 1);
  auto f = [&](double gx, double gy) {
    return monodromy(pot, lam(gx, gy), opts.tol).discriminant.imag();
  };
  auto chains = detail::extract_level_set(nx, ny, false, imv, mask, f, opts.refine_iters);

  std::vector<SpectralArc> arcs;
  const double cell = std::hypot(dx, dy);

  for (const auto& ch : chains) {
    const int n = static_cast<int>(ch.pts.size());
    if (n < 2) continue;
    std::vector<Complex> lpts(n);
    std::vector<double> re_delta(n);
    detail::parallel_for(n, opts.threads, [&](int i) {
      lpts[i] = lam(ch.pts[i][0], ch.pts[i][1]);
      re_delta[i] = monodromy(pot, lpts[i], opts.tol).discriminant.real();
    });

    auto polish_terminus = [&](Complex seed, double s) -> Complex {
      Complex x = seed;
      for (int it = 0; it < 16; ++it) {
        auto [R, dD] = monodromy_with_derivative(pot, x, opts.tol);
        const Complex fval = R.discriminant - s;
        if (std::abs(fval) < 1e-10) break;
        if (std::abs(dD) == 0) break;
        const Complex step = fval / dD;
        x -= step;
        if (std::abs(x - seed) > 4 * cell) return seed;  // runaway; keep grid point
        if (std::abs(step) < 1e-13 * std::max(1.0, std::abs(x))) break;
      }
      return x;
    };

    auto on_boundary = [&](Complex L) {
      return std::fabs(L.real() - window.re_lo) < 1.2 * dx ||
             std::fabs(L.real() - window.re_hi) < 1.2 * dx ||
             std::fabs(L.imag() - window.im_lo) < 1.2 * dy ||
             std::fabs(L.imag() - window.im_hi) < 1.2 * dy;
    };

    int i = 0;
    while (i < n) {
      if (std::fabs(re_delta[i]) > 2.0) {
        ++i;
        continue;
      }
      int j = i;
      while (j + 1 < n && std::fabs(re_delta[j + 1]) <= 2.0) ++j;
      if (j > i) {
        SpectralArc arc;
        arc.provenance = Provenance::monodromy;
        if (i > 0) {
          // crossed |Re Delta| = 2 between i-1 and i: polish to the branch point
          const double s = re_delta[i - 1] > 0 ? 2.0 : -2.0;
          arc.lambda.push_back(polish_terminus(lpts[i], s));
        }
        for (int t = i; t <= j; ++t) arc.lambda.push_back(lpts[t]);
        if (j + 1 < n) {
          const double s = re_delta[j + 1] > 0 ? 2.0 : -2.0;
          arc.lambda.push_back(polish_terminus(lpts[j], s));
        }
        arc.endpoints[0] = {arc.lambda.front(), -1};
        arc.endpoints[1] = {arc.lambda.back(), -1};
        arc.infinite = (i == 0 && !ch.closed && on_boundary(arc.lambda.front())) ||
                       (j == n - 1 && !ch.closed && on_boundary(arc.lambda.back()));
        arcs.push_back(std::move(arc));
      }
      i = j + 1;
    }
  }

  // Arcs can pass through a point where Delta merely touches +-2 (a collapsed
  // double point of the spectral curve); the |Re Delta| <= 2 trimmer splits
  // them there. Re-join pairs of termini that coincide.
  auto join_pass = [&]() {
    for (size_t a = 0; a < arcs.size(); ++a) {
      for (int ea = 0; ea < 2; ++ea) {
        const Complex pa = ea == 0 ? arcs[a].lambda.front() : arcs[a].lambda.back();
        int hits = 0;
        size_t bj = 0;
        int ebj = 0;
        for (size_t b = 0; b < arcs.size(); ++b) {
          for (int eb = 0; eb < 2; ++eb) {
            if (a == b && ea == eb) continue;
            const Complex pb =
                eb == 0 ? arcs[b].lambda.front() : arcs[b].lambda.back();
            if (std::abs(pa - pb) < 1.0 * cell) {
              ++hits;
              bj = b;
              ebj = eb;
            }
          }
        }
        if (hits != 1 || bj == a) continue;  // merge only clean pairs
        SpectralArc& A = arcs[a];
        SpectralArc B = arcs[bj];
        if (ea == 0) std::reverse(A.lambda.begin(), A.lambda.end());
        if (ebj == 1) std::reverse(B.lambda.begin(), B.lambda.end());
        if (ea == 0) std::swap(A.endpoints[0], A.endpoints[1]);
        if (ebj == 1) std::swap(B.endpoints[0], B.endpoints[1]);
        A.lambda.insert(A.lambda.end(), B.lambda.begin(), B.lambda.end());
        A.endpoints[1] = B.endpoints[1];
        A.infinite = A.infinite || B.infinite;
        arcs.erase(arcs.begin() + bj);
        return true;
      }
    }
    return false;
  };
  while (join_pass()) {
  }
  return arcs;
}

double jacobian_lambda_from_weierstrass(double lambda_w, const Lattice& lat, int m) {
  if (lat.lattice_class() != LatticeClass::rectangular)
    throw Error("jacobian_lambda_from_weierstrass: lattice must be rectangular");
  const double e1 = lat.e(1).real(), e3 = lat.e(3).real();
  const double w1 = lat.omega(1).real();
  return (lambda_w / (w1 * w1) - m * (m + 1) * e3) / (e1 - e3);
}

}  // namespace lamespec
