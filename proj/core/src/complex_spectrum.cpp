#include "lamespec/complex_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "levelset.hpp"
#include "parallel.hpp"

namespace lamespec {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::array<double, 2> wrap2(std::array<double, 2> p) {
  for (double& c : p) {
    c = std::fmod(c, 2.0);
    if (c < 0) c += 2.0;
  }
  return p;
}

double torus_dist(const std::array<double, 2>& p, const std::array<double, 2>& q) {
  double dx = std::fabs(p[0] - q[0]);
  double dy = std::fabs(p[1] - q[1]);
  dx = std::fmod(dx, 2.0);
  dy = std::fmod(dy, 2.0);
  if (dx > 1.0) dx = 2.0 - dx;
  if (dy > 1.0) dy = 2.0 - dy;
  return std::hypot(dx, dy);
}

// q shifted into the unwrapped frame of p (nearest lattice copy).
std::array<double, 2> unwrap_near(std::array<double, 2> q,
                                  const std::array<double, 2>& p) {
  q[0] -= 2.0 * std::round((q[0] - p[0]) / 2.0);
  q[1] -= 2.0 * std::round((q[1] - p[1]) / 2.0);
  return q;
}

// Roots of 4z^3 - c2 z - c3 (Weierstrass normal form).
std::array<Complex, 3> cubic_roots_4(Complex c2, Complex c3) {
  const Complex p = -c2 / 4.0, q = -c3 / 4.0;
  std::array<Complex, 3> r{};
  if (std::abs(p) == 0.0 && std::abs(q) == 0.0) return r;
  const Complex D = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
  Complex w = -q / 2.0 + D;
  if (std::abs(-q / 2.0 - D) > std::abs(w)) w = -q / 2.0 - D;
  const Complex u = std::pow(w, 1.0 / 3.0);
  const Complex v = std::abs(u) > 0 ? -p / (3.0 * u) : Complex(0.0);
  const Complex rot(-0.5, 0.5 * std::sqrt(3.0));
  r = {u + v, u * rot + v * std::conj(rot), u * std::conj(rot) + v * rot};
  for (auto& x : r)
    for (int it = 0; it < 4; ++it) {
      const Complex f = ((4.0 * x) * x - c2) * x - c3;
      const Complex fp = 12.0 * x * x - c2;
      if (std::abs(fp) == 0.0) break;
      x -= f / fp;
    }
  return r;
}

}  // namespace

Complex FloquetExponent::f(Complex k) const { return eta * k - omega * lat.zeta(k); }

Complex FloquetExponent::f_prime(Complex k) const { return eta + omega * lat.wp(k); }

std::pair<double, double> FloquetExponent::u_v(Complex k) const {
  const Complex w = f(k);
  return {w.real(), w.imag()};
}

Complex FloquetExponent::lambda_of(Complex k) const {
  return -omega * omega * lat.wp(k);
}

Complex FloquetExponent::k_of_ab(double a, double b) const {
  return a * lat.omega(1) + b * lat.omega(3);
}

FloquetExponent make_floquet(const Lattice& lat, int omega_index) {
  FloquetExponent fe(lat);
  fe.omega_index = omega_index;
  fe.omega = lat.omega(omega_index);
  fe.eta = lat.eta(omega_index);
  return fe;
}

Complex hermite_psi(Complex z, Complex k_param, const Lattice& lat) {
  if (lat.distance_to_lattice(z) < lat.pole_tolerance())
    throw PoleAtLatticePoint("hermite_psi: z is a lattice point");
  if (lat.distance_to_lattice(k_param) < lat.pole_tolerance())
    throw PoleAtLatticePoint("hermite_psi: k is a lattice point");
  return lat.sigma(z + k_param) / (lat.sigma(z) * lat.sigma(k_param)) *
         std::exp(-lat.zeta(k_param) * z);
}

std::pair<double, double> floquet_u_v(Complex k, const FloquetExponent& fe) {
  return fe.u_v(k);
}

bool CriticalPointReport::all_nondegenerate() const {
  return nondegenerate[0] == Classification::yes &&
         nondegenerate[1] == Classification::yes &&
         nondegenerate[2] == Classification::yes;
}

CriticalPointReport find_critical_points(const FloquetExponent& fe) {
  const Lattice& lat = fe.lat;
  const Complex target = -fe.eta / fe.omega;
  const double tscale = std::max(1.0, std::abs(target));

  std::vector<std::pair<double, Complex>> seeds;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      const Complex k = fe.k_of_ab((i + 0.5) / 8.0, (j + 0.5) / 8.0);
      try {
        seeds.emplace_back(std::abs(lat.wp(k) - target), k);
      } catch (const PoleAtLatticePoint&) {
      }
    }
  std::sort(seeds.begin(), seeds.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  Complex root{};
  bool found = false;
  for (const auto& [res0, seed] : seeds) {
    Complex k = seed;
    for (int it = 0; it < 80; ++it) {
      Complex g, gp;
      try {
        g = lat.wp(k) - target;
        gp = lat.wp_prime(k);
      } catch (const PoleAtLatticePoint&) {
        break;
      }
      if (std::abs(g) < 1e-11 * tscale) {
        found = true;
        root = k;
        break;
      }
      if (std::abs(gp) < 1e-12 * tscale) {
        // near a half-period the root is double: p(k) - e_j ~ c (k - w_j)^2
        const Complex gpp = 6.0 * lat.wp(k) * lat.wp(k) - lat.g2() / 2.0;
        if (std::abs(gpp) == 0.0) break;
        k -= std::sqrt(2.0 * g / gpp);
        continue;
      }
      k -= g / gp;
    }
    if (found) break;
  }
  if (!found)
    throw NewtonDivergence("find_critical_points: no root of p(k) + eta/omega found");

  CriticalPointReport rep;
  const double u_plus = fe.u_v(root).first;
  rep.k_star = (u_plus >= 0) ? root : -root;
  rep.c_star = fe.u_v(rep.k_star).first;
  rep.lambda_star = fe.lambda_of(rep.k_star);

  auto classify = [](double value, double threshold) {
    if (value > 10.0 * threshold) return Classification::yes;
    if (value < 0.1 * threshold) return Classification::no;
    return Classification::borderline;
  };
  for (int j = 1; j <= 3; ++j) {
    const double s = std::abs(fe.eta + fe.omega * lat.e(j));
    const double thr =
        1e-8 * std::max(std::abs(fe.eta), std::abs(fe.omega * lat.e(j)));
    rep.nondegenerate[j - 1] = classify(s, std::max(thr, 1e-300));
  }
  rep.nonsingular = classify(std::fabs(rep.c_star), 1e-8);
  return rep;
}

std::vector<TorusCurve> trace_zero_set(const FloquetExponent& fe, int resolution,
                                       const TraceOptions& opts) {
  if (resolution < 64) throw Error("trace_zero_set: resolution must be >= 64");
  const int N = resolution;
  const double cell = 2.0 / N;

  std::vector<double> vals(static_cast<size_t>(N) * N, 0.0);
  std::vector<unsigned char> mask(static_cast<size_t>(N) * N, 1);
  const double r_excl_cells = 2.0;  // = 2/resolution in [0,1)^2 units of (a,b)

  detail::parallel_for(N * N, opts.threads, [&](int id) {
    const int i = id % N, j = id / N;
    const double di = std::min(i, N - i), dj = std::min(j, N - j);
    if (std::hypot(di, dj) < r_excl_cells + 1e-9) {
      mask[id] = 0;
      return;
    }
    vals[id] = fe.u_v(fe.k_of_ab(cell * i, cell * j)).first;
  });

  double umax = 0;
  for (size_t id = 0; id < vals.size(); ++id)
    if (mask[id]) umax = std::max(umax, std::fabs(vals[id]));
  const double nudge = 1e-14 * umax;
  for (size_t id = 0; id < vals.size(); ++id)
    if (mask[id] && std::fabs(vals[id]) < nudge) vals[id] = nudge;

  auto f = [&](double gx, double gy) {
    return fe.u_v(fe.k_of_ab(cell * gx, cell * gy)).first;
  };
  const int refine_iters =
      std::max(4, static_cast<int>(std::ceil(std::log2(cell / opts.refine_ab_tol))));
  auto chains = detail::extract_level_set(N, N, true, vals, mask, f, refine_iters);

  std::vector<TorusCurve> curves;
  for (auto& ch : chains) {
    TorusCurve c;
    c.cell = cell;
    c.closed = ch.closed;
    c.ab.reserve(ch.pts.size());
    for (auto& p : ch.pts) c.ab.push_back({p[0] * cell, p[1] * cell});
    curves.push_back(std::move(c));
  }

  // Close the cut through the pole disc by adding the point k = 0.
  const std::array<double, 2> origin = {0.0, 0.0};
  const double near_origin = (r_excl_cells + 2.5) * cell;
  std::vector<std::pair<int, int>> origin_ends;  // (curve, end: 0 front / 1 back)
  for (int ci = 0; ci < static_cast<int>(curves.size()); ++ci) {
    if (curves[ci].closed) continue;
    if (torus_dist(wrap2(curves[ci].ab.front()), origin) < near_origin)
      origin_ends.emplace_back(ci, 0);
    if (torus_dist(wrap2(curves[ci].ab.back()), origin) < near_origin)
      origin_ends.emplace_back(ci, 1);
  }
  auto origin_copy_near = [](const std::array<double, 2>& p) {
    return std::array<double, 2>{2.0 * std::round(p[0] / 2.0),
                                 2.0 * std::round(p[1] / 2.0)};
  };

  if (origin_ends.size() == 2) {
    auto [c0, e0] = origin_ends[0];
    auto [c1, e1] = origin_ends[1];
    if (c0 == c1) {
      TorusCurve& c = curves[c0];
      c.ab.insert(c.ab.begin(), origin_copy_near(c.ab.front()));
      c.ab.push_back(origin_copy_near(c.ab.back()));
      c.closed = true;
      c.through_origin = true;
    } else {
      TorusCurve a = curves[c0];
      TorusCurve b = curves[c1];
      if (e0 == 0) std::reverse(a.ab.begin(), a.ab.end());
      if (e1 == 1) std::reverse(b.ab.begin(), b.ab.end());
      const auto oa = origin_copy_near(a.ab.back());
      a.ab.push_back(oa);
      // shift b so its leading origin copy coincides with oa
      const auto ob = origin_copy_near(b.ab.front());
      const double shx = oa[0] - ob[0], shy = oa[1] - ob[1];
      for (auto& p : b.ab) {
        p[0] += shx;
        p[1] += shy;
      }
      a.ab.insert(a.ab.end(), b.ab.begin(), b.ab.end());
      a.closed = true;
      a.through_origin = true;
      curves[c0] = std::move(a);
      curves.erase(curves.begin() + c1);
    }
  } else if (!origin_ends.empty()) {
    throw ResolutionTooCoarse(
        "trace_zero_set: unexpected number of chain ends at the origin disc");
  }

  for (auto it = curves.begin(); it != curves.end();) {
    if (it->ab.size() < 4)
      it = curves.erase(it);
    else if (!it->closed)
      throw ResolutionTooCoarse("trace_zero_set: open chain away from the origin disc");
    else
      ++it;
  }
  return curves;
}

namespace {

struct Piece {
  std::vector<std::array<double, 2>> ab;
  int star_front = -1;  // star index at the front end (-1: free end)
  int star_back = -1;
};

// Cuts each closed curve at its passes near the points `stars` and re-joins
// the rays by direction continuity. Needed only for singular level sets,
// where the marching-squares pairing at the genuine self-crossing of {u = 0}
// is decided by floating-point noise.
std::vector<TorusCurve> repair_singular_crossings(
    const std::vector<TorusCurve>& curves,
    const std::array<std::array<double, 2>, 2>& stars, double cell) {
  const double cut_radius = 2.2 * cell;
  std::vector<Piece> pieces;

  for (const auto& c : curves) {
    std::vector<std::array<double, 2>> pts = c.ab;
    if (pts.size() >= 2 && torus_dist(wrap2(pts.front()), wrap2(pts.back())) < 1e-9)
      pts.pop_back();
    const int n = static_cast<int>(pts.size());
    std::vector<int> tag(n, -1);
    bool any = false;
    for (int i = 0; i < n; ++i)
      for (int s = 0; s < 2; ++s)
        if (torus_dist(wrap2(pts[i]), stars[s]) < cut_radius) {
          tag[i] = s;
          any = true;
        }
    if (!any) {
      Piece p;
      p.ab = pts;
      if (c.closed) p.ab.push_back(p.ab.front());
      pieces.push_back(std::move(p));
      continue;
    }
    int start = 0;
    while (start < n && tag[start] >= 0) ++start;
    if (start == n) continue;  // tiny loop swallowed by the star
    Piece cur;
    cur.star_front = -1;
    int visited = 0;
    int idx = start;
    while (visited < n) {
      if (tag[idx] < 0) {
        if (cur.ab.empty())
          cur.ab.push_back(pts[idx]);
        else
          cur.ab.push_back(unwrap_near(pts[idx], cur.ab.back()));
        ++visited;
        idx = (idx + 1) % n;
      } else {
        const int s = tag[idx];
        cur.star_back = s;
        if (cur.ab.size() >= 2) pieces.push_back(cur);
        cur = Piece{};
        cur.star_front = s;
        while (visited < n && tag[idx] >= 0) {
          ++visited;
          idx = (idx + 1) % n;
        }
      }
    }
    // the traversal ends back at `start`: the trailing piece continues into
    // the leading one; since the loop started away from stars, the leading
    // piece was emitted with star_front = -1 only if no cut preceded it.
    if (cur.ab.size() >= 2) {
      cur.star_back = -1;
      pieces.push_back(cur);
    }
  }

  // merge trailing free ends with leading free ends of pieces from the same
  // traversal: pieces with a free end belong together pairwise
  for (size_t i = 0; i < pieces.size(); ++i) {
    if (pieces[i].star_back != -1) continue;
    for (size_t j = 0; j < pieces.size(); ++j) {
      if (i == j || pieces[j].star_front != -1) continue;
      if (pieces[j].ab.empty() || pieces[i].ab.empty()) continue;
      if (torus_dist(wrap2(pieces[i].ab.back()), wrap2(pieces[j].ab.front())) <
          1.5 * cell) {
        auto shifted = pieces[j].ab;
        const auto anchor = unwrap_near(shifted.front(), pieces[i].ab.back());
        const double shx = anchor[0] - shifted.front()[0];
        const double shy = anchor[1] - shifted.front()[1];
        for (auto& p : shifted) {
          p[0] += shx;
          p[1] += shy;
        }
        pieces[i].ab.insert(pieces[i].ab.end(), shifted.begin(), shifted.end());
        pieces[i].star_back = pieces[j].star_back;
        pieces.erase(pieces.begin() + j);
        if (j < i) --i;
        break;
      }
    }
  }

  // splice pieces at each star by straight continuation
  auto end_dir = [&](const Piece& p, int end) {
    const int n = static_cast<int>(p.ab.size());
    const int i0 = end == 0 ? std::min(3, n - 1) : std::max(n - 4, 0);
    const int i1 = end == 0 ? 0 : n - 1;
    return Complex(p.ab[i1][0] - p.ab[i0][0], p.ab[i1][1] - p.ab[i0][1]);
  };

  for (int s = 0; s < 2; ++s) {
    while (true) {
      // collect live ends at star s
      std::vector<std::pair<int, int>> ends;  // (piece, end)
      for (int i = 0; i < static_cast<int>(pieces.size()); ++i) {
        if (pieces[i].star_front == s) ends.emplace_back(i, 0);
        if (pieces[i].star_back == s) ends.emplace_back(i, 1);
      }
      if (ends.size() < 2) break;
      const auto [pi, ei] = ends[0];
      const Complex di = end_dir(pieces[pi], ei);
      int bj = -1;
      double bc = -2;
      for (size_t j = 1; j < ends.size(); ++j) {
        const auto [pj, ej] = ends[j];
        if (pj == pi && ej == ei) continue;
        const Complex dj = end_dir(pieces[pj], ej);
        const double cang =
            -std::real(di * std::conj(dj)) / (std::abs(di) * std::abs(dj) + 1e-300);
        if (cang > bc) {
          bc = cang;
          bj = static_cast<int>(j);
        }
      }
      if (bj < 0) break;
      auto [pj, ej] = ends[bj];
      if (pi == pj) {
        // piece closes onto itself through the star
        Piece& p = pieces[pi];
        const auto sp = unwrap_near(stars[s], p.ab.back());
        p.ab.push_back(sp);
        p.ab.push_back(unwrap_near(p.ab.front(), p.ab.back()));
        p.star_front = p.star_back = -1;
        continue;
      }
      Piece& pe = pieces[pi];
      Piece pf = pieces[pj];
      if (ei == 0) {
        std::reverse(pe.ab.begin(), pe.ab.end());
        std::swap(pe.star_front, pe.star_back);
      }
      if (ej == 1) {
        std::reverse(pf.ab.begin(), pf.ab.end());
        std::swap(pf.star_front, pf.star_back);
      }
      const auto sp = unwrap_near(stars[s], pe.ab.back());
      pe.ab.push_back(sp);
      const auto anchor = unwrap_near(pf.ab.front(), sp);
      const double shx = anchor[0] - pf.ab.front()[0];
      const double shy = anchor[1] - pf.ab.front()[1];
      for (auto& p : pf.ab) {
        p[0] += shx;
        p[1] += shy;
      }
      pe.ab.insert(pe.ab.end(), pf.ab.begin(), pf.ab.end());
      pe.star_back = pf.star_back;
      pieces.erase(pieces.begin() + pj);
    }
  }

  std::vector<TorusCurve> out;
  for (auto& p : pieces) {
    if (p.ab.size() < 4) continue;
    TorusCurve c;
    c.cell = cell;
    c.ab = std::move(p.ab);
    c.closed = torus_dist(wrap2(c.ab.front()), wrap2(c.ab.back())) < 3.0 * cell;
    if (c.closed &&
        torus_dist(wrap2(c.ab.front()), wrap2(c.ab.back())) > 1e-12)
      c.ab.push_back(unwrap_near(c.ab.front(), c.ab.back()));
    for (const auto& q : c.ab)
      if (torus_dist(wrap2(q), {0.0, 0.0}) < 1e-9) c.through_origin = true;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

std::vector<SpectralArc> arcs_from_zero_set(const std::vector<TorusCurve>& curves_in,
                                            const FloquetExponent& fe) {
  const Lattice& lat = fe.lat;
  std::vector<TorusCurve> curves = curves_in;
  const double cell = curves.empty() ? 0.01 : curves.front().cell;
  const double kscale = std::max(std::abs(lat.omega(1)), std::abs(lat.omega(3)));

  auto ab_of_k = [&](Complex k) -> std::array<double, 2> {
    const Complex w1 = lat.omega(1), w3 = lat.omega(3);
    const double det = w1.real() * w3.imag() - w1.imag() * w3.real();
    const double a = (k.real() * w3.imag() - k.imag() * w3.real()) / det;
    const double b = (w1.real() * k.imag() - w1.imag() * k.real()) / det;
    return wrap2({a, b});
  };

  // Singular level sets cross at +-k*; re-pair the chains there.
  CriticalPointReport crit;
  bool have_crit = false;
  try {
    crit = find_critical_points(fe);
    have_crit = true;
  } catch (const Error&) {
  }
  if (have_crit && crit.nonsingular != Classification::yes) {
    bool star_is_fixed =
        std::abs(lat.reduce(crit.k_star)) < 2.0 * cell * kscale;
    for (int j = 1; j <= 3; ++j)
      if (std::abs(lat.reduce(crit.k_star - lat.omega(j))) < 2.0 * cell * kscale)
        star_is_fixed = true;
    if (!star_is_fixed)
      curves = repair_singular_crossings(
          curves, {ab_of_k(crit.k_star), ab_of_k(-crit.k_star)}, cell);
  }

  struct Fixed {
    std::array<double, 2> ab;
    int e_index;  // 0 = origin (infinite end), 1..3 = omega_j
  };
  const std::array<Fixed, 4> fixed = {Fixed{{0.0, 0.0}, 0}, Fixed{{1.0, 0.0}, 1},
                                      Fixed{{1.0, 1.0}, 2}, Fixed{{0.0, 1.0}, 3}};

  struct Segment {
    std::vector<std::array<double, 2>> ab;
    int e_first = -1, e_last = -1;
  };
  std::vector<Segment> segments;

  for (const auto& curve : curves) {
    std::vector<std::array<double, 2>> pts = curve.ab;
    if (pts.size() >= 2 && torus_dist(wrap2(pts.front()), wrap2(pts.back())) < 1e-9)
      pts.pop_back();
    const int n = static_cast<int>(pts.size());
    if (n < 4) continue;

    struct Hit {
      int idx;
      int e_index;
      double dist;
    };
    std::vector<Hit> hits;
    for (int i = 0; i < n; ++i) {
      for (const auto& F : fixed) {
        const double d = torus_dist(wrap2(pts[i]), F.ab);
        if (d >= 1.5 * cell) continue;
        if (!hits.empty() && hits.back().e_index == F.e_index &&
            i - hits.back().idx <= 3) {
          if (d < hits.back().dist) {
            hits.back().idx = i;
            hits.back().dist = d;
          }
        } else {
          hits.push_back({i, F.e_index, d});
        }
      }
    }
    if (hits.size() >= 2 && hits.front().idx <= 2 && hits.back().idx >= n - 3 &&
        hits.front().e_index == hits.back().e_index) {
      if (hits.back().dist < hits.front().dist) hits.front() = hits.back();
      hits.pop_back();
    }

    if (hits.empty()) {
      Segment s;
      s.ab = pts;
      segments.push_back(std::move(s));
      continue;
    }

    for (const auto& h : hits) {
      const auto& F = *std::find_if(fixed.begin(), fixed.end(), [&](const Fixed& ff) {
        return ff.e_index == h.e_index;
      });
      pts[h.idx] = unwrap_near(F.ab, pts[h.idx]);
    }

    const int H = static_cast<int>(hits.size());
    for (int h = 0; h < H; ++h) {
      const int i0 = hits[h].idx;
      const int i1 = hits[(h + 1) % H].idx;
      Segment s;
      s.ab.push_back(pts[i0]);
      for (int i = (i0 + 1) % n;; i = (i + 1) % n) {
        s.ab.push_back(unwrap_near(pts[i], s.ab.back()));
        if (i == i1) break;
        if (static_cast<int>(s.ab.size()) > n + 2) break;  // safety
      }
      s.e_first = hits[h].e_index;
      s.e_last = hits[(h + 1) % H].e_index;
      if (s.ab.size() >= 3) segments.push_back(std::move(s));
      if (H == 1) break;
    }
  }

  // Quotient by k -> -k: drop one segment of each mirror pair.
  auto mirrored = [&](const Segment& A, const Segment& B) {
    const bool ends_match = (A.e_first == B.e_first && A.e_last == B.e_last) ||
                            (A.e_first == B.e_last && A.e_last == B.e_first);
    if (!ends_match) return false;
    int matched = 0;
    for (int q = 1; q <= 3; ++q) {
      const auto& m = A.ab[A.ab.size() * q / 4];
      const std::array<double, 2> neg = wrap2({-m[0], -m[1]});
      double dmin = 1e30;
      for (const auto& p : B.ab) dmin = std::min(dmin, torus_dist(wrap2(p), neg));
      if (dmin < 4.0 * cell) ++matched;
    }
    return matched == 3;
  };
  std::vector<char> keep(segments.size(), 1);
  for (size_t i = 0; i < segments.size(); ++i) {
    if (!keep[i]) continue;
    for (size_t j = i + 1; j < segments.size(); ++j) {
      if (!keep[j]) continue;
      if (mirrored(segments[i], segments[j])) {
        keep[j] = 0;
        break;
      }
    }
  }

  std::vector<SpectralArc> arcs;
  for (size_t si = 0; si < segments.size(); ++si) {
    if (!keep[si]) continue;
    Segment seg = segments[si];
    const bool infinite = (seg.e_first == 0) || (seg.e_last == 0);
    if (seg.e_first == 0 && seg.e_last != 0) {
      std::reverse(seg.ab.begin(), seg.ab.end());
      std::swap(seg.e_first, seg.e_last);
    }

    SpectralArc arc;
    arc.provenance = Provenance::hermite;
    arc.infinite = infinite;
    for (const auto& p : seg.ab) {
      const Complex k = fe.k_of_ab(p[0], p[1]);
      if (lat.distance_to_lattice(k) < 0.6 * cell * kscale) continue;
      arc.lambda.push_back(fe.lambda_of(k));
      arc.k_ab.push_back(p);
    }
    if (arc.lambda.size() < 2) continue;

    if (infinite) {
      // analytic continuation of the tail along {u = 0} toward k = 0; the
      // grid-traced points nearest the pole are dropped first, since the
      // lambda error of a traced vertex grows like |lambda|^{3/2}
      const auto last = seg.ab.back();
      const std::array<double, 2> oc = {2.0 * std::round(last[0] / 2.0),
                                        2.0 * std::round(last[1] / 2.0)};
      const Complex korigin = fe.k_of_ab(oc[0], oc[1]);
      const double r_aug = 16.0 * cell * kscale;
      while (arc.k_ab.size() > 2) {
        const Complex kb = fe.k_of_ab(arc.k_ab.back()[0], arc.k_ab.back()[1]);
        if (std::abs(kb - korigin) >= r_aug) break;
        arc.k_ab.pop_back();
        arc.lambda.pop_back();
      }
      Complex krel = fe.k_of_ab(arc.k_ab.back()[0], arc.k_ab.back()[1]) - korigin;
      double r = std::abs(krel);
      double th = std::arg(krel);
      const double rmin = 1.0e-4 * kscale;
      const Complex w1 = lat.omega(1), w3 = lat.omega(3);
      const double det = w1.real() * w3.imag() - w1.imag() * w3.real();
      while (r > rmin) {
        r *= 0.93;
        bool ok = false;
        double prev_step = 1e30;
        for (int it = 0; it < 60; ++it) {
          const Complex kk = korigin + std::polar(r, th);
          double u;
          Complex fp;
          try {
            u = fe.u_v(kk).first;
            fp = fe.f_prime(kk);
          } catch (const PoleAtLatticePoint&) {
            break;
          }
          const double du = std::real(fp * Complex(0, 1) * std::polar(r, th));
          if (std::fabs(du) < 1e-300) break;
          const double step = u / du;
          th -= step;
          if (std::fabs(step) < 1e-15 || (it > 4 && std::fabs(step) >= prev_step)) {
            ok = true;
            break;
          }
          prev_step = std::fabs(step);
        }
        if (!ok) break;
        const Complex kk = korigin + std::polar(r, th);
        arc.lambda.push_back(fe.lambda_of(kk));
        const double a = (kk.real() * w3.imag() - kk.imag() * w3.real()) / det;
        const double b = (w1.real() * kk.imag() - w1.imag() * kk.real()) / det;
        arc.k_ab.push_back({a, b});
      }
    }

    auto label = [&](int e_index, bool front) {
      ArcEndpoint ep;
      ep.e_index = e_index;
      if (e_index >= 1 && e_index <= 3)
        ep.lambda = -fe.omega * fe.omega * lat.e(e_index);
      else
        ep.lambda = front ? arc.lambda.front() : arc.lambda.back();
      return ep;
    };
    arc.endpoints[0] = label(seg.e_first, true);
    arc.endpoints[1] = label(seg.e_last, false);
    if (seg.e_first >= 1) arc.lambda.front() = arc.endpoints[0].lambda;
    if (seg.e_last >= 1 && !infinite) arc.lambda.back() = arc.endpoints[1].lambda;
    arcs.push_back(std::move(arc));
  }
  return arcs;
}

std::vector<SpectralArc> hermite_arcs(const FloquetExponent& fe, int resolution,
                                      const TraceOptions& opts) {
  return arcs_from_zero_set(trace_zero_set(fe, resolution, opts), fe);
}

void closed_gaps_on_arcs(std::vector<SpectralArc>& arcs, const FloquetExponent& fe,
                         int p_max) {
  CriticalPointReport crit;
  bool regular = false;
  try {
    crit = find_critical_points(fe);
    regular = crit.all_nondegenerate() && crit.nonsingular == Classification::yes;
  } catch (const Error&) {
  }
  const double kscale = std::max(std::abs(fe.lat.omega(1)), std::abs(fe.lat.omega(3)));

  for (auto& arc : arcs) {
    arc.closed_gaps.clear();
    if (arc.k_ab.size() != arc.lambda.size() || arc.k_ab.size() < 3) continue;
    const int n = static_cast<int>(arc.k_ab.size());
    std::vector<double> v(n);
    std::vector<Complex> kpts(n);
    bool bad = false;
    for (int i = 0; i < n && !bad; ++i) {
      kpts[i] = fe.k_of_ab(arc.k_ab[i][0], arc.k_ab[i][1]);
      try {
        v[i] = fe.u_v(kpts[i]).second;
      } catch (const PoleAtLatticePoint&) {
        bad = true;
      }
    }
    if (bad) continue;

    if (regular) {
      int flips = 0;
      for (int i = 2; i < n; ++i) {
        const double d1 = v[i - 1] - v[i - 2], d2 = v[i] - v[i - 1];
        if (std::fabs(d1) > 1e-10 && std::fabs(d2) > 1e-10 && (d1 > 0) != (d2 > 0))
          ++flips;
      }
      if (flips > 0)
        throw NonMonotoneV("closed_gaps_on_arcs: v not monotone along a regular arc");
    }

    for (int i = 0; i + 1 < n; ++i) {
      const double lo = std::min(v[i], v[i + 1]);
      const double hi = std::max(v[i], v[i + 1]);
      const int plo = static_cast<int>(std::ceil(lo / (kPi / 2.0) - 1e-12));
      const int phi = static_cast<int>(std::floor(hi / (kPi / 2.0) + 1e-12));
      for (int p = plo; p <= phi; ++p) {
        if (std::abs(p) > p_max) continue;
        const double target = p * kPi / 2.0;
        const double t =
            (hi > lo) ? std::clamp((target - v[i]) / (v[i + 1] - v[i]), 0.0, 1.0) : 0.5;
        Complex k = kpts[i] + t * (kpts[i + 1] - kpts[i]);
        bool ok = false;
        for (int it = 0; it < 40; ++it) {
          Complex fv, fp;
          try {
            fv = fe.f(k) - Complex(0, target);
            fp = fe.f_prime(k);
          } catch (const PoleAtLatticePoint&) {
            break;
          }
          if (std::abs(fv) < 1e-12 * std::max(1.0, std::fabs(target))) {
            ok = true;
            break;
          }
          if (std::abs(fp) < 1e-300) break;
          k -= fv / fp;
        }
        if (!ok) continue;
        bool at_end = false;
        for (int e = 0; e < 2; ++e) {
          const int ei = arc.endpoints[e].e_index;
          if (ei >= 1 && ei <= 3 &&
              std::abs(fe.lat.reduce(k - fe.lat.omega(ei))) < 1e-3 * kscale)
            at_end = true;
        }
        if (at_end) continue;
        bool dup = false;
        for (const auto& g : arc.closed_gaps)
          if (g.p == p && std::abs(g.k - k) < 1e-6 * kscale) dup = true;
        if (!dup) arc.closed_gaps.push_back({fe.lambda_of(k), k, p});
      }
    }
  }
}

AsymptoteReport asymptote_check(const SpectralArc& arc, const FloquetExponent& fe) {
  if (!arc.infinite)
    throw InsufficientTailPoints("asymptote_check: arc does not extend to infinity");
  const Complex etaomega = fe.eta * fe.omega;
  double lam_max = 0;
  for (const auto& l : arc.lambda) lam_max = std::max(lam_max, std::abs(l));
  if (lam_max < 100.0 * std::abs(etaomega))
    throw InsufficientTailPoints("asymptote_check: tail does not reach 100|eta omega|");
  if (arc.k_ab.size() != arc.lambda.size())
    throw InsufficientTailPoints("asymptote_check: arc carries no torus path");

  // Fit window: far enough out that O(s^4) terms are negligible, but not so
  // far that the tail points' own rounding noise (which grows with |lambda|)
  // swamps the s^2 term.
  const double fit_lo = 25.0 * std::abs(etaomega);
  const double fit_hi = 5000.0 * std::abs(etaomega);
  std::vector<Complex> s2s, rs;
  std::vector<double> sabs;
  for (size_t i = 0; i < arc.lambda.size(); ++i) {
    const double al = std::abs(arc.lambda[i]);
    if (al < fit_lo || al > fit_hi) continue;
    const Complex k = fe.lat.reduce(fe.k_of_ab(arc.k_ab[i][0], arc.k_ab[i][1]));
    const Complex z = k + (fe.eta / fe.omega) * k * k * k;
    const Complex s = z / (Complex(0, 1) * fe.omega);
    s2s.push_back(s * s);
    rs.push_back(arc.lambda[i] - 1.0 / (s * s));
    sabs.push_back(std::abs(s));
  }
  const int n = static_cast<int>(rs.size());
  if (n < 6) throw InsufficientTailPoints("asymptote_check: too few tail points");

  // least squares r = C + D s^2 + E s^4 (the s^4 term keeps its tail from
  // leaking into the constant)
  Complex M[3][3] = {};
  Complex rhs[3] = {};
  for (int i = 0; i < n; ++i) {
    const Complex base[3] = {Complex(1.0), s2s[i], s2s[i] * s2s[i]};
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) M[a][b] += std::conj(base[a]) * base[b];
      rhs[a] += std::conj(base[a]) * rs[i];
    }
  }
  // 3x3 Gaussian elimination with partial pivoting
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int rr = c + 1; rr < 3; ++rr)
      if (std::abs(M[rr][c]) > std::abs(M[piv][c])) piv = rr;
    std::swap(M[c], M[piv]);
    std::swap(rhs[c], rhs[piv]);
    for (int rr = c + 1; rr < 3; ++rr) {
      const Complex fac = M[rr][c] / M[c][c];
      for (int cc = c; cc < 3; ++cc) M[rr][cc] -= fac * M[c][cc];
      rhs[rr] -= fac * rhs[c];
    }
  }
  Complex sol[3];
  for (int rr = 2; rr >= 0; --rr) {
    Complex acc = rhs[rr];
    for (int cc = rr + 1; cc < 3; ++cc) acc -= M[rr][cc] * sol[cc];
    sol[rr] = acc / M[rr][rr];
  }
  const Complex C = sol[0];

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int i = 0; i < n; ++i) {
    const double y = std::abs(rs[i] - C);
    if (y < 1e-12 * std::max(1.0, std::abs(C))) continue;
    const double lx = std::log(sabs[i]), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  AsymptoteReport rep;
  rep.shift_estimate = C;
  rep.order_estimate = cnt >= 3 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
  rep.points_used = n;
  return rep;
}

Complex endpoint_tangent(const SpectralArc& arc, int endpoint_index,
                         const FloquetExponent& fe) {
  const ArcEndpoint& ep = arc.endpoints[endpoint_index == 0 ? 0 : 1];
  if (ep.e_index < 1 || ep.e_index > 3)
    throw EndpointAtInfinity("endpoint_tangent: endpoint is not a finite -omega^2 e_j");
  const Complex e = fe.lat.e(ep.e_index);
  const Complex g2 = fe.lat.g2();
  const Complex base = std::conj(fe.eta) * fe.omega + std::conj(e) * std::norm(fe.omega);
  const Complex dir = (3.0 * e * e - g2 / 4.0) * base * base;
  const double mag = std::abs(dir);
  if (mag == 0) throw Error("endpoint_tangent: degenerate tangent");
  return dir / mag;
}

Complex arc_secant_direction(const SpectralArc& arc, int endpoint_index) {
  const int n = static_cast<int>(arc.lambda.size());
  if (n < 3) throw Error("arc_secant_direction: arc too short");
  const Complex d = endpoint_index == 0 ? arc.lambda[2] - arc.lambda[1]
                                        : arc.lambda[n - 2] - arc.lambda[n - 3];
  const double mag = std::abs(d);
  if (mag == 0) throw Error("arc_secant_direction: coincident points");
  return d / mag;
}

double line_angle(Complex d1, Complex d2) {
  double th = std::fabs(std::arg(d1 / d2));
  th = std::fmod(th, kPi);
  if (th > kPi / 2.0) th = kPi - th;
  return th;
}

ExceptionalCurveReport find_exceptional_curve(double g3, double g2_lo, double g2_hi) {
  double g3_used = g3;
  auto sfun = [&](double g2) {
    const Lattice lat = Lattice::from_invariants(Complex(g2), Complex(g3_used));
    return (lat.eta(1) + lat.omega(1) * lat.e(1)).real();
  };
  double fa = sfun(g2_lo), fb = sfun(g2_hi);
  if ((fa > 0) == (fb > 0)) {
    g3_used = -g3;
    fa = sfun(g2_lo);
    fb = sfun(g2_hi);
    if ((fa > 0) == (fb > 0))
      throw NoSignChange("find_exceptional_curve: bracket does not straddle the root");
  }

  {
    double prev = fa;
    const bool increasing = fb > fa;
    for (int i = 1; i <= 8; ++i) {
      const double g2 = g2_lo + (g2_hi - g2_lo) * i / 9.0;
      const double s = sfun(g2);
      if ((s > prev) != increasing)
        throw Error("find_exceptional_curve: degeneracy function is not monotone");
      prev = s;
    }
  }

  double a = g2_lo, b = g2_hi;
  for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, std::fabs(b)); ++it) {
    const double m = 0.5 * (a + b);
    const double fm = sfun(m);
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  ExceptionalCurveReport rep;
  rep.g2_star = 0.5 * (a + b);
  rep.g3_star = g3_used;
  const double t = rep.g2_star * rep.g2_star * rep.g2_star;
  rep.j_star = 1728.0 * t / (t - 27.0 * g3_used * g3_used);
  const Lattice lat = Lattice::from_invariants(Complex(rep.g2_star), Complex(g3_used));
  double im2 = 0;
  for (int j = 1; j <= 3; ++j) im2 = std::max(im2, std::fabs(lat.e(j).imag()));
  rep.t_star = im2 > 0 ? lat.e(1).real() / im2 : 0.0;
  return rep;
}

std::array<Complex, 5> m2_endpoints(double g2, double g3, Complex omega) {
  const double disc = g2 * g2 * g2 - 27.0 * g3 * g3;
  if (std::fabs(disc) <=
      1e-12 * std::max({std::fabs(g2 * g2 * g2), 27.0 * std::fabs(g3 * g3), 1e-12}))
    throw DegenerateLattice("m2_endpoints: discriminant vanishes");
  std::array<Complex, 5> out{};
  const Complex s = std::sqrt(Complex(3.0 * g2, 0.0));
  out[0] = omega * omega * s;
  out[1] = -omega * omega * s;
  const auto roots = cubic_roots_4(Complex(9.0 * g2), Complex(27.0 * g3));
  for (int i = 0; i < 3; ++i) out[2 + i] = omega * omega * roots[i];
  return out;
}

}  // namespace lamespec
