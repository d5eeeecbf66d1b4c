// lamespec: spectra of real and complex Lame operators.
//
// Subcommands produce figure-ready CSV or JSON files:
//   real-bands        band edges (Ince matrices + Hill discriminant)
//   complex-arcs      m = 1 spectral arcs via Hermite's solutions
//   exceptional       the exceptional rhombic curve and its tripod spectrum
//   m2-endpoints      m = 2 spectral-curve endpoints + monodromy scan
//   discriminant-plot Delta(lambda) samples on a real interval
//   verify            invariant suite, pass/fail table
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure,
// 3 verification failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "lamespec/complex_spectrum.hpp"
#include "lamespec/elliptic.hpp"
#include "lamespec/hill.hpp"
#include "lamespec/ince.hpp"
#include "lamespec/lattice.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lamespec;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::yes:
      return "yes";
    case Classification::no:
      return "no";
    default:
      return "borderline";
  }
}

// All output files of one command, staged in memory and written atomically
// (temp file + rename) only once the whole command has succeeded.
class OutputSet {
 public:
  void stage(const fs::path& path, std::string content) {
    staged_.emplace_back(path, std::move(content));
  }
  void commit() {
    for (auto& [path, content] : staged_) {
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      const fs::path tmp = path.string() + ".tmp";
      {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        os << content;
        if (!os) throw Error("failed to write " + tmp.string());
      }
      fs::rename(tmp, path);
    }
  }

 private:
  std::vector<std::pair<fs::path, std::string>> staged_;
};

fs::path resolve_out(const std::string& out) {
  fs::path p(out);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("LAMESPEC_OUTDIR"); dir && *dir)
      p = fs::path(dir) / p;
  }
  return p;
}

fs::path with_suffix(const fs::path& base, const std::string& tag) {
  fs::path p = base;
  const std::string ext = p.extension().string();
  p.replace_extension();
  p += "." + tag;
  p += ext.empty() ? ".csv" : ext;
  return p;
}

struct CommonOpts {
  double g2 = 4.0, g3 = 0.0;
  int m = 1;
  int omega = 0;  // 0 = auto: 2 for rectangular, 1 for rhombic
  double k = 0.5;
  int grid = 256;
  double tol = 1e-9;
  int p_max = 8;
  std::string out = "out.csv";
  std::string format = "csv";
  std::vector<double> window;  // re_lo, re_hi, im_lo, im_hi
  std::vector<double> z0;      // re, im
};

int pick_omega(const Lattice& lat, int requested) {
  if (requested != 0) return requested;
  return lat.lattice_class() == LatticeClass::rhombic ? 1 : 2;
}

json arc_to_json(const SpectralArc& a) {
  json j;
  j["kind"] = a.infinite ? "infinite" : "finite";
  j["provenance"] = to_string(a.provenance);
  json pts = json::array();
  for (size_t i = 0; i < a.lambda.size(); ++i) {
    json p;
    p["re"] = a.lambda[i].real();
    p["im"] = a.lambda[i].imag();
    if (i < a.k_ab.size()) {
      p["a"] = a.k_ab[i][0];
      p["b"] = a.k_ab[i][1];
    }
    pts.push_back(p);
  }
  j["lambda"] = pts;
  json eps = json::array();
  for (const auto& e : a.endpoints) {
    json je;
    je["e_index"] = e.e_index;
    je["label"] = e.e_index == 0 ? "infinity"
                                 : (e.e_index > 0 ? "e" + std::to_string(e.e_index)
                                                  : "unlabeled");
    je["re"] = e.lambda.real();
    je["im"] = e.lambda.imag();
    eps.push_back(je);
  }
  j["endpoints"] = eps;
  json gaps = json::array();
  for (const auto& g : a.closed_gaps) {
    json jg;
    jg["p"] = g.p;
    jg["re"] = g.lambda.real();
    jg["im"] = g.lambda.imag();
    jg["k_re"] = g.k.real();
    jg["k_im"] = g.k.imag();
    gaps.push_back(jg);
  }
  j["closed_gaps"] = gaps;
  return j;
}

std::string arcs_csv(const std::vector<SpectralArc>& arcs) {
  std::string s = "arc_id,point_index,lambda_re,lambda_im,a,b,kind,provenance\n";
  for (size_t ai = 0; ai < arcs.size(); ++ai) {
    const auto& a = arcs[ai];
    for (size_t i = 0; i < a.lambda.size(); ++i) {
      s += std::to_string(ai) + "," + std::to_string(i) + "," +
           fmt(a.lambda[i].real()) + "," + fmt(a.lambda[i].imag()) + ",";
      if (i < a.k_ab.size())
        s += fmt(a.k_ab[i][0]) + "," + fmt(a.k_ab[i][1]);
      else
        s += ",";
      s += std::string(",") + (a.infinite ? "infinite" : "finite") + "," +
           to_string(a.provenance) + "\n";
    }
  }
  return s;
}

std::string endpoints_csv(const std::vector<SpectralArc>& arcs) {
  std::string s = "arc_id,end,label,lambda_re,lambda_im\n";
  for (size_t ai = 0; ai < arcs.size(); ++ai)
    for (int e = 0; e < 2; ++e) {
      const auto& ep = arcs[ai].endpoints[e];
      const std::string label =
          ep.e_index == 0
              ? "infinity"
              : (ep.e_index > 0 ? "e" + std::to_string(ep.e_index) : "unlabeled");
      s += std::to_string(ai) + "," + std::to_string(e) + "," + label + "," +
           fmt(ep.lambda.real()) + "," + fmt(ep.lambda.imag()) + "\n";
    }
  return s;
}

std::string gaps_csv(const std::vector<SpectralArc>& arcs) {
  std::string s = "arc_id,p,lambda_re,lambda_im,k_re,k_im,provenance\n";
  for (size_t ai = 0; ai < arcs.size(); ++ai)
    for (const auto& g : arcs[ai].closed_gaps)
      s += std::to_string(ai) + "," + std::to_string(g.p) + "," +
           fmt(g.lambda.real()) + "," + fmt(g.lambda.imag()) + "," +
           fmt(g.k.real()) + "," + fmt(g.k.imag()) + ",hermite\n";
  return s;
}

std::string bands_csv(const std::vector<BandStructure>& sets) {
  std::string s = "provenance,kind,index,lower,upper,width,open,antiperiodic\n";
  for (const auto& bs : sets) {
    s += std::string(to_string(bs.source)) + ",lambda0,0," + fmt(bs.lambda0) + "," +
         fmt(bs.lambda0) + ",0,1,0\n";
    for (size_t i = 0; i < bs.gaps.size(); ++i) {
      const auto& g = bs.gaps[i];
      s += std::string(to_string(bs.source)) + ",gap," + std::to_string(i + 1) + "," +
           fmt(g.lower) + "," + fmt(g.upper) + "," + fmt(g.width()) + "," +
           (g.open ? "1" : "0") + "," + (g.antiperiodic ? "1" : "0") + "\n";
    }
  }
  return s;
}

json bands_json(const BandStructure& bs) {
  json j;
  j["provenance"] = to_string(bs.source);
  j["lambda0"] = bs.lambda0;
  json gaps = json::array();
  for (const auto& g : bs.gaps) {
    json jg;
    jg["lower"] = g.lower;
    jg["upper"] = g.upper;
    jg["width"] = g.width();
    jg["open"] = g.open;
    jg["antiperiodic"] = g.antiperiodic;
    gaps.push_back(jg);
  }
  j["gaps"] = gaps;
  return j;
}

json critical_json(const CriticalPointReport& c) {
  json j;
  j["k_star_re"] = c.k_star.real();
  j["k_star_im"] = c.k_star.imag();
  j["c_star"] = c.c_star;
  j["lambda_star_re"] = c.lambda_star.real();
  j["lambda_star_im"] = c.lambda_star.imag();
  for (int i = 0; i < 3; ++i)
    j["nondegenerate_e" + std::to_string(i + 1)] = to_string(c.nondegenerate[i]);
  j["nonsingular"] = to_string(c.nonsingular);
  return j;
}

// ---------------------------------------------------------------------------

int cmd_real_bands(const CommonOpts& o, int n_check, int sweep) {
  const fs::path out = resolve_out(o.out);
  OutputSet files;

  const BandStructure ince = gap_edges(o.m, o.k);
  auto pot = PotentialSpec::jacobian_form(o.m, o.k);
  EdgeOptions eo;
  eo.tol = std::min(o.tol, 1e-9);
  const GapVerification ver = verify_first_m_gaps(pot, n_check, eo);

  if (o.format == "csv") {
    files.stage(out, bands_csv({ince, ver.bands}));
    if (sweep > 0) {
      std::string s = "k,curve,lambda,provenance\n";
      for (int i = 0; i < sweep; ++i) {
        const double kk = 0.02 + (0.97 - 0.02) * i / std::max(sweep - 1, 1);
        const BandStructure b = gap_edges(o.m, kk);
        s += fmt(kk) + ",lambda0," + fmt(b.lambda0) + ",ince\n";
        for (size_t g = 0; g < b.gaps.size(); ++g) {
          s += fmt(kk) + ",gap" + std::to_string(g + 1) + "_lo," +
               fmt(b.gaps[g].lower) + ",ince\n";
          s += fmt(kk) + ",gap" + std::to_string(g + 1) + "_hi," +
               fmt(b.gaps[g].upper) + ",ince\n";
        }
      }
      files.stage(with_suffix(out, "sweep"), s);
    }
  } else {
    json j;
    j["command"] = "real-bands";
    j["m"] = o.m;
    j["k"] = o.k;
    j["ince"] = bands_json(ince);
    j["monodromy"] = bands_json(ver.bands);
    j["verdict_first_m_open_rest_closed"] = ver.verdict;
    if (sweep > 0) {
      json sj = json::array();
      for (int i = 0; i < sweep; ++i) {
        const double kk = 0.02 + (0.97 - 0.02) * i / std::max(sweep - 1, 1);
        json row = bands_json(gap_edges(o.m, kk));
        row["k"] = kk;
        sj.push_back(row);
      }
      j["sweep"] = sj;
    }
    files.stage(out, j.dump(2) + "\n");
  }
  files.commit();
  std::printf("real-bands: m=%d k=%g -> %s (verdict %s)\n", o.m, o.k,
              out.string().c_str(), ver.verdict ? "pass" : "FAIL");
  return 0;
}

int cmd_complex_arcs(const CommonOpts& o) {
  const fs::path out = resolve_out(o.out);
  OutputSet files;

  const Lattice lat = Lattice::from_invariants(Complex(o.g2), Complex(o.g3), o.tol);
  const int widx = pick_omega(lat, o.omega);
  const FloquetExponent fe = make_floquet(lat, widx);
  auto arcs = hermite_arcs(fe, o.grid);
  closed_gaps_on_arcs(arcs, fe, o.p_max);
  const CriticalPointReport crit = find_critical_points(fe);

  if (o.format == "csv") {
    files.stage(out, arcs_csv(arcs));
    files.stage(with_suffix(out, "endpoints"), endpoints_csv(arcs));
    files.stage(with_suffix(out, "gaps"), gaps_csv(arcs));
    std::string cs =
        "k_star_re,k_star_im,c_star,lambda_star_re,lambda_star_im,"
        "nondegenerate_e1,nondegenerate_e2,nondegenerate_e3,nonsingular\n";
    cs += fmt(crit.k_star.real()) + "," + fmt(crit.k_star.imag()) + "," +
          fmt(crit.c_star) + "," + fmt(crit.lambda_star.real()) + "," +
          fmt(crit.lambda_star.imag());
    for (int i = 0; i < 3; ++i)
      cs += std::string(",") + to_string(crit.nondegenerate[i]);
    cs += std::string(",") + to_string(crit.nonsingular) + "\n";
    files.stage(with_suffix(out, "critical"), cs);
  } else {
    json j;
    j["command"] = "complex-arcs";
    j["g2"] = o.g2;
    j["g3"] = o.g3;
    j["omega"] = widx;
    j["grid"] = o.grid;
    json ja = json::array();
    for (const auto& a : arcs) ja.push_back(arc_to_json(a));
    j["arcs"] = ja;
    j["critical_point"] = critical_json(crit);
    files.stage(out, j.dump(2) + "\n");
  }
  files.commit();
  std::printf("complex-arcs: g2=%g g3=%g omega=%d grid=%d -> %s (%zu arcs)\n", o.g2,
              o.g3, widx, o.grid, out.string().c_str(), arcs.size());
  return 0;
}

int cmd_exceptional(const CommonOpts& o) {
  const fs::path out = resolve_out(o.out);
  OutputSet files;

  const ExceptionalCurveReport rep = find_exceptional_curve(o.g3);
  const Lattice lat =
      Lattice::from_invariants(Complex(rep.g2_star), Complex(rep.g3_star), o.tol);
  const FloquetExponent fe = make_floquet(lat, 1);
  auto arcs = hermite_arcs(fe, o.grid);
  closed_gaps_on_arcs(arcs, fe, o.p_max);

  if (o.format == "csv") {
    std::string s = "g2_star,g3_star,j_star,t_star\n";
    s += fmt(rep.g2_star) + "," + fmt(rep.g3_star) + "," + fmt(rep.j_star) + "," +
         fmt(rep.t_star) + "\n";
    files.stage(out, s);
    files.stage(with_suffix(out, "arcs"), arcs_csv(arcs));
  } else {
    json j;
    j["command"] = "exceptional";
    j["g2_star"] = rep.g2_star;
    j["g3_star"] = rep.g3_star;
    j["j_star"] = rep.j_star;
    j["t_star"] = rep.t_star;
    json ja = json::array();
    for (const auto& a : arcs) ja.push_back(arc_to_json(a));
    j["arcs"] = ja;
    files.stage(out, j.dump(2) + "\n");
  }
  files.commit();
  std::printf("exceptional: g2*=%.10g g3*=%g j*=%.6f -> %s\n", rep.g2_star, rep.g3_star,
              rep.j_star, out.string().c_str());
  return 0;
}

int cmd_m2_endpoints(const CommonOpts& o) {
  const fs::path out = resolve_out(o.out);
  OutputSet files;

  const Lattice lat = Lattice::from_invariants(Complex(o.g2), Complex(o.g3), o.tol);
  const int widx = pick_omega(lat, o.omega);
  const Complex w = lat.omega(widx);
  const auto eps = m2_endpoints(o.g2, o.g3, w);

  ComplexWindow win;
  if (o.window.size() == 4) {
    win = {o.window[0], o.window[1], o.window[2], o.window[3]};
  } else {
    double re_lo = 1e30, re_hi = -1e30, im_lo = 1e30, im_hi = -1e30;
    for (const auto& e : eps) {
      re_lo = std::min(re_lo, e.real());
      re_hi = std::max(re_hi, e.real());
      im_lo = std::min(im_lo, e.imag());
      im_hi = std::max(im_hi, e.imag());
    }
    const double mre = 0.25 * (re_hi - re_lo) + 0.5;
    const double mim = 0.25 * (im_hi - im_lo) + 0.5;
    // slight asymmetry keeps grid rows off the real-axis arcs
    win = {re_lo - mre, re_hi + 2.0 * mre, im_lo - mim, im_hi + mim + 0.0137};
  }
  PotentialSpec pot =
      o.z0.size() == 2
          ? PotentialSpec::weierstrass_form(lat, 2, widx, Complex(o.z0[0], o.z0[1]))
          : PotentialSpec::weierstrass_form(lat, 2, widx);
  ScanOptions so;
  so.tol = std::max(1e-8, o.tol);
  const int res = std::min(o.grid, 128);
  auto arcs = spectrum_scan(pot, win, res, so);

  if (o.format == "csv") {
    std::string s = "index,factor,z_re,z_im,lambda_re,lambda_im\n";
    for (int i = 0; i < 5; ++i) {
      const Complex z = eps[i] / (w * w);
      s += std::to_string(i) + "," + (i < 2 ? "quadratic" : "cubic") + "," +
           fmt(z.real()) + "," + fmt(z.imag()) + "," + fmt(eps[i].real()) + "," +
           fmt(eps[i].imag()) + "\n";
    }
    files.stage(out, s);
    files.stage(with_suffix(out, "arcs"), arcs_csv(arcs));
  } else {
    json j;
    j["command"] = "m2-endpoints";
    j["g2"] = o.g2;
    j["g3"] = o.g3;
    j["omega"] = widx;
    json je = json::array();
    for (int i = 0; i < 5; ++i) {
      json e;
      e["factor"] = i < 2 ? "quadratic" : "cubic";
      e["re"] = eps[i].real();
      e["im"] = eps[i].imag();
      je.push_back(e);
    }
    j["endpoints"] = je;
    json ja = json::array();
    for (const auto& a : arcs) ja.push_back(arc_to_json(a));
    j["arcs"] = ja;
    files.stage(out, j.dump(2) + "\n");
  }
  files.commit();
  std::printf("m2-endpoints: g2=%g g3=%g -> %s (%zu scan arcs)\n", o.g2, o.g3,
              out.string().c_str(), arcs.size());
  return 0;
}

int cmd_discriminant_plot(const CommonOpts& o, double lo, double hi, int n,
                          bool weierstrass) {
  const fs::path out = resolve_out(o.out);
  OutputSet files;

  PotentialSpec pot =
      weierstrass
          ? PotentialSpec::weierstrass_form(
                Lattice::from_invariants(Complex(o.g2), Complex(o.g3), o.tol), o.m,
                o.omega == 0 ? 1 : o.omega)
          : PotentialSpec::jacobian_form(o.m, o.k);

  std::string s = "lambda,delta_re,delta_im,provenance\n";
  json rows = json::array();
  for (int i = 0; i < n; ++i) {
    const double lam = lo + (hi - lo) * i / std::max(n - 1, 1);
    const auto R = monodromy(pot, Complex(lam), std::min(o.tol, 1e-9));
    if (o.format == "csv") {
      s += fmt(lam) + "," + fmt(R.discriminant.real()) + "," +
           fmt(R.discriminant.imag()) + ",monodromy\n";
    } else {
      json row;
      row["lambda"] = lam;
      row["delta_re"] = R.discriminant.real();
      row["delta_im"] = R.discriminant.imag();
      rows.push_back(row);
    }
  }
  if (o.format == "csv") {
    files.stage(out, s);
  } else {
    json j;
    j["command"] = "discriminant-plot";
    j["m"] = o.m;
    j["samples"] = rows;
    files.stage(out, j.dump(2) + "\n");
  }
  files.commit();
  std::printf("discriminant-plot: %d samples on [%g, %g] -> %s\n", n, lo, hi,
              out.string().c_str());
  return 0;
}

struct VerifyRow {
  std::string name;
  double residual;
  double threshold;
  bool pass() const { return residual < threshold; }
};

int cmd_verify() {
  std::vector<VerifyRow> rows;
  std::mt19937 rng(20260809);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  auto random_lattices = [&](int n) {
    std::vector<Lattice> out;
    while (static_cast<int>(out.size()) < n) {
      const int kind = static_cast<int>(out.size()) % 3;
      try {
        if (kind == 0)
          out.push_back(Lattice::from_invariants(Complex(3.2 + 6 * uni(rng)),
                                                 Complex(0.5 + uni(rng))));
        else if (kind == 1)
          out.push_back(Lattice::from_invariants(Complex(-4 + 5 * uni(rng)),
                                                 Complex(1.0 + uni(rng))));
        else
          out.push_back(Lattice::from_periods(Complex(0.8 + uni(rng), 0.3 * uni(rng)),
                                              Complex(0.2 * uni(rng), 0.9 + uni(rng))));
      } catch (const Error&) {
      }
    }
    return out;
  };
  const auto lats = random_lattices(10);

  {
    double worst = 0;
    for (const auto& L : lats)
      worst = std::max(worst, std::abs(L.eta(1) * L.omega(3) - L.eta(3) * L.omega(1) -
                                       Complex(0, 1.5707963267948966)));
    rows.push_back({"legendre_relation", worst, 1e-12});
  }
  {
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
      const auto& L = lats[i % lats.size()];
      const Complex z = (0.07 + 0.86 * uni(rng)) * 2.0 * L.omega(1) +
                        (0.07 + 0.86 * uni(rng)) * 2.0 * L.omega(3);
      const Complex P = wp(z, L), Pp = wp_prime(z, L);
      const Complex res = Pp * Pp - (4.0 * P * P * P - L.g2() * P - L.g3());
      worst = std::max(worst, std::abs(res) / std::max(1.0, std::abs(P * P * P)));
    }
    rows.push_back({"wp_ode_residual", worst, 1e-10});
  }
  {
    double worst = 0;
    const auto& L = lats[0];
    for (int i = 0; i < 20; ++i) {
      const Complex z = (0.1 + 0.8 * uni(rng)) * 2.0 * L.omega(1) +
                        (0.1 + 0.8 * uni(rng)) * 2.0 * L.omega(3);
      const double h = 1e-5 * std::abs(L.omega(1));
      const Complex zd = (zeta(z + h, L) - zeta(z - h, L)) / (2.0 * h);
      worst = std::max(worst, std::abs(zd + wp(z, L)));
      for (int j = 1; j <= 3; ++j) {
        worst = std::max(worst, std::abs(zeta(z + 2.0 * L.omega(j), L) - zeta(z, L) -
                                         2.0 * L.eta(j)));
        worst = std::max(worst, std::abs(wp(z + 2.0 * L.omega(j), L) - wp(z, L)));
      }
    }
    rows.push_back({"zeta_periodicity_derivative", worst, 1e-6});
  }
  {
    const double K = quarter_period_K(0.5);
    double worst = std::fabs(K - 1.6857503548125960429);
    worst = std::max(worst, std::fabs(jacobi_sn(K, 0.5) - 1.0));
    worst = std::max(worst, std::fabs(jacobi_sn(0.0, 0.5)));
    worst =
        std::max(worst, std::fabs(jacobi_sn(0.37 + 4.0 * K, 0.5) - jacobi_sn(0.37, 0.5)));
    rows.push_back({"jacobi_sn_quarter_period", worst, 1e-12});
  }
  {
    const auto bs = gap_edges(2, 0.5);
    const double s = std::sqrt(1 - 0.25 + 0.0625);
    double worst = std::fabs(bs.lambda0 - 2 * (1.25 - s));
    worst = std::max(worst, std::fabs(bs.gaps[0].lower - 1.25));
    worst = std::max(worst, std::fabs(bs.gaps[0].upper - 2.0));
    worst = std::max(worst, std::fabs(bs.gaps[1].lower - 4.25));
    worst = std::max(worst, std::fabs(bs.gaps[1].upper - 2 * (1.25 + s)));
    rows.push_back({"ince_m2_closed_forms", worst, 1e-12});
  }
  {
    auto pot = PotentialSpec::jacobian_form(1, 0.5);
    auto bm = real_band_edges(pot, -0.5, 6.0, 1);
    const auto bi = gap_edges(1, 0.5);
    double worst = std::fabs(bm.lambda0 - bi.lambda0);
    worst = std::max(worst, std::fabs(bm.gaps[0].lower - bi.gaps[0].lower));
    worst = std::max(worst, std::fabs(bm.gaps[0].upper - bi.gaps[0].upper));
    rows.push_back({"ince_vs_monodromy_m1", worst, 1e-6});
  }
  {
    auto pot = PotentialSpec::jacobian_form(2, 0.6);
    double worst = 0;
    for (double lr : {0.4, 2.1, 5.3})
      for (double li : {-0.8, 0.5}) {
        const auto R = monodromy(pot, Complex(lr, li), 1e-10);
        worst = std::max(worst, std::abs(R.det() - 1.0));
      }
    rows.push_back({"monodromy_wronskian", worst, 1e-8});
  }
  {
    const Lattice L = Lattice::from_invariants(Complex(8.0), Complex(1.0));
    auto p1 = PotentialSpec::weierstrass_form(L, 1, 2);
    auto p2 = PotentialSpec::weierstrass_form(L, 1, 2, L.omega(3) + 0.3 * L.omega(1));
    double worst = 0;
    for (double lr : {0.7, 3.0})
      for (double li : {-1.0, 0.8}) {
        const Complex lam(lr, li);
        worst = std::max(worst, std::abs(monodromy(p1, lam, 1e-10).discriminant -
                                         monodromy(p2, lam, 1e-10).discriminant));
      }
    rows.push_back({"z0_independence", worst, 1e-6});
  }
  {
    const Lattice L = Lattice::from_invariants(Complex(8.0), Complex(1.0));
    const FloquetExponent fe = make_floquet(L, 2);
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
      const Complex k = (0.08 + 0.84 * uni(rng)) * 2.0 * L.omega(1) +
                        (0.08 + 0.84 * uni(rng)) * 2.0 * L.omega(3);
      worst =
          std::max(worst, std::fabs(fe.u_v(k + 2.0 * L.omega(1)).first - fe.u_v(k).first));
      worst =
          std::max(worst, std::fabs(fe.u_v(k + 2.0 * L.omega(3)).first - fe.u_v(k).first));
    }
    for (int j = 1; j <= 3; ++j)
      worst = std::max(worst, std::fabs(fe.u_v(L.omega(j)).first));
    rows.push_back({"floquet_u_torus", worst, 1e-9});
  }
  {
    const Lattice L = Lattice::from_invariants(Complex(8.0), Complex(1.0));
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
      const Complex z = (0.12 + 0.76 * uni(rng)) * 2.0 * L.omega(1) +
                        (0.12 + 0.76 * uni(rng)) * 2.0 * L.omega(3);
      const Complex kp = (0.12 + 0.76 * uni(rng)) * 2.0 * L.omega(1) +
                         (0.12 + 0.76 * uni(rng)) * 2.0 * L.omega(3);
      const double h = 1e-3 * std::abs(L.omega(1));
      const Complex num =
          (-hermite_psi(z + 2 * h, kp, L) + 16.0 * hermite_psi(z + h, kp, L) -
           30.0 * hermite_psi(z, kp, L) + 16.0 * hermite_psi(z - h, kp, L) -
           hermite_psi(z - 2 * h, kp, L)) /
          (12.0 * h * h);
      const Complex resid = -num + 2.0 * wp(z, L) * hermite_psi(z, kp, L) +
                            wp(kp, L) * hermite_psi(z, kp, L);
      worst = std::max(worst, std::abs(resid) / std::max(1.0, std::abs(wp(kp, L) *
                                                                       hermite_psi(z, kp, L))));
    }
    rows.push_back({"hermite_ode_residual", worst, 1e-7});
  }
  {
    const Lattice L = Lattice::from_periods(Complex(1.0), Complex(0, 1));
    const double g4 = std::pow(std::tgamma(0.25), 4);
    const Complex w2 = L.omega(2);
    double worst =
        std::abs(-w2 * w2 * L.e(1) - Complex(0, -g4 / (16 * 3.14159265358979323846)));
    rows.push_back({"lemniscatic_endpoint", worst, 1e-8});
  }

  std::printf("%-32s %-12s %-12s %s\n", "check", "residual", "threshold", "status");
  bool all = true;
  for (const auto& r : rows) {
    std::printf("%-32s %-12.3e %-12.3e %s\n", r.name.c_str(), r.residual, r.threshold,
                r.pass() ? "PASS" : "FAIL");
    all = all && r.pass();
  }
  std::printf("verify: %s\n", all ? "all checks passed" : "FAILURES present");
  return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra of real and complex Lame operators"};
  app.require_subcommand(1);

  CommonOpts o;
  int n_check = 3, sweep = 0, nsamples = 400;
  double lam_lo = -1.0, lam_hi = 10.0;
  bool dp_weier = false;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--g2", o.g2, "invariant g2");
    c->add_option("--g3", o.g3, "invariant g3");
    c->add_option("--m", o.m, "Lame index m");
    c->add_option("--omega", o.omega, "half-period index 1|2|3 (0 = auto)")
        ->check(CLI::Range(0, 3));
    c->add_option("--k", o.k, "Jacobian modulus k in (0,1)");
    c->add_option("--grid", o.grid, "grid resolution");
    c->add_option("--tol", o.tol, "tolerance");
    c->add_option("--p-max", o.p_max, "closed-gap search bound |p| <= p_max");
    c->add_option("--window", o.window, "re_lo re_hi im_lo im_hi")->expected(4);
    c->add_option("--z0", o.z0, "potential shift z0 (re im)")->expected(2);
    c->add_option("--out", o.out, "output path (LAMESPEC_OUTDIR prefixes relative)");
    c->add_option("--format", o.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  auto* rb = app.add_subcommand("real-bands", "band edges, Ince + monodromy");
  add_common(rb);
  rb->add_option("--n-check", n_check, "closed candidates to verify past gap m");
  rb->add_option("--sweep", sweep, "emit eigenvalue curves over a k sweep");

  auto* ca = app.add_subcommand("complex-arcs", "m=1 spectral arcs (Hermite)");
  add_common(ca);

  auto* ex = app.add_subcommand("exceptional", "exceptional rhombic curve");
  add_common(ex);

  auto* m2 = app.add_subcommand("m2-endpoints", "m=2 endpoints + monodromy scan");
  add_common(m2);

  auto* dp = app.add_subcommand("discriminant-plot", "Delta(lambda) samples");
  add_common(dp);
  dp->add_option("--lambda-min", lam_lo, "interval start");
  dp->add_option("--lambda-max", lam_hi, "interval end");
  dp->add_option("--n", nsamples, "number of samples");
  dp->add_flag("--weierstrass", dp_weier, "use the Weierstrass form (g2, g3, omega)");

  auto* vf = app.add_subcommand("verify", "run the invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (rb->parsed()) {
      if (!(o.k > 0 && o.k < 1)) {
        std::fprintf(stderr,
                     "{\"error\":\"validation\",\"message\":\"--k in (0,1) required\"}\n");
        return 1;
      }
      return cmd_real_bands(o, n_check, sweep);
    }
    if (ca->parsed()) return cmd_complex_arcs(o);
    if (ex->parsed()) return cmd_exceptional(o);
    if (m2->parsed()) return cmd_m2_endpoints(o);
    if (dp->parsed()) return cmd_discriminant_plot(o, lam_lo, lam_hi, nsamples, dp_weier);
    if (vf->parsed()) return cmd_verify();
  } catch (const DegenerateLattice& e) {
    std::fprintf(stderr, "{\"error\":\"validation\",\"message\":\"%s\"}\n", e.what());
    return 1;
  } catch (const InvalidPeriodRatio& e) {
    std::fprintf(stderr, "{\"error\":\"validation\",\"message\":\"%s\"}\n", e.what());
    return 1;
  } catch (const ModulusOutOfRange& e) {
    std::fprintf(stderr, "{\"error\":\"validation\",\"message\":\"%s\"}\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "{\"error\":\"numerical\",\"message\":\"%s\"}\n", e.what());
    return 2;
  }
  return 1;
}
