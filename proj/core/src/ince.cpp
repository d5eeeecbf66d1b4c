#include "lamespec/ince.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace lamespec {

namespace {

void check_modulus_range(double k) {
  if (!(k > 1e-6) || !(k < 1.0 - 1e-6))
    throw ModulusOutOfRange("modulus k must lie in (1e-6, 1 - 1e-6)");
}

double diag_per(int n, int m, double k) {
  return 0.5 * m * (m + 1) * k * k + (1.0 - 0.5 * k * k) * 4.0 * n * n;
}

double diag_anti(int n, int m, double k) {
  const double j = 2.0 * n + 1.0;
  return 0.5 * m * (m + 1) * k * k + (1.0 - 0.5 * k * k) * j * j;
}

}  // namespace

double ince_P(double z, int m, double k) {
  const double k2 = k * k;
  return 0.25 * m * (m + 1) * k2 - 0.5 * z * k2 - z * z * k2;
}

double ince_Lambda(int n, double lambda, int m, double k) {
  return lambda - diag_per(n, m, k);
}

double ince_P_star(double z, int m, double k) {
  const double k2 = k * k;
  const double w = 2.0 * z - 1.0;
  return 0.25 * k2 * (m * (m + 1) - w - w * w);
}

double ince_Lambda_star(int n, double lambda, int m, double k) {
  return lambda - diag_anti(n, m, k);
}

double InceParams::a() const {
  return modulus_k * modulus_k / (2.0 - modulus_k * modulus_k);
}
double InceParams::b() const { return -a(); }
double InceParams::d() const { return m * (m + 1) * a(); }
double InceParams::c(double lambda) const {
  const double k2 = modulus_k * modulus_k;
  return (2.0 * lambda - m * (m + 1) * k2) / (2.0 - k2);
}

std::vector<double> eigenvalues_tridiagonal(const std::vector<double>& diag,
                                            const std::vector<double>& lower,
                                            const std::vector<double>& upper) {
  const int n = static_cast<int>(diag.size());
  if (n == 0) return {};
  if (static_cast<int>(lower.size()) != n - 1 || static_cast<int>(upper.size()) != n - 1)
    throw Error("eigenvalues_tridiagonal: off-diagonal lengths must be n-1");
  Eigen::VectorXd d(n), e(std::max(n - 1, 1));
  for (int i = 0; i < n; ++i) d[i] = diag[i];
  for (int i = 0; i + 1 < n; ++i) {
    const double prod = lower[i] * upper[i];
    if (!(prod > 0.0))
      throw NotSymmetrizable("eigenvalues_tridiagonal: lower*upper must be positive");
    e[i] = std::sqrt(prod);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(d, e.head(std::max(n - 1, 0)), Eigen::EigenvaluesOnly);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = solver.eigenvalues()[i];
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> TridiagPencil::eigenvalues() const {
  // det K(lambda) = det(lambda*I - T); the similarity leaves only the
  // products sub*sup, so T shares them with K.
  return eigenvalues_tridiagonal(diag, sub, sup);
}

double TridiagPencil::det_at(double lambda) const {
  const int n = size();
  double dm2 = 1.0;
  double dm1 = lambda - diag[0];
  double peak = std::max(std::fabs(dm1), 1.0);
  for (int i = 1; i < n; ++i) {
    const double di = (lambda - diag[i]) * dm1 - sub[i - 1] * sup[i - 1] * dm2;
    dm2 = dm1;
    dm1 = di;
    peak = std::max(peak, std::fabs(di));
  }
  return dm1 / peak;
}

InceMatrices build_ince(int m, double k) {
  if (m < 1) throw Error("build_ince: m must be >= 1");
  check_modulus_range(k);
  InceMatrices M;
  M.m = m;
  M.nu = m / 2;
  M.modulus_k = k;
  const int nu = M.nu;
  const bool even = (m % 2 == 0);

  // Periodic blocks: rows 0..nu (cos 2n phi) and 1..nu (sin 2n phi). For even
  // m the sequences terminate there (P(nu) = 0); for odd m the leading block
  // decouples because the forward coupling P(-nu-1) vanishes.
  for (int n = 0; n <= nu; ++n) {
    M.per_cos.diag.push_back(diag_per(n, m, k));
    if (n < nu) M.per_cos.sup.push_back(ince_P(-n - 1.0, m, k));
    if (n >= 1) M.per_cos.sub.push_back(n == 1 ? 2.0 * ince_P(0.0, m, k)
                                               : ince_P(n - 1.0, m, k));
  }
  for (int n = 1; n <= nu; ++n) {
    M.per_sin.diag.push_back(diag_per(n, m, k));
    if (n < nu) M.per_sin.sup.push_back(ince_P(-n - 1.0, m, k));
    if (n >= 2) M.per_sin.sub.push_back(ince_P(n - 1.0, m, k));
  }

  // Antiperiodic blocks: rows 0..ra with ra = nu-1 (even m, the forward
  // coupling P*(-nu) vanishes) or ra = nu (odd m, termination at P*(nu+1)=0).
  // Row 0 carries the +-P*(0) corner from the n=0 recurrence.
  const int ra = even ? nu - 1 : nu;
  for (int n = 0; n <= ra; ++n) {
    const double base = diag_anti(n, m, k);
    M.anti_cos.diag.push_back(n == 0 ? base - ince_P_star(0.0, m, k) : base);
    M.anti_sin.diag.push_back(n == 0 ? base + ince_P_star(0.0, m, k) : base);
    if (n < ra) {
      M.anti_cos.sup.push_back(ince_P_star(-n - 1.0, m, k));
      M.anti_sin.sup.push_back(ince_P_star(-n - 1.0, m, k));
    }
    if (n >= 1) {
      M.anti_cos.sub.push_back(ince_P_star(n, m, k));
      M.anti_sin.sub.push_back(ince_P_star(n, m, k));
    }
  }

  M.S1 = M.per_cos.eigenvalues();
  M.S2 = M.per_sin.eigenvalues();
  M.S1s = M.anti_cos.eigenvalues();
  M.S2s = M.anti_sin.eigenvalues();
  return M;
}

InceMatrices build_even_m(int m, double k) {
  if (m % 2 != 0) throw Error("build_even_m: m must be even");
  return build_ince(m, k);
}

InceMatrices build_odd_m(int m, double k) {
  if (m % 2 == 0) throw Error("build_odd_m: m must be odd");
  return build_ince(m, k);
}

BandStructure gap_edges(int m, double k) {
  const InceMatrices M = build_ince(m, k);
  std::vector<double> p(M.S1);
  p.insert(p.end(), M.S2.begin(), M.S2.end());
  std::sort(p.begin(), p.end());
  std::vector<double> q(M.S1s);
  q.insert(q.end(), M.S2s.begin(), M.S2s.end());
  std::sort(q.begin(), q.end());

  BandStructure bs;
  bs.source = Provenance::ince;
  bs.lambda0 = p.front();
  for (int j = 1; j <= m; ++j) {
    Gap g;
    if (j % 2 == 1) {
      const int t = (j + 1) / 2;
      g.lower = q[2 * t - 2];
      g.upper = q[2 * t - 1];
      g.antiperiodic = true;
    } else {
      const int t = j / 2;
      g.lower = p[2 * t - 1];
      g.upper = p[2 * t];
      g.antiperiodic = false;
    }
    g.open = g.width() > 0.0;
    bs.gaps.push_back(g);
  }
  return bs;
}

}  // namespace lamespec
